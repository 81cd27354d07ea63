#pragma once

// Little-endian binary encoding helpers shared by every *.bin file in an
// index directory. Readers throw CorruptionError on truncation.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyperrag/errors.hpp"

namespace hyperrag::io {

class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s.data(), s.size());
  }
  void raw(std::string_view s) { buf_.append(s.data(), s.size()); }
  void f64s(std::span<const double> values) {
    for (double v : values) f64(v);
  }

  const std::string& bytes() const noexcept { return buf_; }

 private:
  void put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string_view data, std::string source)
      : data_(data), source_(std::move(source)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64() { return std::bit_cast<double>(get_le(8)); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > remaining()) fail("string length exceeds remaining bytes");
    return std::string(take(static_cast<std::size_t>(n)));
  }
  std::string_view raw(std::size_t n) { return take(n); }
  std::vector<double> f64s(std::size_t n) {
    if (n > remaining() / 8) fail("vector length exceeds remaining bytes");
    std::vector<double> out(n);
    for (double& v : out) v = f64();
    return out;
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) fail("trailing bytes after payload");
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw CorruptionError(source_ + ": " + why + " (offset " + std::to_string(pos_) + ")");
  }

 private:
  std::string_view take(std::size_t n) {
    if (n > remaining()) fail("unexpected end of file");
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t get_le(int width) {
    std::string_view bytes = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    }
    return v;
  }

  std::string_view data_;
  std::string source_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

// Writes the magic tag and version; read_header checks both.
inline void write_header(BinaryWriter& w, std::string_view magic, std::uint32_t version) {
  w.raw(magic);
  w.u32(version);
}

inline void read_header(BinaryReader& r, std::string_view magic, std::uint32_t version) {
  if (r.remaining() < magic.size() || r.raw(magic.size()) != magic) r.fail("bad magic");
  const std::uint32_t found = r.u32();
  if (found != version) {
    throw CorruptionError("unsupported format version " + std::to_string(found) + " (expected " +
                          std::to_string(version) + ")");
  }
}

}  // namespace hyperrag::io
