#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperrag/binary_io.hpp"
#include "hyperrag/corpus.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/text.hpp"
#include "hyperrag/vector_ops.hpp"

namespace hyperrag {

using EuclideanVector = Vector;

class EncoderClient {
 public:
  virtual ~EncoderClient() = default;
  virtual std::size_t dimension() const = 0;
  // Identifies the encoder and its output space; persisted with cached vectors.
  virtual std::string fingerprint() const = 0;
  // Must be safe to call concurrently.
  virtual std::vector<EuclideanVector> encode_batch(const std::vector<std::string>& texts) const = 0;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Hashed bag of words: each lower-cased alphanumeric token adds +-1 to one of
// d buckets, then the vector is L2-normalized. Order-invariant and
// bit-deterministic across platforms.
class HashingEncoder final : public EncoderClient {
 public:
  explicit HashingEncoder(std::size_t dim = 256) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("encoder dimension must be positive");
  }

  std::size_t dimension() const override { return dim_; }
  std::string fingerprint() const override {
    return "hashed-bow-fnv1a-v1:d=" + std::to_string(dim_);
  }

  EuclideanVector encode_one(std::string_view s) const {
    EuclideanVector v(dim_, 0.0);
    for (const std::string& tok : text::alnum_tokens(s)) {
      const std::uint64_t h = detail::fnv1a64(tok);
      const std::size_t bucket = static_cast<std::size_t>(h % dim_);
      const double sign = (detail::splitmix64(h) >> 63) != 0 ? -1.0 : 1.0;
      v[bucket] += sign;
    }
    const double n = norm(v);
    if (n == 0.0) throw DomainError("text has no alphanumeric tokens to encode");
    for (double& x : v) x /= n;
    return v;
  }

  std::vector<EuclideanVector> encode_batch(const std::vector<std::string>& texts) const override {
    std::vector<EuclideanVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(encode_one(t));
    return out;
  }

 private:
  std::size_t dim_;
};

inline void check_encoder_output(const std::vector<EuclideanVector>& vectors, std::size_t expected_count,
                                 std::size_t dim) {
  if (vectors.size() != expected_count) {
    throw ConfigError("encoder returned " + std::to_string(vectors.size()) + " vectors for " +
                      std::to_string(expected_count) + " texts");
  }
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw ConfigError("encoder returned dimension " + std::to_string(v.size()) +
                        ", configured dimension is " + std::to_string(dim));
    }
    if (!all_finite(v)) throw ConfigError("encoder returned non-finite values");
  }
}

inline EuclideanVector encode(const std::string& text, const EncoderClient& client) {
  if (text.empty()) throw DomainError("cannot encode an empty string");
  auto out = client.encode_batch({text});
  check_encoder_output(out, 1, client.dimension());
  return std::move(out.front());
}

inline std::vector<EuclideanVector> encode_all(const std::vector<std::string>& texts,
                                               const EncoderClient& client,
                                               std::size_t batch_size = 64) {
  if (batch_size == 0) throw ConfigError("encoder batch size must be positive");
  std::vector<EuclideanVector> out;
  out.reserve(texts.size());
  for (std::size_t at = 0; at < texts.size(); at += batch_size) {
    const std::size_t end = std::min(texts.size(), at + batch_size);
    std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(at),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    for (const auto& t : batch) {
      if (t.empty()) throw DomainError("cannot encode an empty string");
    }
    auto vecs = client.encode_batch(batch);
    check_encoder_output(vecs, batch.size(), client.dimension());
    for (auto& v : vecs) out.push_back(std::move(v));
  }
  return out;
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b, "cosine_similarity");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_similarity: zero vector");
  const double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

// (kind, id) -> vector store with a fixed dimension and encoder fingerprint.
// Readers share the lock; put() takes it exclusively.
class EmbeddingCache {
 public:
  static constexpr std::string_view kMagic = "HRGEMB";
  static constexpr std::uint32_t kVersion = 1;

  EmbeddingCache(std::size_t dim, std::string fingerprint)
      : dim_(dim), fingerprint_(std::move(fingerprint)) {}

  EmbeddingCache(const EmbeddingCache& other)
      : dim_(other.dim_), fingerprint_(other.fingerprint_) {
    std::shared_lock lock(other.mutex_);
    store_ = other.store_;
  }
  EmbeddingCache& operator=(const EmbeddingCache&) = delete;

  std::size_t dimension() const noexcept { return dim_; }
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  void put(NodeKind kind, const std::string& id, EuclideanVector v) {
    if (v.size() != dim_) {
      throw DomainError("embedding for " + std::string(to_string(kind)) + " '" + id +
                        "' has dimension " + std::to_string(v.size()) + ", cache expects " +
                        std::to_string(dim_));
    }
    if (!all_finite(v)) throw DomainError("embedding for '" + id + "' is not finite");
    std::unique_lock lock(mutex_);
    store_[{kind, id}] = std::move(v);
  }

  std::optional<EuclideanVector> get(NodeKind kind, const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = store_.find({kind, id});
    if (it == store_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(NodeKind kind, const std::string& id) const {
    std::shared_lock lock(mutex_);
    return store_.count({kind, id}) != 0;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return store_.size();
  }

  std::string serialize() const {
    std::shared_lock lock(mutex_);
    io::BinaryWriter w;
    io::write_header(w, kMagic, kVersion);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.str(fingerprint_);
    w.u64(store_.size());
    for (const auto& [key, vec] : store_) {
      w.u8(static_cast<std::uint8_t>(key.first));
      w.str(key.second);
      w.f64s(vec);
    }
    return w.bytes();
  }

  static EmbeddingCache deserialize(std::string_view bytes, const std::string& source) {
    io::BinaryReader r(bytes, source);
    io::read_header(r, kMagic, kVersion);
    const std::size_t dim = r.u32();
    EmbeddingCache cache(dim, r.str());
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::uint8_t kind = r.u8();
      if (kind > static_cast<std::uint8_t>(NodeKind::fact)) r.fail("unknown node kind");
      std::string id = r.str();
      cache.store_[{static_cast<NodeKind>(kind), std::move(id)}] = r.f64s(dim);
    }
    r.expect_end();
    return cache;
  }

  void save(const std::string& path) const { io::write_file(path, serialize()); }

  // Throws ConfigError when `expected_fingerprint` is given and differs.
  static EmbeddingCache load(const std::string& path,
                             const std::optional<std::string>& expected_fingerprint = std::nullopt) {
    EmbeddingCache cache = deserialize(io::read_file(path), path);
    if (expected_fingerprint && cache.fingerprint() != *expected_fingerprint) {
      throw ConfigError("embedding cache '" + path + "' was built with encoder '" +
                        cache.fingerprint() + "', configured encoder is '" +
                        *expected_fingerprint + "'");
    }
    return cache;
  }

 private:
  std::size_t dim_;
  std::string fingerprint_;
  mutable std::shared_mutex mutex_;
  std::map<std::pair<NodeKind, std::string>, EuclideanVector> store_;
};

}  // namespace hyperrag
