#pragma once

#include <stdexcept>
#include <string>

namespace hyperrag {

// Input outside the domain of a numeric operation (boundary points, zero
// vectors, mismatched dimensions).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration values or an encoder/index mismatch. Fatal.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user data: unreadable corpus, malformed rows, inconsistent stores.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Persisted file is truncated, has a bad magic or an unsupported version.
class CorruptionError : public DataError {
 public:
  using DataError::DataError;
};

// An external client could not be reached or returned a non-2xx status.
// Callers may retry.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An external client answered, but the payload does not follow the contract.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string raw_payload)
      : std::runtime_error(what), raw_payload_(std::move(raw_payload)) {}

  const std::string& raw_payload() const noexcept { return raw_payload_; }

 private:
  std::string raw_payload_;
};

}  // namespace hyperrag
