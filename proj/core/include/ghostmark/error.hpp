#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ghostmark {

// Error classes are stable: the CLI maps each one to a documented exit code.
enum class ErrorKind {
  kValidation,
  kEncoding,
  kCapacity,
  kTransport,
  kAuth,
  kProtocol,
  kCommitment,
  kLockContention,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

class EncodingError : public Error {
 public:
  EncodingError(const std::string& message, std::size_t byte_offset)
      : Error(ErrorKind::kEncoding, message), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class CapacityError : public Error {
 public:
  CapacityError(const std::string& message, std::size_t attempts)
      : Error(ErrorKind::kCapacity, message), attempts_(attempts) {}

  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

// Transport-class failures (timeouts, non-success status, malformed bodies).
// `retryable()` is false for authentication failures and protocol errors.
class TransportError : public Error {
 public:
  TransportError(ErrorKind kind, const std::string& message, bool retryable)
      : Error(kind, message), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class CommitmentError : public Error {
 public:
  explicit CommitmentError(const std::string& message)
      : Error(ErrorKind::kCommitment, message) {}
};

class LockError : public Error {
 public:
  explicit LockError(const std::string& message) : Error(ErrorKind::kLockContention, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

}  // namespace ghostmark
