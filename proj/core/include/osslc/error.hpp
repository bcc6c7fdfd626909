#pragma once

#include <stdexcept>
#include <string>

namespace osslc {

// Failure classes map one-to-one onto CLI exit codes (see tools/cli).
enum class ErrorKind {
  usage,
  data,     // malformed input, degenerate fit, domain violation
  network,  // transport, auth, rate limit, missing repository
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message)
      : Error(ErrorKind::data, format(source, line, message)),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            const std::string& message) {
    if (line == 0) return source + ": " + message;
    return source + ":" + std::to_string(line) + ": " + message;
  }

  std::string source_;
  std::size_t line_;
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NetworkError : public Error {
 public:
  explicit NetworkError(const std::string& what)
      : Error(ErrorKind::network, what) {}
};

class AuthError : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

class NotFoundError : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

class RateLimitError : public NetworkError {
 public:
  RateLimitError(const std::string& what, long long reset_epoch)
      : NetworkError(what), reset_epoch_(reset_epoch) {}

  // Unix time at which the quota resets, 0 when the server did not say.
  long long reset_epoch() const noexcept { return reset_epoch_; }

 private:
  long long reset_epoch_;
};

}  // namespace osslc
