#pragma once

#include <stdexcept>
#include <string>

namespace relay {

/// Base for failures talking to a model endpoint. Carries the endpoint name.
class BackendError : public std::runtime_error {
 public:
  BackendError(std::string endpoint, const std::string& what)
      : std::runtime_error(endpoint + ": " + what), endpoint_(std::move(endpoint)) {}

  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
};

/// Network failure or timeout that survived every retry.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The endpoint answered with something we cannot interpret.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Credential missing or rejected.
class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// A transcript does not alternate sides; always a bug upstream.
class ViewError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CacheCorrupt : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(std::string source, std::size_t row, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(row) + ": " + what),
        source_(std::move(source)),
        row_(row) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t row() const noexcept { return row_; }

 private:
  std::string source_;
  std::size_t row_;
};

class GenerationParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relay
