#pragma once

#include <stdexcept>
#include <string>

namespace peerlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incongruent vector, matrix or batch dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Argument outside the operation's domain (empty batch, bad action index...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Call made in the wrong state, e.g. stepping a finished episode.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  explicit ConfigError(const std::string& what) : Error(what) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// A value head whose last layer has collapsed to zero norm.
class DegenerateNetworkError : public Error {
 public:
  using Error::Error;
};

}  // namespace peerlab
