#pragma once

#include <stdexcept>
#include <string>

namespace dcgle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested point has no real, nonnegative amplitude (off the solution tube).
class NoRealAmplitude : public Error {
 public:
  using Error::Error;
};

/// The pseudo-continuous spectrum does not exist (zero feedback rate).
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// Long-wave expansion is singular on this branch point.
class DegenerateBranch : public Error {
 public:
  using Error::Error;
};

class InadmissibleWavenumber : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

class NonFiniteField : public Error {
 public:
  using Error::Error;
};

/// Configuration errors. All carry enough context to point at the offending input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(int line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class UnknownKey : public ConfigError {
 public:
  explicit UnknownKey(std::string key)
      : ConfigError("unknown key '" + key + "'"), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class RangeError : public ConfigError {
 public:
  RangeError(std::string key, const std::string& what)
      : ConfigError(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace dcgle
