#pragma once

#include <stdexcept>
#include <string>

namespace ncsbound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input whose average rate reaches the capacity it is offered to.
class UnstableInput : public Error {
 public:
  using Error::Error;
};

/// The burstiness fixed point could not be reached.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

class UnknownStream : public Error {
 public:
  using Error::Error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

class PoleOnAxis : public Error {
 public:
  using Error::Error;
};

class ImproperTransferFunction : public Error {
 public:
  using Error::Error;
};

/// Raised when two quantities annotated with different time units meet.
class UnitMismatch : public Error {
 public:
  using Error::Error;
};

/// The delay-free closed loop is already unstable, so the delay criterion
/// does not apply.
class NominallyUnstable : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration problem with a source location when one is known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0)
      : Error(format(message, field, line)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& message, const std::string& field, int line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "'" + field + "': ";
    return out + message;
  }

  std::string field_;
  int line_;
};

}  // namespace ncsbound
