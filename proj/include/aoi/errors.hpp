#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aoi {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Two states or vectors do not share a component set or dimension.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Duplicate id or a stored-entry invariant that does not hold.
class RejectedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

/// Unrecoverable engine condition (for example a rollback that could not
/// restore the checkpoint). Runs abort on this.
class EngineError : public Error {
 public:
  using Error::Error;
};

/// Evidence whose likelihood is zero under every hypothesis.
class DegenerateEvidence : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace aoi
