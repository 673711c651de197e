#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metamodel {

/// Base of every error raised by the library. Callers that only need a
/// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A trace line that does not follow the JSONL schema. `line()` is 1-based.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A JSON document or CSV file that does not match its schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by the caller (sizes differ, empty input, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class KindMismatch : public Error {
 public:
  using Error::Error;
};

class NameCollision : public Error {
 public:
  using Error::Error;
};

class IncompleteAssignment : public Error {
 public:
  using Error::Error;
};

class UnmappedNode : public Error {
 public:
  using Error::Error;
};

class UnmappedEdge : public Error {
 public:
  using Error::Error;
};

class InvalidConstraint : public Error {
 public:
  using Error::Error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class NonterminatingRule : public Error {
 public:
  using Error::Error;
};

class DepthExceeded : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class UnknownState : public Error {
 public:
  using Error::Error;
};

class StateInUse : public Error {
 public:
  using Error::Error;
};

class AlreadyRefactored : public Error {
 public:
  using Error::Error;
};

}  // namespace metamodel
