#pragma once

#include <stdexcept>
#include <string>

namespace hbfq {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse = 2,
  Unstable = 3,
  Solver = 4,
  Io = 5,
  Internal = 6,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::InvalidArgument, what) {}
};

/// Scenario-file syntax or schema error. `line()` is 1-based, 0 when the
/// problem is not tied to a line (e.g. a missing key).
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error(ErrorCode::Parse, line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

/// A routing split that leaves one of the servers with traffic intensity >= 1.
class UnstableRouting : public Error {
public:
  explicit UnstableRouting(const std::string& what) : Error(ErrorCode::Unstable, what) {}
};

class SolverError : public Error {
public:
  explicit SolverError(const std::string& what) : Error(ErrorCode::Solver, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace hbfq
