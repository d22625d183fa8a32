#pragma once

#include <stdexcept>
#include <string>

namespace topomatch {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& detail, int line, const std::string& source = {})
      : Error(format(detail, line, source)), detail_(detail), line_(line) {}
  int line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string format(const std::string& detail, int line, const std::string& source) {
    std::string prefix = source;
    if (line > 0) prefix += (prefix.empty() ? "line " : ":") + std::to_string(line);
    return prefix.empty() ? detail : prefix + ": " + detail;
  }

  std::string detail_;
  int line_;
};

/// An operation was called with inputs violating its preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Linear solve failed: indefinite system or non-converged iteration.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Iso-value produced no triangles.
class EmptySurfaceError : public Error {
 public:
  using Error::Error;
};

/// No pair of level surfaces is manifold with equal genus.
class NoAdmissiblePairError : public Error {
 public:
  using Error::Error;
};

}  // namespace topomatch
