#pragma once

#include <stdexcept>
#include <string>

namespace suffstat {

enum class ErrorKind {
  invalid_input,    // malformed arguments, tables, files
  precondition,     // inadmissible schedule, oracle too coarse, failed conditions
  non_convergence,  // iterative solver gave up
  invariant,        // a theory check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_input, what);
}

// CLI exit status for an error kind.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input:
      return 2;
    case ErrorKind::precondition:
    case ErrorKind::non_convergence:
      return 3;
    case ErrorKind::invariant:
      return 4;
  }
  return 1;
}

}  // namespace suffstat
