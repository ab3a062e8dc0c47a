#pragma once

#include <stdexcept>
#include <string>

namespace cnls {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  precondition,  // bad arguments to a library call
  config,        // malformed or inconsistent run configuration
  solver,        // iteration failed to converge / collapsed
  blow_up,       // non-finite state during time integration
  io,            // file read/write failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool ok, const std::string& what,
                    ErrorKind kind = ErrorKind::precondition) {
  if (!ok) throw Error(kind, what);
}

}  // namespace cnls
