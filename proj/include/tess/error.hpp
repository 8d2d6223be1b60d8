#pragma once

#include <stdexcept>
#include <string>

namespace tess {

enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  parse = 3,
  degenerate = 4,
  limit_exceeded = 5,
  internal = 6,
};

/// Library-wide exception. The code maps one-to-one onto the C API status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace tess
