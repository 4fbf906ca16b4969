#pragma once

#include <stdexcept>
#include <string>

namespace alref {

enum class ErrorCode {
  invalid_argument = 1,
  config = 2,
  io = 3,
  backend = 4,
  protocol = 5,
  timeout = 6,
  referent_absent = 7,
  scenario = 8,
};

const char* to_string(ErrorCode code);

// Every failure raised inside the engine carries a code so the C boundary can
// translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace alref
