#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mg {

enum class ErrorCode {
  UnknownAtom,
  HasIncoming,
  DuplicateName,
  UnknownSystem,
  InvalidStep,
  CapExceeded,
  UnboundVariable,
  MalformedEncoding,
  UnknownProcedure,
  ArityMismatch,
  CallbackFailure,
  ParseError,
  GrammarError,
  InvalidArgument,
  Internal,
};

std::string_view error_code_name(ErrorCode code);

class EngineError : public std::runtime_error {
 public:
  EngineError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw EngineError(code, message);
}

}  // namespace mg
