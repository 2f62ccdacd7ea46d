#include "mg/error.hpp"

namespace mg {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownAtom: return "UnknownAtom";
    case ErrorCode::HasIncoming: return "HasIncoming";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownSystem: return "UnknownSystem";
    case ErrorCode::InvalidStep: return "InvalidStep";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::MalformedEncoding: return "MalformedEncoding";
    case ErrorCode::UnknownProcedure: return "UnknownProcedure";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::CallbackFailure: return "CallbackFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GrammarError: return "GrammarError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Internal: return "Internal";
  }
  return "UnknownError";
}

}  // namespace mg
