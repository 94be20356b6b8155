#pragma once

#include <stdexcept>
#include <string>

namespace fhe {

enum class ErrorCode {
  NotInvertible,
  BadModulus,
  NotFound,
  ParamMismatch,
  BadExponent,
  TableMismatch,
  LengthMismatch,
  BaseOverlap,
  BadAuxModulus,
  InputTooLarge,
  NotSubBase,
  KeyCountMismatch,
  GammaTooSmall,
  InexactGadget,
  KeyMismatch,
  TargetTooSmall,
  IndexOutOfRange,
  DomainTooLarge,
  UnsupportedGate,
  MissingGaloisKey,
  LevelExhausted,
  ScaleOverflow,
  BadSubring,
  BadTargetModulus,
  IoError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::BadModulus: return "BadModulus";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ParamMismatch: return "ParamMismatch";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::TableMismatch: return "TableMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BaseOverlap: return "BaseOverlap";
    case ErrorCode::BadAuxModulus: return "BadAuxModulus";
    case ErrorCode::InputTooLarge: return "InputTooLarge";
    case ErrorCode::NotSubBase: return "NotSubBase";
    case ErrorCode::KeyCountMismatch: return "KeyCountMismatch";
    case ErrorCode::GammaTooSmall: return "GammaTooSmall";
    case ErrorCode::InexactGadget: return "InexactGadget";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::TargetTooSmall: return "TargetTooSmall";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DomainTooLarge: return "DomainTooLarge";
    case ErrorCode::UnsupportedGate: return "UnsupportedGate";
    case ErrorCode::MissingGaloisKey: return "MissingGaloisKey";
    case ErrorCode::LevelExhausted: return "LevelExhausted";
    case ErrorCode::ScaleOverflow: return "ScaleOverflow";
    case ErrorCode::BadSubring: return "BadSubring";
    case ErrorCode::BadTargetModulus: return "BadTargetModulus";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Single exception type for the library; inspect code() to dispatch.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace fhe
