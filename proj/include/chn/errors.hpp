#pragma once

#include <stdexcept>
#include <string>

namespace chn {

// Failure categories surfaced by the library. The CLI maps these onto its
// exit codes, so the set is part of the external contract.
enum class ErrorKind {
  ConfigInvalid,
  IndexOutOfRange,
  FileUncached,
  ZeroAssociationProbability,
  UnequalAlphas,
  DomainError,
  NoConvergence,
  NonFiniteEvaluation,
  DivergenceSuspected,
  WindowTooSmall,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::FileUncached: return "FileUncached";
    case ErrorKind::ZeroAssociationProbability: return "ZeroAssociationProbability";
    case ErrorKind::UnequalAlphas: return "UnequalAlphas";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorKind::DivergenceSuspected: return "DivergenceSuspected";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
  }
  return "UnknownError";
}

}  // namespace chn
