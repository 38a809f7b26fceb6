#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acarec {

// Failure categories. The CLI prints the category name as the first token of
// its single-line error message.
enum class ErrorKind {
  Parse,
  Dimension,
  Config,
  EmptyColdSplit,
  EmptyContext,
  Untrainable,
  Divergence,
  Fingerprint,
  MissingArtifact,
  Contract,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Dimension: return "dimension_error";
    case ErrorKind::Config: return "config_error";
    case ErrorKind::EmptyColdSplit: return "empty_cold_split";
    case ErrorKind::EmptyContext: return "empty_context";
    case ErrorKind::Untrainable: return "untrainable_dataset";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Fingerprint: return "fingerprint_mismatch";
    case ErrorKind::MissingArtifact: return "missing_artifact";
    case ErrorKind::Contract: return "contract_violation";
    case ErrorKind::Io: return "io_error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace acarec
