#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tplb {

enum class ErrorKind {
  DuplicateId,
  GapInRange,
  NegativeFrequency,
  EmptyInput,
  MalformedRecord,
  OutOfRange,
  Truncated,
  TrailingGarbage,
  BadHeader,
  ZeroRow,
  DuplicateCell,
  Unsorted,
  Mismatch,
  InvalidArgument,
  AllRowsExcluded,
  NonConvergence,
  Infeasible,
  MissingInputs,
  MissingManifest,
  Io,
  Invariant,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DuplicateId: return "duplicate-id";
    case ErrorKind::GapInRange: return "gap-in-range";
    case ErrorKind::NegativeFrequency: return "negative-frequency";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::MalformedRecord: return "malformed-record";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::TrailingGarbage: return "trailing-garbage";
    case ErrorKind::BadHeader: return "bad-header";
    case ErrorKind::ZeroRow: return "zero-row";
    case ErrorKind::DuplicateCell: return "duplicate-cell";
    case ErrorKind::Unsorted: return "unsorted";
    case ErrorKind::Mismatch: return "mismatch";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::AllRowsExcluded: return "all-rows-excluded";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::MissingInputs: return "missing-inputs";
    case ErrorKind::MissingManifest: return "missing-manifest";
    case ErrorKind::Io: return "io";
    case ErrorKind::Invariant: return "invariant";
  }
  return "unknown";
}

/// Every failure raised by the library. `kind()` is stable and machine-readable;
/// `what()` carries the human detail (line numbers, token ids, ...).
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

}  // namespace tplb
