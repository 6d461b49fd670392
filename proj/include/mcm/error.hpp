#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcm {

enum class ErrorCode {
  LengthMismatch,
  InvalidProportion,
  InvalidArgument,
  EqualInputs,
  NonSquare,
  PreconditionB1,
  RankDeficient,
  LoopCapExceeded,
  DuplicateColumns,
  ConditionDViolated,
  KappaOne,
  EmptyCandidateFamily,
  CountMismatch,
  Infeasible,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so
/// batch drivers can tabulate outcomes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mcm
