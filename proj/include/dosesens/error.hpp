#pragma once

#include <stdexcept>
#include <string>

namespace dosesens {

enum class ErrorCode {
    MissingColumn,
    NonFiniteValue,
    SingletonSet,
    InconsistentCovariateDim,
    SetTooLarge,
    InvalidWeights,
    UnknownKind,
    RankDeficientQ,
    TooFewSets,
    LeverageOne,
    DegenerateThreshold,
    BadWeights,
    Infeasible,
    Unbounded,
    NonFiniteObjective,
    EmptyInterval,
    BadConfig,
    IoError,
};

const char* error_code_name(ErrorCode code);

/// All library failures are reported through this exception type; `code()`
/// gives a stable machine-readable identifier.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace dosesens
