#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lcdl {

enum class ErrorCode {
  EmptyClass,
  LengthMismatch,
  NonFiniteEntry,
  ClassOutOfRange,
  KTooLarge,
  NonPositiveDelta,
  AsymmetricInput,
  NegativeSimilarity,
  DimensionMismatch,
  SingularSystem,
  SingularGram,
  DegenerateAtom,
  NoConvergence,
  EmptyInput,
  InvalidParameter,
  ParseError,
  DimensionInconsistent,
  IoError,
  TargetTooLarge,
  InsufficientClassSamples,
  BadModelFile,
  ModelVersion,
};

std::string_view to_string(ErrorCode code);

/// Library error. `index` carries the offending class, atom, column or line
/// number when the error refers to one; `position` carries a second
/// coordinate (the column of a NonFiniteEntry).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<long> index = std::nullopt,
        std::optional<long> position = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<long> index() const noexcept { return index_; }
  std::optional<long> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<long> index_;
  std::optional<long> position_;
};

}  // namespace lcdl
