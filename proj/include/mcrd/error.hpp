#pragma once

#include <stdexcept>
#include <string>

namespace mcrd {

enum class ErrorCode {
  UnorderedCutoffs,
  EmptyWindow,
  TooFewNeighbors,
  SingularDesign,
  SingularLocalDesign,
  QuadratureDivergence,
  ZeroDensityEverywhere,
  InsufficientData,
  SingularNormalEquations,
  MissingGram,
  NoConvergence,
  SingularOmega,
  EnumerationTooLarge,
  AllGridPointsInfeasible,
  InvalidInput,
};

const char* error_code_name(ErrorCode code);

/// Library error carrying a machine-readable code plus the index of the
/// cutoff/segment (or quadrature node coordinates) where it was raised.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mcrd
