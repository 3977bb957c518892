#include "mcrd/kernel.hpp"

#include <cmath>

#include "mcrd/error.hpp"

namespace mcrd {

double kernel_eval(const KernelSpec& k, double u) {
  const double a = std::abs(u);
  if (a > 1.0) return 0.0;
  switch (k.kind) {
    case KernelKind::triangular:
      return 1.0 - a;
    case KernelKind::uniform:
      return 0.5;
  }
  return 0.0;
}

KernelSpec kernel_from_name(const std::string& name) {
  if (name == "triangular" || name == "edge") return {KernelKind::triangular};
  if (name == "uniform") return {KernelKind::uniform};
  throw Error(ErrorCode::InvalidInput, "unknown kernel: " + name);
}

const char* kernel_name(const KernelSpec& k) {
  return k.kind == KernelKind::triangular ? "triangular" : "uniform";
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnorderedCutoffs: return "UnorderedCutoffs";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::TooFewNeighbors: return "TooFewNeighbors";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::SingularLocalDesign: return "SingularLocalDesign";
    case ErrorCode::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorCode::ZeroDensityEverywhere: return "ZeroDensityEverywhere";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::MissingGram: return "MissingGram";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularOmega: return "SingularOmega";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::AllGridPointsInfeasible: return "AllGridPointsInfeasible";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace mcrd
