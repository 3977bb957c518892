#pragma once

#include <array>
#include <functional>
#include <variant>
#include <vector>

#include "mcrd/poly_basis.hpp"
#include "mcrd/quadrature.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

/// Closed interval; degenerate (lo == hi) pins the coordinate to a point and
/// removes it from the quadrature.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate() const { return lo == hi; }
};

/// Point in counterfactual coordinates. Meaning depends on the profile:
///   full        — (c, d, d')
///   cutoff_only — (c, -, -)
///   dose_change — (c, u, -)
using CfPoint = std::array<double, 3>;

/// Continuous counterfactual density over its support box. The density is
/// with respect to the non-degenerate coordinates only.
struct ContinuousCf {
  Profile profile = Profile::cutoff_only;
  std::array<Interval, 3> support{};
  std::function<double(const CfPoint&)> density;
};

struct DiscreteCf {
  std::vector<double> weights;  // per cutoff, sums to 1
};

struct CounterfactualSpec {
  std::variant<DiscreteCf, ContinuousCf> value;

  bool is_discrete() const { return std::holds_alternative<DiscreteCf>(value); }
  const DiscreteCf& discrete() const { return std::get<DiscreteCf>(value); }
  const ContinuousCf& continuous() const { return std::get<ContinuousCf>(value); }
};

/// Uniform density over the support box (normalizing constant computed from
/// the non-degenerate extents).
ContinuousCf uniform_cf(Profile profile, const std::array<Interval, 3>& support);

/// Coordinates of cutoff j in the profile's parametrization.
CfPoint cutoff_coordinates(const Cutoff& cj, Profile profile);

/// Validates discrete weights (non-negative, sum 1 within 1e-9) or checks
/// that the continuous density integrates to 1 within tol by quadrature.
void check_counterfactual(const CounterfactualSpec& cf, std::size_t n_cutoffs,
                          const QuadratureConfig& quad, double tol = 1e-6);

/// Integral of the density over the support (diagnostic for the check above).
double cf_total_mass(const ContinuousCf& cf, const QuadratureConfig& quad);

}  // namespace mcrd
