#include "mcrd/counterfactual.hpp"

#include <cmath>

#include "mcrd/error.hpp"

namespace mcrd {

ContinuousCf uniform_cf(Profile profile, const std::array<Interval, 3>& support) {
  double volume = 1.0;
  const int dims = profile_dims(profile);
  for (int a = 0; a < dims; ++a) {
    if (support[static_cast<std::size_t>(a)].degenerate()) continue;
    const double w =
        support[static_cast<std::size_t>(a)].hi - support[static_cast<std::size_t>(a)].lo;
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidInput, "inverted counterfactual support");
    volume *= w;
  }
  ContinuousCf cf;
  cf.profile = profile;
  cf.support = support;
  const double density = 1.0 / volume;
  cf.density = [density](const CfPoint&) { return density; };
  return cf;
}

CfPoint cutoff_coordinates(const Cutoff& cj, Profile profile) {
  switch (profile) {
    case Profile::full: return {cj.c, cj.d_lo, cj.d_hi};
    case Profile::cutoff_only: return {cj.c, 0.0, 0.0};
    case Profile::dose_change: return {cj.c, cj.d_hi - cj.d_lo, 0.0};
  }
  return {cj.c, 0.0, 0.0};
}

namespace {

/// Tensor-product iteration over the non-degenerate support coordinates.
void for_each_box_node(const ContinuousCf& cf, const QuadratureConfig& quad, bool refined,
                       const std::vector<double>& breakpoints_c,
                       const std::function<void(const CfPoint&, double)>& visit) {
  const int dims = profile_dims(cf.profile);
  const int per_panel = std::max(2, quad.nodes_per_panel);
  int min_panels = std::max(1, quad.nodes_per_dim / per_panel);
  if (refined) min_panels *= 2;

  std::array<Quadrature1D, 3> rules;
  std::array<bool, 3> active{false, false, false};
  for (int a = 0; a < dims; ++a) {
    const Interval& iv = cf.support[static_cast<std::size_t>(a)];
    if (iv.degenerate()) continue;
    active[static_cast<std::size_t>(a)] = true;
    const std::vector<double> brk =
        (a == 0 && quad.kink_aligned) ? breakpoints_c : std::vector<double>{};
    rules[static_cast<std::size_t>(a)] =
        composite_gauss_legendre(iv.lo, iv.hi, brk, per_panel, min_panels);
  }

  CfPoint at{cf.support[0].lo, cf.support[1].lo, cf.support[2].lo};
  const auto& r0 = rules[0];
  const auto& r1 = rules[1];
  const auto& r2 = rules[2];
  const std::size_t n0 = active[0] ? r0.nodes.size() : 1;
  const std::size_t n1 = active[1] ? r1.nodes.size() : 1;
  const std::size_t n2 = active[2] ? r2.nodes.size() : 1;
  for (std::size_t i0 = 0; i0 < n0; ++i0) {
    double w0 = 1.0;
    if (active[0]) {
      at[0] = r0.nodes[i0];
      w0 = r0.weights[i0];
    }
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      double w1 = w0;
      if (active[1]) {
        at[1] = r1.nodes[i1];
        w1 *= r1.weights[i1];
      }
      for (std::size_t i2 = 0; i2 < n2; ++i2) {
        double w2 = w1;
        if (active[2]) {
          at[2] = r2.nodes[i2];
          w2 *= r2.weights[i2];
        }
        visit(at, w2);
      }
    }
  }
}

}  // namespace

double cf_total_mass(const ContinuousCf& cf, const QuadratureConfig& quad) {
  if (!cf.density) throw Error(ErrorCode::InvalidInput, "continuous counterfactual lacks density");
  double mass = 0.0;
  for_each_box_node(cf, quad, false, {},
                    [&](const CfPoint& at, double w) { mass += w * cf.density(at); });
  return mass;
}

void check_counterfactual(const CounterfactualSpec& cf, std::size_t n_cutoffs,
                          const QuadratureConfig& quad, double tol) {
  if (cf.is_discrete()) {
    const auto& w = cf.discrete().weights;
    if (w.size() != n_cutoffs)
      throw Error(ErrorCode::InvalidInput, "discrete weights length does not match cutoffs");
    double total = 0.0;
    for (double v : w) {
      if (v < 0.0) throw Error(ErrorCode::InvalidInput, "discrete weights must be non-negative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(ErrorCode::InvalidInput, "discrete weights must sum to 1");
    return;
  }
  const double mass = cf_total_mass(cf.continuous(), quad);
  if (std::abs(mass - 1.0) > tol)
    throw Error(ErrorCode::InvalidInput,
                "counterfactual density integrates to " + std::to_string(mass) + ", not 1");
}

namespace detail {

// Shared with correction_weights.cpp; not part of the public surface.
void cf_for_each_node(const ContinuousCf& cf, const QuadratureConfig& quad, bool refined,
                      const std::vector<double>& breakpoints_c,
                      const std::function<void(const CfPoint&, double)>& visit) {
  for_each_box_node(cf, quad, refined, breakpoints_c, visit);
}

}  // namespace detail

}  // namespace mcrd
