#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "mcrd/counterfactual.hpp"
#include "mcrd/kernel.hpp"
#include "mcrd/poly_basis.hpp"
#include "mcrd/quadrature.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

/// Per-cutoff weights turning first-step jumps into an integral of the local
/// effect surface against a continuous counterfactual density.
struct CorrectionWeights {
  std::vector<double> delta;
  double h2 = 0.0;
  int rho2 = 1;
  std::size_t node_count = 0;
  std::string rule;
  double est_error = 0.0;     // refinement disagreement, max over j
  double mass_deficit = 0.0;  // density mass at dropped boundary nodes
};

/// Kernel weight of cutoff j relative to evaluation point `at`: the product
/// of k(component difference / h2) over the profile's coordinates. h2 may be
/// +inf, in which case every cutoff gets weight 1.
double local_weight(const Cutoff& cj, const CfPoint& at, Profile profile, double h2,
                    const KernelSpec& k);

/// Row of per-cutoff contributions r_j such that the local WLS intercept at
/// `at` equals sum_j r_j * bhat_j. Zero-columns of the weighted design (from
/// pinned coordinates) are dropped before solving; a design with fewer
/// effective points than remaining basis columns raises SingularLocalDesign.
Eigen::VectorXd local_fit_row(const CutoffSchedule& sched, const PolyBasis& basis, double h2,
                              const KernelSpec& k, const CfPoint& at);

/// Local WLS intercept of bhat on the centered basis at `at`.
double local_beta_fit(const Eigen::VectorXd& bhat, const CutoffSchedule& sched,
                      const PolyBasis& basis, double h2, const KernelSpec& k, const CfPoint& at);

/// Integrates density(at) * r_j(at) over the counterfactual support.
CorrectionWeights correction_weights(const CutoffSchedule& sched, const ContinuousCf& cf,
                                     const PolyBasis& basis, double h2, const KernelSpec& k,
                                     const QuadratureConfig& quad);

}  // namespace mcrd
