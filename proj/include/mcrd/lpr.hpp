#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mcrd/kernel.hpp"
#include "mcrd/sample.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

enum class Side { left, right };

/// One-sided kernel-weighted polynomial fit at a cutoff. The right window is
/// [c, c+h) and the left window is (c-h, c); the boundary point x = c belongs
/// to the right side only. The normal equations are solved in the rescaled
/// regressor u = (x-c)/h and slopes are mapped back to the x scale.
struct OneSidedFit {
  Eigen::MatrixXd coef;      // (rho+1) x m; row 0 = intercepts, rows r = slopes / h^r scaled back
  Eigen::MatrixXd gram_inv;  // inverse of (1/(n h)) * sum_i v_i k_i H(u_i) H(u_i)'
  Eigen::RowVectorXd e1_gram_inv;  // first row of gram_inv, cached for variance sums
  std::size_t n_window = 0;
  std::size_t n_distinct = 0;
  Side side = Side::right;
  double c = 0.0;
  double h = 0.0;
  int rho = 1;
};

/// Jump of every response column at one cutoff: value = right - left intercepts.
struct JumpEstimate {
  Eigen::VectorXd value;
  OneSidedFit left;
  OneSidedFit right;
  int cutoff = 0;  // 1-based
};

/// Response columns over the sorted sample. Typically {y}, or {y, W_1..W_q}.
using ResponseColumns = std::vector<std::span<const double>>;

/// Fits within [c, c+h) or (c-h, c). `n_total` is the full sample size used
/// in the 1/(n h) Gram scaling. Throws EmptyWindow when the window holds
/// fewer than rho+2 distinct x values, SingularDesign when the scaled Gram
/// has reciprocal condition below 1e-12.
OneSidedFit fit_one_sided(const SortedSample& s, const ResponseColumns& responses,
                          std::size_t n_total, double c, double h, int rho,
                          const KernelSpec& k, Side side);

/// Per-cutoff jumps for all response columns with one shared design per side.
/// Bandwidths are taken from `plan.h1` as given (callers clip beforehand).
std::vector<JumpEstimate> jump_estimates(const SortedSample& s, const ResponseColumns& responses,
                                         const CutoffSchedule& sched, const BandwidthPlan& plan,
                                         const KernelSpec& k);

/// Scalar-outcome convenience: jumps of y only.
std::vector<JumpEstimate> jump_estimates(const SortedSample& s, const CutoffSchedule& sched,
                                         const BandwidthPlan& plan, const KernelSpec& k);

}  // namespace mcrd
