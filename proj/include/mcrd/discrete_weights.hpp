#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcrd/kernel.hpp"
#include "mcrd/sample.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

/// Density-based discrete counterfactual weights: a triangular-kernel density
/// estimate at each cutoff, normalized to sum to one. `influence` holds the
/// per-observation kernel terms eta_{j}(z_i) = k((x_i-c_j)/bw)/(n bw S) with
/// S = sum_l fhat(c_l); they feed the variance adjustment for estimated
/// weights. Rows follow the sorted order of the sample.
struct DensityWeights {
  std::vector<double> weights;          // length K, sums to 1
  std::vector<double> fhat;             // density estimates at the cutoffs
  double bandwidth = 0.0;
  Eigen::MatrixXd influence;            // n x K
};

DensityWeights discrete_weights_normalized(const SortedSample& s, const CutoffSchedule& sched,
                                           double density_bw,
                                           const KernelSpec& k = KernelSpec{});

/// Rule-of-thumb KDE bandwidth (1.06 sigma n^{-1/5}) used by the CLI when no
/// bandwidth is given.
double silverman_bandwidth(const SortedSample& s);

}  // namespace mcrd
