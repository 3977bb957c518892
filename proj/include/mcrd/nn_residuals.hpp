#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcrd/sample.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

/// Squared residuals by nearest-neighbor matching. For observation i with
/// N matched neighbors,
///   eps2_i = (N/(N+1)) * (y_i - mean of the N neighbor outcomes)^2.
/// Neighbors are the N closest x values to x_i drawn from the same
/// between-cutoff segment; distance ties break toward the smaller original
/// row index. Throws TooFewNeighbors when a populated segment has fewer
/// than N+1 observations.
///
/// Output is aligned with the sorted order of `s`.
std::vector<double> nn_squared_residuals(const SortedSample& s, const CutoffSchedule& sched,
                                         int neighbors = 3);

/// Sample-order variant.
std::vector<double> nn_squared_residuals(const Sample& s, const CutoffSchedule& sched,
                                         int neighbors = 3);

/// Vector-response analogue: outer products e_i e_i' of the matched residual
/// of each row of `columns` (n x m, sorted order). Entry i is m x m.
std::vector<Eigen::MatrixXd> nn_residual_outer(const SortedSample& s,
                                               const Eigen::MatrixXd& columns,
                                               const CutoffSchedule& sched, int neighbors = 3);

/// Neighbor index lists (sorted-order indices), exposed for audit/tests.
std::vector<std::vector<std::uint32_t>> nn_neighbor_table(const SortedSample& s,
                                                          const CutoffSchedule& sched,
                                                          int neighbors = 3);

}  // namespace mcrd
