#include "mcrd/nn_residuals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcrd/error.hpp"

namespace mcrd {

namespace {

struct Candidate {
  double dist;
  std::uint32_t sorted_index;
  std::uint32_t orig_index;
};

/// Indices of the N nearest x-values to position i inside [lo, hi); exact
/// distance ties resolve toward the smaller original row index.
void nearest_in_segment(const SortedSample& s, std::size_t i, std::size_t lo, std::size_t hi,
                        int n_neighbors, std::vector<Candidate>& scratch,
                        std::vector<std::uint32_t>& out) {
  const std::size_t want = static_cast<std::size_t>(n_neighbors);
  // First pass: the N-th smallest distance, ignoring tie order.
  std::size_t l = i, r = i + 1;
  double dmax = 0.0;
  for (std::size_t taken = 0; taken < want;) {
    const double dl = l > lo ? s.x[i] - s.x[l - 1] : std::numeric_limits<double>::infinity();
    const double dr = r < hi ? s.x[r] - s.x[i] : std::numeric_limits<double>::infinity();
    if (dl <= dr) {
      dmax = dl;
      --l;
    } else {
      dmax = dr;
      ++r;
    }
    ++taken;
  }
  // Second pass: all points within dmax, then deterministic ordering.
  scratch.clear();
  for (std::size_t v = i; v > lo;) {
    --v;
    const double d = s.x[i] - s.x[v];
    if (d > dmax) break;
    scratch.push_back({d, static_cast<std::uint32_t>(v), s.orig_index[v]});
  }
  for (std::size_t v = i + 1; v < hi; ++v) {
    const double d = s.x[v] - s.x[i];
    if (d > dmax) break;
    scratch.push_back({d, static_cast<std::uint32_t>(v), s.orig_index[v]});
  }
  std::sort(scratch.begin(), scratch.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.orig_index < b.orig_index;
  });
  out.clear();
  for (std::size_t t = 0; t < want; ++t) out.push_back(scratch[t].sorted_index);
}

std::vector<std::pair<std::size_t, std::size_t>> segment_ranges(const SortedSample& s,
                                                                const CutoffSchedule& sched) {
  const std::size_t K = sched.size();
  std::vector<std::pair<std::size_t, std::size_t>> ranges(K + 1);
  std::size_t prev = 0;
  for (std::size_t j = 0; j < K; ++j) {
    const std::size_t b = s.lower_bound(sched.cutoffs[j].c);
    ranges[j] = {prev, b};
    prev = b;
  }
  ranges[K] = {prev, s.size()};
  return ranges;
}

}  // namespace

std::vector<std::vector<std::uint32_t>> nn_neighbor_table(const SortedSample& s,
                                                          const CutoffSchedule& sched,
                                                          int neighbors) {
  if (neighbors < 1) throw Error(ErrorCode::InvalidInput, "neighbors must be >= 1");
  const auto ranges = segment_ranges(s, sched);
  std::vector<std::vector<std::uint32_t>> table(s.size());
  std::vector<Candidate> scratch;
  for (std::size_t seg = 0; seg < ranges.size(); ++seg) {
    const auto [lo, hi] = ranges[seg];
    if (lo == hi) continue;
    if (hi - lo < static_cast<std::size_t>(neighbors) + 1)
      throw Error(ErrorCode::TooFewNeighbors,
                  "segment " + std::to_string(seg) + " has " + std::to_string(hi - lo) +
                      " observations, needs " + std::to_string(neighbors + 1));
    for (std::size_t i = lo; i < hi; ++i) {
      nearest_in_segment(s, i, lo, hi, neighbors, scratch, table[i]);
    }
  }
  return table;
}

std::vector<double> nn_squared_residuals(const SortedSample& s, const CutoffSchedule& sched,
                                         int neighbors) {
  const auto table = nn_neighbor_table(s, sched, neighbors);
  const double factor =
      static_cast<double>(neighbors) / (static_cast<double>(neighbors) + 1.0);
  std::vector<double> eps2(s.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    double mean = 0.0;
    for (std::uint32_t v : table[i]) mean += s.y[v];
    mean /= static_cast<double>(neighbors);
    const double r = s.y[i] - mean;
    eps2[i] = factor * r * r;
  }
  return eps2;
}

std::vector<double> nn_squared_residuals(const Sample& s, const CutoffSchedule& sched,
                                         int neighbors) {
  const SortedSample sorted = sort_sample(s);
  const auto eps2_sorted = nn_squared_residuals(sorted, sched, neighbors);
  std::vector<double> eps2(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) eps2[sorted.orig_index[i]] = eps2_sorted[i];
  return eps2;
}

std::vector<Eigen::MatrixXd> nn_residual_outer(const SortedSample& s,
                                               const Eigen::MatrixXd& columns,
                                               const CutoffSchedule& sched, int neighbors) {
  if (static_cast<std::size_t>(columns.rows()) != s.size())
    throw Error(ErrorCode::InvalidInput, "response row count does not match sample");
  const auto table = nn_neighbor_table(s, sched, neighbors);
  const double factor =
      static_cast<double>(neighbors) / (static_cast<double>(neighbors) + 1.0);
  const Eigen::Index m = columns.cols();
  std::vector<Eigen::MatrixXd> out(s.size());
  Eigen::VectorXd r(m);
  for (std::size_t i = 0; i < s.size(); ++i) {
    r = columns.row(i);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (std::uint32_t v : table[i]) mean += columns.row(v).transpose();
    mean /= static_cast<double>(neighbors);
    r -= mean;
    out[i] = factor * r * r.transpose();
  }
  return out;
}

}  // namespace mcrd
