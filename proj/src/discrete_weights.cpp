#include "mcrd/discrete_weights.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "mcrd/error.hpp"

namespace mcrd {

DensityWeights discrete_weights_normalized(const SortedSample& s, const CutoffSchedule& sched,
                                           double density_bw, const KernelSpec& k) {
  sched.check();
  if (!(density_bw > 0.0)) throw Error(ErrorCode::InvalidInput, "density bandwidth must be > 0");
  const std::size_t K = sched.size();
  const std::size_t n = s.size();
  const double inv_nb = 1.0 / (static_cast<double>(n) * density_bw);

  DensityWeights out;
  out.bandwidth = density_bw;
  out.fhat.assign(K, 0.0);
  out.influence = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(K));
  for (std::size_t j = 0; j < K; ++j) {
    const double c = sched.cutoffs[j].c;
    const std::size_t lo = s.lower_bound(c - density_bw);
    const std::size_t hi =
        s.lower_bound(std::nextafter(c + density_bw, std::numeric_limits<double>::infinity()));
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = kernel_eval(k, (s.x[i] - c) / density_bw) * inv_nb;
      out.influence(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
      acc += w;
    }
    out.fhat[j] = acc;
  }

  const double total = std::accumulate(out.fhat.begin(), out.fhat.end(), 0.0);
  if (!(total > 0.0))
    throw Error(ErrorCode::ZeroDensityEverywhere,
                "density estimate vanishes at every cutoff (bandwidth too small?)");
  out.weights.resize(K);
  for (std::size_t j = 0; j < K; ++j) out.weights[j] = out.fhat[j] / total;
  out.influence /= total;
  return out;
}

double silverman_bandwidth(const SortedSample& s) {
  const std::size_t n = s.size();
  if (n < 2) throw Error(ErrorCode::InvalidInput, "need at least two observations");
  double mean = 0.0;
  for (double v : s.x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : s.x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace mcrd
