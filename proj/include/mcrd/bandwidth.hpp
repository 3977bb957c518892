#pragma once

#include <cstddef>
#include <vector>

#include "mcrd/kernel.hpp"
#include "mcrd/sample.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

/// Internals of one MSE-optimal bandwidth computation, surfaced so the data
/// pipeline is auditable: pilot window, density and variance at the cutoff,
/// one-sided curvature fits, and the regularization terms.
struct IkAudit {
  double h_pilot = 0.0;
  double f_hat = 0.0;
  double sigma2_hat = 0.0;
  double m3_hat = 0.0;
  double h2_plus = 0.0;
  double h2_minus = 0.0;
  double m2_plus = 0.0;
  double m2_minus = 0.0;
  double reg_plus = 0.0;
  double reg_minus = 0.0;
  std::size_t n_used = 0;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  double h_ik = 0.0;
};

/// MSE-optimal bandwidth for a sharp local-linear boundary fit at `c`,
/// following the plug-in rule of Imbens and Kalyanaraman (2012) with the
/// edge-kernel constant 3.4375: variance and density pilots at 1.84 s n^-1/5,
/// one-sided curvature pilots at 3.56 (sigma2/(f m3^2))^{1/7} N^{-1/7}, and
/// regularization 2160 sigma2 / (N2 h2^4). Requires at least 10 observations
/// on each side of `c`, else throws InsufficientData.
double ik_bandwidth(const std::vector<double>& x, const std::vector<double>& y, double c,
                    const KernelSpec& k, IkAudit* audit = nullptr);

/// Per-cutoff rule applied to the pooled adjacent segments of each cutoff.
/// `response` overrides y (e.g. residualized outcomes); pass empty to use s.y.
std::vector<double> ik_bandwidths_per_cutoff(const SortedSample& s, const CutoffSchedule& sched,
                                             const KernelSpec& k,
                                             const std::vector<double>& response = {},
                                             std::vector<IkAudit>* audits = nullptr);

/// h <- h * n^{0.2 - lambda1}. lambda1 = 0.5 yields the recommended n^{-0.3}
/// adjustment; lambda1 below 0.2 inflates instead of shrinking (allowed, the
/// caller is warned through the return flag).
std::vector<double> rate_adjust(const std::vector<double>& h_ik, std::size_t n, double lambda1,
                                bool* shrinks = nullptr);

/// Robustness shrink h * n^{-1/20}.
std::vector<double> shrink_bandwidths(const std::vector<double>& h, std::size_t n);

}  // namespace mcrd
