#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcrd/correction_weights.hpp"
#include "mcrd/counterfactual.hpp"
#include "mcrd/kernel.hpp"
#include "mcrd/lpr.hpp"
#include "mcrd/nn_residuals.hpp"
#include "mcrd/sample.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

struct AteDiagnostics {
  bool clipped = false;
  std::vector<double> h1_effective;
  std::vector<std::string> warnings;
  double quadrature_error = 0.0;
  double quadrature_mass_deficit = 0.0;
  std::array<double, 2> ci95_uncorrected{0.0, 0.0};
};

/// Point estimate with its variance plus the bias-corrected twin computed at
/// polynomial orders (rho1+1, rho2+1) under identical bandwidths. The
/// reported interval comes from the bias-corrected pair.
struct AteResult {
  double mu = 0.0;
  double variance = 0.0;
  double mu_bc = 0.0;
  double variance_bc = 0.0;
  std::array<double, 2> ci95{0.0, 0.0};
  std::vector<double> weights_used;     // order rho
  std::vector<double> weights_used_bc;  // order rho+1 (continuous case)
  BandwidthPlan bandwidths;             // effective h1 after clipping
  AteDiagnostics diag;
};

/// Shared machinery for the sharp-case estimators: sorts once, caches
/// nearest-neighbor residuals, and for each polynomial order keeps the
/// per-cutoff jumps plus the per-observation window terms
///   psi_ij = (1/(n h1j)) k((x_i-c_j)/h1j) e1' (v+ G+ - v- G-) H((x_i-c_j)/h1j)
/// so that any weighted aggregate mu = sum_j w_j bhat_j and its variance
///   V = sum_i eps2_i (sum_j w_j psi_ij)^2
/// are linear passes. With windows clipped to the cutoff gaps every
/// observation touches at most two windows.
class SharpEngine {
 public:
  SharpEngine(const Sample& sample, const CutoffSchedule& sched, KernelSpec k,
              int nn_neighbors = 3);
  SharpEngine(SortedSample sorted, const CutoffSchedule& sched, KernelSpec k,
              int nn_neighbors = 3);

  /// Fits all cutoffs at the given order/bandwidths (clipping applied).
  /// Repeated calls with the same order replace the previous state.
  void prepare_order(int rho, const std::vector<double>& h1);

  bool has_order(int rho) const;
  const Eigen::VectorXd& bhat(int rho) const;
  const std::vector<double>& effective_h1(int rho) const;
  bool clipped(int rho) const;

  double aggregate(int rho, const std::vector<double>& weights) const;
  double variance(int rho, const std::vector<double>& weights) const;

  const SortedSample& data() const { return sorted_; }
  const CutoffSchedule& schedule() const { return sched_; }
  const std::vector<double>& residuals2() const { return eps2_; }
  const std::vector<JumpEstimate>& jumps(int rho) const;

 private:
  struct OrderState {
    std::vector<double> h1;
    bool clipped = false;
    Eigen::VectorXd bhat;
    std::vector<JumpEstimate> jumps;
    // psi terms: each observation i lies in segment s and can touch the
    // right window of cutoff s and the left window of cutoff s+1.
    std::vector<double> psi_right;  // contribution from cutoff = segment(i)
    std::vector<double> psi_left;   // contribution from cutoff = segment(i)+1
  };

  const OrderState& state(int rho) const;

  SortedSample sorted_;
  CutoffSchedule sched_;
  KernelSpec kernel_;
  std::vector<double> eps2_;
  std::vector<int> segment_;  // per observation
  std::map<int, OrderState> orders_;
};

/// Weighted aggregate of jumps under a discrete counterfactual. Both orders
/// (rho1, rho1+1) share the same bandwidths and the same weights.
AteResult ate_discrete(const Sample& sample, const CutoffSchedule& sched,
                       const std::vector<double>& weights, const BandwidthPlan& plan,
                       const KernelSpec& k);

/// Sandwich-form variance of sum_j w_j bhat_j at polynomial order rho.
double var_sharp(const Sample& sample, const CutoffSchedule& sched,
                 const std::vector<double>& weights, const BandwidthPlan& plan,
                 const KernelSpec& k, int rho);

/// Continuous-counterfactual aggregate: correction weights at (rho2, h2) for
/// mu and (rho2+1, h2) for the bias-corrected twin.
AteResult ate_continuous(const Sample& sample, const CutoffSchedule& sched,
                         const CounterfactualSpec& cf, const BandwidthPlan& plan,
                         const KernelSpec& k, const QuadratureConfig& quad = {});

struct H2GridPoint {
  double h2 = 0.0;
  double mu = 0.0;
  double mu_bc = 0.0;
  double vhat = 0.0;
  double mse = 0.0;
  bool feasible = false;
  std::string failure;
};

struct H2Selection {
  double h2_star = 0.0;
  AteResult result;  // at h2_star
  std::vector<H2GridPoint> curve;
};

/// Grid search minimizing (mu - mu_bc)^2 + vhat over candidate h2 values.
H2Selection select_h2(const Sample& sample, const CutoffSchedule& sched,
                      const CounterfactualSpec& cf, const BandwidthPlan& plan_without_h2,
                      const KernelSpec& k, const std::vector<double>& grid,
                      const QuadratureConfig& quad = {});

/// Default grid {3,...,12}/(K+1).
std::vector<double> default_h2_grid(std::size_t n_cutoffs);

/// Rate-guidance warnings for a (profile, rho2, K, h2) choice; empty when the
/// choice matches the guidance.
std::vector<std::string> rate_guidance_warnings(Profile profile, int rho2, std::size_t K,
                                                double h2);

}  // namespace mcrd
