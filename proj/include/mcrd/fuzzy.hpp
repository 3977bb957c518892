#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcrd/counterfactual.hpp"
#include "mcrd/kernel.hpp"
#include "mcrd/sample.hpp"
#include "mcrd/schedule.hpp"

namespace mcrd {

/// Potential treatment assignment: dose index received on each of the K+1
/// segments. Eligibility on segment s is dose index s.
struct PotentialAssignment {
  std::vector<int> u;
};

enum class ComplianceClass { never_changer, ever_complier, ever_defier };

const char* compliance_name(ComplianceClass c);

/// never_changer  — the received dose never changes across segments;
/// ever_complier  — every change lands on the dose of new eligibility;
/// ever_defier    — some change lands elsewhere.
ComplianceClass classify_compliance(const PotentialAssignment& a, std::size_t n_cutoffs);

struct ComplianceCensus {
  std::uint64_t never_changers = 0;
  std::uint64_t ever_compliers = 0;
  std::uint64_t ever_defiers = 0;
  std::vector<std::pair<PotentialAssignment, ComplianceClass>> listing;  // kept when small
};

/// Full enumeration of the (K+1)^(K+1) assignments; throws
/// EnumerationTooLarge above `cap`. The listing is retained only when the
/// total count is at most `listing_cap`.
ComplianceCensus enumerate_compliance(std::size_t n_cutoffs, std::uint64_t cap = 2'000'000,
                                      std::uint64_t listing_cap = 4096);

/// Basis for the parametric effect surface: monomials c^a d^b. The effect of
/// switching dose d -> d' at cutoff c is [W(c,d') - W(c,d)]' theta.
struct WBasis {
  std::vector<std::pair<int, int>> monomials;

  int q() const { return static_cast<int>(monomials.size()); }
  Eigen::VectorXd eval(double c, double d) const;
  Eigen::VectorXd diff(double c, double d_from, double d_to) const;
};

/// Left-minus-right jumps of the dose-indicator shares 1{D = d_l} at every
/// cutoff, K x (K+1), clipped to [0, 1]. Requires a dose column whose values
/// match the schedule's dose levels.
struct EligibilityShares {
  Eigen::MatrixXd omega;  // (j-1)-th row: shares at cutoff j, columns l = 0..K
  int clip_count = 0;
};

EligibilityShares eligibility_share_jumps(const SortedSample& s, const CutoffSchedule& sched,
                                          const BandwidthPlan& plan, const KernelSpec& k);

struct WtildeReport {
  Eigen::MatrixXd wtilde;  // K x q
  double sigma_min = 0.0;
  bool identified = false;
};

/// Stacks sum_{l != j} omega_{j,l} [W(c_j, d_j) - W(c_j, d_l)] and reports
/// the smallest singular value; identification requires q <= K and
/// sigma_min above `threshold`.
WtildeReport build_wtilde(const Eigen::MatrixXd& omega, const CutoffSchedule& sched,
                          const WBasis& basis, double threshold = 1e-8);

struct ThetaEstimate {
  Eigen::VectorXd theta;
  Eigen::MatrixXd vcov;
  Eigen::MatrixXd omega_used;
  int inner_iterations = 0;
  int outer_iterations = 0;
  bool converged = true;
};

/// theta = (W' Omega W)^{-1} W' Omega b for SPD Omega.
Eigen::VectorXd wls_theta(const Eigen::VectorXd& bhat, const Eigen::MatrixXd& wtilde,
                          const Eigen::MatrixXd& omega_wls);

/// K x K covariance of the per-cutoff moment bhat_j - wtilde_j' theta, with
/// entries beyond the first off-diagonal fixed at zero (windows clipped to
/// the cutoff gaps cannot overlap further).
Eigen::MatrixXd var_ec(const SortedSample& s, const CutoffSchedule& sched,
                       const std::vector<double>& h1, const KernelSpec& k,
                       const Eigen::VectorXd& theta, const WBasis& basis, int rho,
                       int nn_neighbors = 3);

struct FuzzyOptions {
  std::optional<Eigen::VectorXd> init_theta;   // default zero
  std::optional<Eigen::MatrixXd> init_omega;   // default identity
  double tol_inner = 1e-8;                     // max-norm step of theta
  double tol_outer = 1e-6;                     // relative theta change across bandwidth refreshes
  int max_inner = 100;
  int max_outer = 100;
  double lambda1 = 0.5;                        // rate adjustment of the per-step IK bandwidths
  double identification_threshold = 1e-8;
};

struct FuzzyResult {
  ThetaEstimate theta;
  Eigen::MatrixXd wtilde;
  std::vector<double> h1;   // final bandwidths
  double mu_ec = 0.0;
  double var_mu_ec = 0.0;
  std::array<double, 2> ci95{0.0, 0.0};
  std::vector<Eigen::VectorXd> trajectory;  // theta after each outer pass
};

/// Iterated MSE-optimal two-step estimator: per-cutoff bandwidths from the
/// residualized outcome y - W(x,d)'theta, bias-corrected vector jumps at
/// rho1 = 2, weighted least squares with Omega re-estimated as the inverse
/// of var_ec, bandwidths refreshed in an outer loop, and the final effect
/// mu = Z' theta with variance Z' (W' Omega W)^{-1} Z.
FuzzyResult iterate_mse_optimal(const Sample& sample, const CutoffSchedule& sched,
                                const WBasis& basis, const Eigen::VectorXd& zf,
                                const KernelSpec& k, const FuzzyOptions& opt = {});

/// Z(F) = integral of W(c,d') - W(c,d) against a continuous counterfactual.
Eigen::VectorXd zf_from_counterfactual(const WBasis& basis, const ContinuousCf& cf,
                                       const QuadratureConfig& quad = {});

}  // namespace mcrd
