#include "mcrd/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cf_nodes.hpp"
#include "mcrd/bandwidth.hpp"
#include "mcrd/error.hpp"
#include "mcrd/lpr.hpp"
#include "mcrd/nn_residuals.hpp"

namespace mcrd {

const char* compliance_name(ComplianceClass c) {
  switch (c) {
    case ComplianceClass::never_changer: return "never_changer";
    case ComplianceClass::ever_complier: return "ever_complier";
    case ComplianceClass::ever_defier: return "ever_defier";
  }
  return "?";
}

ComplianceClass classify_compliance(const PotentialAssignment& a, std::size_t n_cutoffs) {
  const std::size_t K = n_cutoffs;
  if (a.u.size() != K + 1)
    throw Error(ErrorCode::InvalidInput, "assignment must have K+1 segment doses");
  for (int v : a.u) {
    if (v < 0 || v > static_cast<int>(K))
      throw Error(ErrorCode::InvalidInput, "dose index out of range");
  }
  bool any_change = false;
  bool all_comply = true;
  for (std::size_t j = 1; j <= K; ++j) {
    if (a.u[j - 1] == a.u[j]) continue;
    any_change = true;
    // a change at cutoff j must land on the dose of new eligibility
    if (a.u[j] != static_cast<int>(j)) all_comply = false;
  }
  if (!any_change) return ComplianceClass::never_changer;
  return all_comply ? ComplianceClass::ever_complier : ComplianceClass::ever_defier;
}

ComplianceCensus enumerate_compliance(std::size_t n_cutoffs, std::uint64_t cap,
                                      std::uint64_t listing_cap) {
  const std::size_t K = n_cutoffs;
  const std::uint64_t base = K + 1;
  std::uint64_t total = 1;
  for (std::size_t s = 0; s <= K; ++s) {
    if (total > cap / base)
      throw Error(ErrorCode::EnumerationTooLarge,
                  "assignment count exceeds cap of " + std::to_string(cap));
    total *= base;
  }

  ComplianceCensus census;
  const bool keep_listing = total <= listing_cap;
  PotentialAssignment a;
  a.u.assign(K + 1, 0);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    for (std::size_t s = 0; s <= K; ++s) {
      a.u[s] = static_cast<int>(rest % base);
      rest /= base;
    }
    const ComplianceClass cls = classify_compliance(a, K);
    switch (cls) {
      case ComplianceClass::never_changer: ++census.never_changers; break;
      case ComplianceClass::ever_complier: ++census.ever_compliers; break;
      case ComplianceClass::ever_defier: ++census.ever_defiers; break;
    }
    if (keep_listing) census.listing.emplace_back(a, cls);
  }
  return census;
}

Eigen::VectorXd WBasis::eval(double c, double d) const {
  Eigen::VectorXd out(q());
  for (int m = 0; m < q(); ++m) {
    const auto& [a, b] = monomials[static_cast<std::size_t>(m)];
    double v = 1.0;
    for (int r = 0; r < a; ++r) v *= c;
    for (int r = 0; r < b; ++r) v *= d;
    out[m] = v;
  }
  return out;
}

Eigen::VectorXd WBasis::diff(double c, double d_from, double d_to) const {
  return eval(c, d_to) - eval(c, d_from);
}

namespace {

std::vector<double> schedule_dose_levels(const CutoffSchedule& sched) {
  std::vector<double> levels;
  levels.push_back(sched.cutoffs.front().d_lo);
  for (const auto& cj : sched.cutoffs) levels.push_back(cj.d_hi);
  return levels;  // length K+1, level l received on segment l under full compliance
}

int match_dose_level(const std::vector<double>& levels, double d) {
  const double tol = 1e-9;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (std::abs(d - levels[l]) <= tol * std::max(1.0, std::abs(levels[l]))) {
      return static_cast<int>(l);
    }
  }
  return -1;
}

}  // namespace

EligibilityShares eligibility_share_jumps(const SortedSample& s, const CutoffSchedule& sched,
                                          const BandwidthPlan& plan, const KernelSpec& k) {
  sched.check();
  if (!s.has_dose())
    throw Error(ErrorCode::InvalidInput, "dose column required for eligibility shares");
  const std::size_t K = sched.size();
  const std::size_t n = s.size();
  const auto levels = schedule_dose_levels(sched);

  // indicator columns 1{D_i = d_l}
  std::vector<std::vector<double>> indicators(levels.size(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const int l = match_dose_level(levels, s.d[i]);
    if (l < 0)
      throw Error(ErrorCode::InvalidInput,
                  "dose value " + std::to_string(s.d[i]) + " matches no schedule level");
    indicators[static_cast<std::size_t>(l)][i] = 1.0;
  }
  ResponseColumns cols;
  for (const auto& col : indicators) cols.emplace_back(col);

  BandwidthPlan eff = plan;
  eff.h1 = clip_bandwidths(sched, plan.h1);
  const auto jumps = jump_estimates(s, cols, sched, eff, k);

  EligibilityShares out;
  out.omega.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(levels.size()));
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      // share leaving dose level l when crossing up: left limit minus right limit
      double w = -jumps[j].value[static_cast<Eigen::Index>(l)];
      if (w < 0.0 || w > 1.0) {
        w = std::clamp(w, 0.0, 1.0);
        ++out.clip_count;
      }
      out.omega(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = w;
    }
  }
  return out;
}

WtildeReport build_wtilde(const Eigen::MatrixXd& omega, const CutoffSchedule& sched,
                          const WBasis& basis, double threshold) {
  const std::size_t K = sched.size();
  if (omega.rows() != static_cast<Eigen::Index>(K) ||
      omega.cols() != static_cast<Eigen::Index>(K + 1))
    throw Error(ErrorCode::InvalidInput, "omega must be K x (K+1)");
  const auto levels = schedule_dose_levels(sched);

  WtildeReport rep;
  rep.wtilde = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), basis.q());
  for (std::size_t j = 0; j < K; ++j) {
    const double cj = sched.cutoffs[j].c;
    const double dj = levels[j + 1];  // dose of eligibility at cutoff j
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (l == j + 1) continue;
      const double w = omega(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
      if (w == 0.0) continue;
      rep.wtilde.row(static_cast<Eigen::Index>(j)) +=
          w * basis.diff(cj, levels[l], dj).transpose();
    }
  }
  if (basis.q() > static_cast<int>(K)) {
    rep.sigma_min = 0.0;
    rep.identified = false;
    return rep;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rep.wtilde);
  rep.sigma_min = svd.singularValues().minCoeff();
  rep.identified = rep.sigma_min > threshold;
  return rep;
}

Eigen::VectorXd wls_theta(const Eigen::VectorXd& bhat, const Eigen::MatrixXd& wtilde,
                          const Eigen::MatrixXd& omega_wls) {
  const Eigen::Index K = wtilde.rows();
  const Eigen::Index q = wtilde.cols();
  if (bhat.size() != K || omega_wls.rows() != K || omega_wls.cols() != K)
    throw Error(ErrorCode::InvalidInput, "mismatched WLS dimensions");
  const Eigen::MatrixXd m = wtilde.transpose() * omega_wls * wtilde;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible() || !(lu.rcond() > 1e-13))
    throw Error(ErrorCode::SingularNormalEquations,
                "W' Omega W is singular (q=" + std::to_string(q) + ")");
  return lu.solve(wtilde.transpose() * omega_wls * bhat);
}

namespace {

/// Per-pass cache for the moment-covariance assembly: window terms psi and
/// nearest-neighbor residual outer products do not depend on theta, so the
/// inner re-weighting iterations only contract them.
struct EcVarCache {
  std::vector<int> segment;               // per observation
  std::vector<double> psi_right, psi_left;
  std::vector<Eigen::MatrixXd> outer;     // (q+1) x (q+1) per observation
  std::size_t K = 0;

  Eigen::MatrixXd assemble(const Eigen::VectorXd& theta) const {
    const Eigen::Index q1 = theta.size() + 1;
    Eigen::VectorXd alpha(q1);
    alpha[0] = 1.0;
    alpha.tail(theta.size()) = -theta;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K),
                                              static_cast<Eigen::Index>(K));
    const int Ki = static_cast<int>(K);
    for (std::size_t i = 0; i < segment.size(); ++i) {
      const double pr = psi_right[i];
      const double pl = psi_left[i];
      if (pr == 0.0 && pl == 0.0) continue;
      const double qi = alpha.dot(outer[i] * alpha);
      const int s = segment[i];
      if (pr != 0.0 && s >= 1) v(s - 1, s - 1) += pr * pr * qi;
      if (pl != 0.0 && s < Ki) v(s, s) += pl * pl * qi;
      if (pr != 0.0 && pl != 0.0 && s >= 1 && s < Ki) {
        const double cross = pr * pl * qi;
        v(s - 1, s) += cross;
        v(s, s - 1) += cross;
      }
    }
    return v;
  }
};

Eigen::MatrixXd response_matrix(const SortedSample& s, const WBasis& basis) {
  const std::size_t n = s.size();
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(n), basis.q() + 1);
  for (std::size_t i = 0; i < n; ++i) {
    cols(static_cast<Eigen::Index>(i), 0) = s.y[i];
    cols.row(static_cast<Eigen::Index>(i)).tail(basis.q()) =
        basis.eval(s.x[i], s.d[i]).transpose();
  }
  return cols;
}

struct VectorJumps {
  Eigen::VectorXd bhat;      // K
  Eigen::MatrixXd wtilde;    // K x q
  EcVarCache cache;
};

/// Vector jumps of [y, W(x,d)] plus the psi/outer caches for the variance.
VectorJumps vector_jumps_with_cache(const SortedSample& s, const CutoffSchedule& sched,
                                    const std::vector<double>& h1, const KernelSpec& k, int rho,
                                    const WBasis& basis, int nn_neighbors) {
  const std::size_t K = sched.size();
  const std::size_t n = s.size();
  const Eigen::MatrixXd columns = response_matrix(s, basis);

  std::vector<std::vector<double>> col_storage(static_cast<std::size_t>(columns.cols()));
  ResponseColumns cols;
  for (Eigen::Index cidx = 0; cidx < columns.cols(); ++cidx) {
    auto& storage = col_storage[static_cast<std::size_t>(cidx)];
    storage.assign(columns.col(cidx).data(), columns.col(cidx).data() + n);
    cols.emplace_back(storage);
  }

  BandwidthPlan plan;
  plan.h1 = clip_bandwidths(sched, h1);
  plan.rho1 = rho;
  const auto jumps = jump_estimates(s, cols, sched, plan, k);

  VectorJumps out;
  out.bhat.resize(static_cast<Eigen::Index>(K));
  out.wtilde.resize(static_cast<Eigen::Index>(K), basis.q());
  for (std::size_t j = 0; j < K; ++j) {
    out.bhat[static_cast<Eigen::Index>(j)] = jumps[j].value[0];
    out.wtilde.row(static_cast<Eigen::Index>(j)) =
        jumps[j].value.tail(basis.q()).transpose();
  }

  EcVarCache& cache = out.cache;
  cache.K = K;
  cache.outer = nn_residual_outer(s, columns, sched, nn_neighbors);
  cache.psi_right.assign(n, 0.0);
  cache.psi_left.assign(n, 0.0);
  cache.segment.resize(n);
  {
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (j < K && s.x[i] >= sched.cutoffs[j].c) ++j;
      cache.segment[i] = static_cast<int>(j);
    }
  }
  const std::size_t p = static_cast<std::size_t>(rho) + 1;
  Eigen::VectorXd hu(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < K; ++j) {
    const double c = sched.cutoffs[j].c;
    const double h = plan.h1[j];
    const double scale = 1.0 / (static_cast<double>(n) * h);
    const std::size_t right_lo = s.lower_bound(c);
    const std::size_t right_hi = s.lower_bound(c + h);
    for (std::size_t i = right_lo; i < right_hi; ++i) {
      const double u = (s.x[i] - c) / h;
      const double w = kernel_eval(k, u);
      if (w == 0.0) continue;
      double uu = 1.0;
      for (std::size_t r = 0; r < p; ++r) {
        hu[static_cast<Eigen::Index>(r)] = uu;
        uu *= u;
      }
      cache.psi_right[i] = scale * w * jumps[j].right.e1_gram_inv.dot(hu);
    }
    const std::size_t left_lo = s.lower_bound(std::nextafter(c - h, c));
    for (std::size_t i = left_lo; i < right_lo; ++i) {
      const double u = (s.x[i] - c) / h;
      const double w = kernel_eval(k, u);
      if (w == 0.0) continue;
      double uu = 1.0;
      for (std::size_t r = 0; r < p; ++r) {
        hu[static_cast<Eigen::Index>(r)] = uu;
        uu *= u;
      }
      cache.psi_left[i] = -scale * w * jumps[j].left.e1_gram_inv.dot(hu);
    }
  }
  return out;
}

Eigen::MatrixXd invert_spd_or_throw(const Eigen::MatrixXd& v, ErrorCode code,
                                    const char* what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  if (!lu.isInvertible() || !(lu.rcond() > 1e-14)) throw Error(code, what);
  return lu.inverse();
}

}  // namespace

Eigen::MatrixXd var_ec(const SortedSample& s, const CutoffSchedule& sched,
                       const std::vector<double>& h1, const KernelSpec& k,
                       const Eigen::VectorXd& theta, const WBasis& basis, int rho,
                       int nn_neighbors) {
  if (theta.size() != basis.q())
    throw Error(ErrorCode::InvalidInput, "theta length does not match basis");
  const VectorJumps vj = vector_jumps_with_cache(s, sched, h1, k, rho, basis, nn_neighbors);
  return vj.cache.assemble(theta);
}

FuzzyResult iterate_mse_optimal(const Sample& sample, const CutoffSchedule& sched,
                                const WBasis& basis, const Eigen::VectorXd& zf,
                                const KernelSpec& k, const FuzzyOptions& opt) {
  sched.check();
  if (!sample.has_dose())
    throw Error(ErrorCode::InvalidInput, "dose column required for the fuzzy estimator");
  const std::size_t K = sched.size();
  const int q = basis.q();
  if (q > static_cast<int>(K))
    throw Error(ErrorCode::SingularNormalEquations,
                "q > K: the effect surface is not identified");
  if (zf.size() != q) throw Error(ErrorCode::InvalidInput, "Z(F) length does not match basis");

  const SortedSample s = sort_sample(sample);
  const std::size_t n = s.size();

  Eigen::VectorXd theta =
      opt.init_theta.value_or(Eigen::VectorXd::Zero(q));
  Eigen::MatrixXd omega = opt.init_omega.value_or(
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K)));
  if (theta.size() != q) throw Error(ErrorCode::InvalidInput, "init_theta has wrong length");

  FuzzyResult out;
  bool outer_converged = false;
  int total_inner = 0;
  VectorJumps vj;

  std::vector<double> residual(n);
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    // bandwidths from the theta-residualized outcome
    for (std::size_t i = 0; i < n; ++i)
      residual[i] = s.y[i] - basis.eval(s.x[i], s.d[i]).dot(theta);
    std::vector<double> h_ik = ik_bandwidths_per_cutoff(s, sched, k, residual);
    bool shrinks = false;
    std::vector<double> h1 = rate_adjust(h_ik, n, opt.lambda1, &shrinks);
    h1 = clip_bandwidths(sched, h1);

    // bias-corrected vector jumps at local-quadratic order
    vj = vector_jumps_with_cache(s, sched, h1, k, 2, basis, 3);
    if (outer == 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(vj.wtilde);
      if (svd.singularValues().minCoeff() <= opt.identification_threshold)
        throw Error(ErrorCode::SingularNormalEquations,
                    "estimated moment matrix is rank deficient at the initial step");
    }

    const Eigen::VectorXd theta_step3 = wls_theta(vj.bhat, vj.wtilde, omega);
    Eigen::VectorXd theta_inner = theta_step3;
    bool inner_converged = false;
    for (int inner = 0; inner < opt.max_inner; ++inner) {
      ++total_inner;
      const Eigen::MatrixXd v = vj.cache.assemble(theta_inner);
      omega = invert_spd_or_throw(v, ErrorCode::SingularOmega,
                                  "moment covariance is singular");
      const Eigen::VectorXd theta_next = wls_theta(vj.bhat, vj.wtilde, omega);
      const double step = (theta_next - theta_inner).cwiseAbs().maxCoeff();
      theta_inner = theta_next;
      if (step < opt.tol_inner) {
        inner_converged = true;
        break;
      }
    }
    if (!inner_converged)
      throw Error(ErrorCode::NoConvergence,
                  "inner re-weighting did not converge in " + std::to_string(opt.max_inner) +
                      " iterations");

    theta = theta_inner;
    out.trajectory.push_back(theta);
    out.h1 = h1;
    out.theta.outer_iterations = outer + 1;

    const double outer_gap = (theta_step3 - theta_inner).cwiseAbs().maxCoeff() /
                             std::max(1.0, theta_inner.cwiseAbs().maxCoeff());
    if (outer_gap < opt.tol_outer) {
      outer_converged = true;
      break;
    }
  }
  if (!outer_converged)
    throw Error(ErrorCode::NoConvergence,
                "bandwidth refresh loop did not converge in " + std::to_string(opt.max_outer) +
                    " passes");

  out.theta.theta = theta;
  out.theta.inner_iterations = total_inner;
  out.theta.converged = true;
  out.theta.omega_used = omega;
  out.theta.vcov = invert_spd_or_throw(vj.wtilde.transpose() * omega * vj.wtilde,
                                       ErrorCode::SingularNormalEquations,
                                       "W' Omega W is singular at the final step");
  out.wtilde = vj.wtilde;
  out.mu_ec = zf.dot(theta);
  out.var_mu_ec = zf.dot(out.theta.vcov * zf);
  const double half = 1.959963984540054 * std::sqrt(std::max(0.0, out.var_mu_ec));
  out.ci95 = {out.mu_ec - half, out.mu_ec + half};
  return out;
}

Eigen::VectorXd zf_from_counterfactual(const WBasis& basis, const ContinuousCf& cf,
                                       const QuadratureConfig& quad) {
  if (cf.profile == Profile::cutoff_only)
    throw Error(ErrorCode::InvalidInput,
                "Z(F) needs dose information; cutoff_only profiles carry none");
  if (cf.profile == Profile::dose_change) {
    for (const auto& [a, b] : basis.monomials) {
      (void)a;
      if (b != 1)
        throw Error(ErrorCode::InvalidInput,
                    "dose-change counterfactuals require basis monomials linear in d");
    }
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(basis.q());
  detail::cf_for_each_node(cf, quad, false, {}, [&](const CfPoint& at, double w) {
    const double dens = cf.density(at);
    if (dens == 0.0) return;
    if (cf.profile == Profile::full) {
      z += (w * dens) * basis.diff(at[0], at[1], at[2]);
    } else {
      // monomials c^a d: the dose difference contributes the factor u
      Eigen::VectorXd term(basis.q());
      for (int m = 0; m < basis.q(); ++m) {
        double v = at[1];
        for (int r = 0; r < basis.monomials[static_cast<std::size_t>(m)].first; ++r) v *= at[0];
        term[m] = v;
      }
      z += (w * dens) * term;
    }
  });
  return z;
}

}  // namespace mcrd
