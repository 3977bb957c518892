#include "mcrd/lpr.hpp"

#include <cmath>

#include "mcrd/error.hpp"

namespace mcrd {

namespace {

std::size_t count_distinct(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  std::size_t distinct = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (i == lo || x[i] != x[i - 1]) ++distinct;
  }
  return distinct;
}

}  // namespace

OneSidedFit fit_one_sided(const SortedSample& s, const ResponseColumns& responses,
                          std::size_t n_total, double c, double h, int rho,
                          const KernelSpec& k, Side side) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidInput, "bandwidth must be positive");
  if (rho < 0) throw Error(ErrorCode::InvalidInput, "rho must be non-negative");

  std::size_t lo, hi;
  if (side == Side::right) {
    lo = s.lower_bound(c);
    hi = s.lower_bound(c + h);
  } else {
    lo = s.lower_bound(std::nextafter(c - h, c));
    hi = s.lower_bound(c);
  }

  const std::size_t p = static_cast<std::size_t>(rho) + 1;
  const std::size_t distinct = count_distinct(s.x, lo, hi);
  if (distinct < p + 1)
    throw Error(ErrorCode::EmptyWindow,
                std::string(side == Side::right ? "right" : "left") + " window at c=" +
                    std::to_string(c) + " has " + std::to_string(distinct) +
                    " distinct x values, needs " + std::to_string(p + 1));

  const std::size_t m = responses.size();
  const double inv_h = 1.0 / h;

  // Moments of the rescaled regressor u = (x-c)/h: S_r = sum k u^r for the
  // Gram, T_r per response for the right-hand side.
  std::vector<double> S(2 * p - 1, 0.0);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(p, m);
  std::vector<double> upow(p);
  for (std::size_t i = lo; i < hi; ++i) {
    const double u = (s.x[i] - c) * inv_h;
    const double w = kernel_eval(k, u);
    if (w == 0.0) continue;
    double uu = 1.0;
    for (std::size_t r = 0; r < p; ++r) {
      upow[r] = uu;
      uu *= u;
    }
    double wu = w;
    for (std::size_t r = 0; r < 2 * p - 1; ++r) {
      S[r] += wu;
      wu *= u;
    }
    for (std::size_t col = 0; col < m; ++col) {
      const double wy = w * responses[col][i];
      for (std::size_t r = 0; r < p; ++r) T(r, col) += wy * upow[r];
    }
  }

  Eigen::MatrixXd gram(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) gram(a, b) = S[a + b];

  // Scale matches the 1/(n h) normalization the variance estimators expect.
  const double scale = 1.0 / (static_cast<double>(n_total) * h);
  Eigen::MatrixXd gram_scaled = gram * scale;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram_scaled);
  const double rcond = lu.rcond();
  if (!lu.isInvertible() || !(rcond > 1e-12))
    throw Error(ErrorCode::SingularDesign,
                "ill-conditioned window design at c=" + std::to_string(c) +
                    " (rcond=" + std::to_string(rcond) + ")");

  OneSidedFit fit;
  fit.gram_inv = lu.inverse();
  fit.e1_gram_inv = fit.gram_inv.row(0);
  // Coefficients in u, then slopes rescaled to the x metric.
  Eigen::MatrixXd coef_u = fit.gram_inv * (T * scale);
  fit.coef = coef_u;
  double hr = 1.0;
  for (std::size_t r = 1; r < p; ++r) {
    hr *= h;
    fit.coef.row(r) /= hr;
  }
  fit.n_window = hi - lo;
  fit.n_distinct = distinct;
  fit.side = side;
  fit.c = c;
  fit.h = h;
  fit.rho = rho;
  return fit;
}

std::vector<JumpEstimate> jump_estimates(const SortedSample& s, const ResponseColumns& responses,
                                         const CutoffSchedule& sched, const BandwidthPlan& plan,
                                         const KernelSpec& k) {
  sched.check();
  const std::size_t K = sched.size();
  if (plan.h1.size() != K)
    throw Error(ErrorCode::InvalidInput, "plan.h1 length does not match cutoff count");
  std::vector<JumpEstimate> out;
  out.reserve(K);
  for (std::size_t j = 0; j < K; ++j) {
    const double c = sched.cutoffs[j].c;
    try {
      JumpEstimate je;
      je.cutoff = static_cast<int>(j + 1);
      je.left = fit_one_sided(s, responses, s.size(), c, plan.h1[j], plan.rho1, k, Side::left);
      je.right = fit_one_sided(s, responses, s.size(), c, plan.h1[j], plan.rho1, k, Side::right);
      je.value = (je.right.coef.row(0) - je.left.coef.row(0)).transpose();
      out.push_back(std::move(je));
    } catch (const Error& e) {
      throw Error(e.code(), "cutoff " + std::to_string(j + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<JumpEstimate> jump_estimates(const SortedSample& s, const CutoffSchedule& sched,
                                         const BandwidthPlan& plan, const KernelSpec& k) {
  ResponseColumns cols{std::span<const double>(s.y)};
  return jump_estimates(s, cols, sched, plan, k);
}

}  // namespace mcrd
