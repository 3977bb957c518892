#include "mcrd/bandwidth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcrd/error.hpp"

namespace mcrd {

namespace {

constexpr double kPilotConst = 1.84;       // variance/density pilot
constexpr double kCurvPilotConst = 3.56;   // curvature pilot
constexpr double kRegConst = 2160.0;       // curvature regularization
constexpr double kEdgeKernelConst = 3.4375;

double median_of_sorted(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  const std::size_t m = hi - lo;
  const std::size_t mid = lo + m / 2;
  return (m % 2 == 1) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// OLS of y on powers of (x-c) over [lo, hi), optionally with a level shift
/// at c. Returns coefficients in the x metric (internally rescaled).
Eigen::VectorXd poly_fit(const std::vector<double>& x, const std::vector<double>& y,
                         std::size_t lo, std::size_t hi, double c, int degree, bool jump) {
  const std::size_t n = hi - lo;
  const int p = degree + 1 + (jump ? 1 : 0);
  double scale = 0.0;
  for (std::size_t i = lo; i < hi; ++i) scale = std::max(scale, std::abs(x[i] - c));
  if (scale == 0.0) scale = 1.0;

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
  for (std::size_t i = lo; i < hi; ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i - lo);
    const double u = (x[i] - c) / scale;
    int col = 0;
    X(r, col++) = 1.0;
    if (jump) X(r, col++) = x[i] >= c ? 1.0 : 0.0;
    double uu = u;
    for (int m = 1; m <= degree; ++m) {
      X(r, col++) = uu;
      uu *= u;
    }
    Y[r] = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p)
    throw Error(ErrorCode::InsufficientData, "rank-deficient pilot regression");
  Eigen::VectorXd beta = qr.solve(Y);
  // undo the rescaling on the polynomial terms
  double s = 1.0;
  const int first_poly = jump ? 2 : 1;
  for (int m = 1; m <= degree; ++m) {
    s *= scale;
    beta[first_poly + m - 1] /= s;
  }
  return beta;
}

}  // namespace

double ik_bandwidth(const std::vector<double>& x_in, const std::vector<double>& y_in, double c,
                    const KernelSpec& k, IkAudit* audit) {
  (void)k;  // the plug-in constants below are for the edge kernel
  if (x_in.size() != y_in.size() || x_in.empty())
    throw Error(ErrorCode::InvalidInput, "mismatched bandwidth input");

  // sort jointly by x
  std::vector<std::size_t> idx(x_in.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x_in[a] < x_in[b]; });
  std::vector<double> x(x_in.size()), y(y_in.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    x[i] = x_in[idx[i]];
    y[i] = y_in[idx[i]];
  }

  const std::size_t n = x.size();
  const std::size_t split =
      static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), c) - x.begin());
  const std::size_t n_left = split;
  const std::size_t n_right = n - split;
  if (n_left < 10 || n_right < 10)
    throw Error(ErrorCode::InsufficientData,
                "need at least 10 observations on each side of c=" + std::to_string(c));

  // Step 1: density and conditional variance at the cutoff.
  double mean_x = 0.0;
  for (double v : x) mean_x += v;
  mean_x /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean_x) * (v - mean_x);
  const double sd_x = std::sqrt(ss / static_cast<double>(n - 1));
  double h_pilot = kPilotConst * sd_x * std::pow(static_cast<double>(n), -0.2);

  auto window_stats = [&](double h, std::size_t& nl, std::size_t& nr, double& sig2) {
    const std::size_t lo =
        static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), c - h) - x.begin());
    const std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(x.begin(), x.end(), c + h) - x.begin());
    nl = split - lo;
    nr = hi - split;
    if (nl < 2 || nr < 2) return false;
    double ml = 0.0, mr = 0.0;
    for (std::size_t i = lo; i < split; ++i) ml += y[i];
    for (std::size_t i = split; i < hi; ++i) mr += y[i];
    ml /= static_cast<double>(nl);
    mr /= static_cast<double>(nr);
    double acc = 0.0;
    for (std::size_t i = lo; i < split; ++i) acc += (y[i] - ml) * (y[i] - ml);
    for (std::size_t i = split; i < hi; ++i) acc += (y[i] - mr) * (y[i] - mr);
    sig2 = acc / static_cast<double>(nl + nr);
    return true;
  };

  std::size_t n_l1 = 0, n_r1 = 0;
  double sigma2 = 0.0;
  while (!window_stats(h_pilot, n_l1, n_r1, sigma2)) h_pilot *= 2.0;
  const double f_hat =
      static_cast<double>(n_l1 + n_r1) / (2.0 * static_cast<double>(n) * h_pilot);

  // Step 2: third derivative from a global cubic on the median-trimmed sample.
  const double med_l = median_of_sorted(x, 0, split);
  const double med_r = median_of_sorted(x, split, n);
  std::size_t tlo =
      static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), med_l) - x.begin());
  std::size_t thi =
      static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), med_r) - x.begin());
  if (thi - tlo < 6) {
    tlo = 0;
    thi = n;
  }
  const Eigen::VectorXd cubic = poly_fit(x, y, tlo, thi, c, 3, true);
  const double m3 = 6.0 * cubic[4];

  const double span_r = x.back() - c;
  const double span_l = c - x.front();
  const double m3sq = std::max(m3 * m3, 1e-14);
  double h2_plus = kCurvPilotConst * std::pow(sigma2 / (f_hat * m3sq), 1.0 / 7.0) *
                   std::pow(static_cast<double>(n_right), -1.0 / 7.0);
  double h2_minus = kCurvPilotConst * std::pow(sigma2 / (f_hat * m3sq), 1.0 / 7.0) *
                    std::pow(static_cast<double>(n_left), -1.0 / 7.0);
  h2_plus = std::min(h2_plus, span_r);
  h2_minus = std::min(h2_minus, span_l);

  // Step 3: one-sided curvatures plus their regularization terms.
  auto side_curvature = [&](bool right_side, double h2, double& m2, std::size_t& n2) {
    std::size_t lo, hi;
    if (right_side) {
      lo = split;
      hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), c + h2) - x.begin());
      if (hi - lo < 4) hi = n;
    } else {
      lo = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), c - h2) - x.begin());
      hi = split;
      if (hi - lo < 4) lo = 0;
    }
    n2 = hi - lo;
    if (n2 < 4)
      throw Error(ErrorCode::InsufficientData, "too few observations for curvature pilot");
    const Eigen::VectorXd quad = poly_fit(x, y, lo, hi, c, 2, false);
    m2 = 2.0 * quad[2];
  };

  double m2_plus = 0.0, m2_minus = 0.0;
  std::size_t n2_plus = 0, n2_minus = 0;
  side_curvature(true, h2_plus, m2_plus, n2_plus);
  side_curvature(false, h2_minus, m2_minus, n2_minus);

  const double reg_plus =
      kRegConst * sigma2 / (static_cast<double>(n2_plus) * std::pow(h2_plus, 4));
  const double reg_minus =
      kRegConst * sigma2 / (static_cast<double>(n2_minus) * std::pow(h2_minus, 4));

  const double curv = (m2_plus - m2_minus) * (m2_plus - m2_minus) + reg_plus + reg_minus;
  const double h_ik = kEdgeKernelConst *
                      std::pow(2.0 * sigma2 / (f_hat * curv), 0.2) *
                      std::pow(static_cast<double>(n), -0.2);

  if (audit) {
    audit->h_pilot = h_pilot;
    audit->f_hat = f_hat;
    audit->sigma2_hat = sigma2;
    audit->m3_hat = m3;
    audit->h2_plus = h2_plus;
    audit->h2_minus = h2_minus;
    audit->m2_plus = m2_plus;
    audit->m2_minus = m2_minus;
    audit->reg_plus = reg_plus;
    audit->reg_minus = reg_minus;
    audit->n_used = n;
    audit->n_left = n_left;
    audit->n_right = n_right;
    audit->h_ik = h_ik;
  }
  if (!(h_ik > 0.0) || !std::isfinite(h_ik))
    throw Error(ErrorCode::InsufficientData, "bandwidth selection failed at c=" + std::to_string(c));
  return h_ik;
}

std::vector<double> ik_bandwidths_per_cutoff(const SortedSample& s, const CutoffSchedule& sched,
                                             const KernelSpec& k,
                                             const std::vector<double>& response,
                                             std::vector<IkAudit>* audits) {
  sched.check();
  const std::vector<double>& y = response.empty() ? s.y : response;
  if (y.size() != s.size())
    throw Error(ErrorCode::InvalidInput, "response length does not match sample");
  const std::size_t K = sched.size();
  std::vector<double> out(K);
  if (audits) audits->assign(K, IkAudit{});
  for (std::size_t j = 0; j < K; ++j) {
    // pooled adjacent segments: [c_{j-1}, c_{j+1}) with domain ends at the edges
    const double lo_x = j == 0 ? sched.x_min : sched.cutoffs[j - 1].c;
    const double hi_x = j + 1 == K ? sched.x_max : sched.cutoffs[j + 1].c;
    const std::size_t lo = s.lower_bound(lo_x);
    const std::size_t hi =
        j + 1 == K ? s.size() : s.lower_bound(hi_x);
    std::vector<double> xs(s.x.begin() + static_cast<std::ptrdiff_t>(lo),
                           s.x.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<double> ys(y.begin() + static_cast<std::ptrdiff_t>(lo),
                           y.begin() + static_cast<std::ptrdiff_t>(hi));
    try {
      out[j] = ik_bandwidth(xs, ys, sched.cutoffs[j].c, k,
                            audits ? &(*audits)[j] : nullptr);
    } catch (const Error& e) {
      throw Error(e.code(), "cutoff " + std::to_string(j + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> rate_adjust(const std::vector<double>& h_ik, std::size_t n, double lambda1,
                                bool* shrinks) {
  if (!(lambda1 > 0.0) || !(lambda1 < 1.0))
    throw Error(ErrorCode::InvalidInput, "lambda1 must lie in (0, 1)");
  const double factor = std::pow(static_cast<double>(n), 0.2 - lambda1);
  if (shrinks) *shrinks = lambda1 >= 0.2;
  std::vector<double> out(h_ik.size());
  for (std::size_t j = 0; j < h_ik.size(); ++j) out[j] = h_ik[j] * factor;
  return out;
}

std::vector<double> shrink_bandwidths(const std::vector<double>& h, std::size_t n) {
  const double factor = std::pow(static_cast<double>(n), -0.05);
  std::vector<double> out(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) out[j] = h[j] * factor;
  return out;
}

}  // namespace mcrd
