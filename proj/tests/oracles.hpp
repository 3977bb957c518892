#pragma once

// Naive reference implementations used to cross-check the library. Each one
// transcribes its defining formula directly (raw powers, dense solves,
// quadratic-cost searches) and deliberately shares no code with the library
// paths it validates.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mcrd/kernel.hpp"
#include "mcrd/schedule.hpp"

namespace oracle {

/// Weighted least squares on an explicit design: (X'WX)^{-1} X'Wy.
inline Eigen::VectorXd wls(const Eigen::MatrixXd& X, const Eigen::VectorXd& w,
                           const Eigen::VectorXd& y) {
  const Eigen::MatrixXd xtw = X.transpose() * w.asDiagonal();
  return (xtw * X).fullPivLu().solve(xtw * y);
}

/// One-sided local polynomial fit on raw powers of (x - c).
/// side = +1 for [c, c+h), -1 for (c-h, c).
inline Eigen::VectorXd lpr_fit(const std::vector<double>& x, const std::vector<double>& y,
                               double c, double h, int rho, const mcrd::KernelSpec& k,
                               int side) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool in = side > 0 ? (x[i] >= c && x[i] < c + h) : (x[i] > c - h && x[i] < c);
    if (in) rows.push_back(i);
  }
  const int p = rho + 1;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), p);
  Eigen::VectorXd W(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd Y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double dx = x[rows[r]] - c;
    double pw = 1.0;
    for (int m = 0; m < p; ++m) {
      X(static_cast<Eigen::Index>(r), m) = pw;
      pw *= dx;
    }
    W[static_cast<Eigen::Index>(r)] = mcrd::kernel_eval(k, dx / h);
    Y[static_cast<Eigen::Index>(r)] = y[rows[r]];
  }
  return wls(X, W, Y);
}

/// Jump at one cutoff: difference of one-sided intercepts.
inline double lpr_jump(const std::vector<double>& x, const std::vector<double>& y, double c,
                       double h, int rho, const mcrd::KernelSpec& k) {
  return lpr_fit(x, y, c, h, rho, k, +1)[0] - lpr_fit(x, y, c, h, rho, k, -1)[0];
}

/// Quadratic-cost nearest-neighbor squared residuals within segments.
inline std::vector<double> nn_residuals(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        const mcrd::CutoffSchedule& sched, int neighbors) {
  const std::size_t n = x.size();
  std::vector<double> eps2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int seg = sched.segment_of(x[i]);
    std::vector<std::size_t> pool;
    for (std::size_t v = 0; v < n; ++v) {
      if (v != i && sched.segment_of(x[v]) == seg) pool.push_back(v);
    }
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(x[a] - x[i]);
      const double db = std::abs(x[b] - x[i]);
      if (da != db) return da < db;
      return a < b;
    });
    double mean = 0.0;
    for (int t = 0; t < neighbors; ++t) mean += y[pool[static_cast<std::size_t>(t)]];
    mean /= neighbors;
    const double r = y[i] - mean;
    eps2[i] = (static_cast<double>(neighbors) / (neighbors + 1.0)) * r * r;
  }
  return eps2;
}

/// Inverse of the (1/(n h)) scaled kernel-weighted Gram on one side.
inline Eigen::MatrixXd gram_inverse(const std::vector<double>& x, double c, double h, int rho,
                                    const mcrd::KernelSpec& k, int side, std::size_t n_total) {
  const int p = rho + 1;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool in = side > 0 ? (x[i] >= c && x[i] < c + h) : (x[i] > c - h && x[i] < c);
    if (!in) continue;
    const double u = (x[i] - c) / h;
    const double w = mcrd::kernel_eval(k, u);
    Eigen::VectorXd hh(p);
    double pw = 1.0;
    for (int m = 0; m < p; ++m) {
      hh[m] = pw;
      pw *= u;
    }
    g += w * hh * hh.transpose();
  }
  g /= static_cast<double>(n_total) * h;
  return g.fullPivLu().inverse();
}

/// Sandwich variance of a weighted jump aggregate, transcribed term by term.
inline double var_sharp(const std::vector<double>& x, const std::vector<double>& y,
                        const mcrd::CutoffSchedule& sched, const std::vector<double>& weights,
                        const std::vector<double>& h1, int rho, const mcrd::KernelSpec& k,
                        int neighbors = 3) {
  const std::size_t n = x.size();
  const std::size_t K = sched.size();
  const auto eps2 = nn_residuals(x, y, sched, neighbors);

  std::vector<Eigen::MatrixXd> gp(K), gm(K);
  for (std::size_t j = 0; j < K; ++j) {
    gp[j] = gram_inverse(x, sched.cutoffs[j].c, h1[j], rho, k, +1, n);
    gm[j] = gram_inverse(x, sched.cutoffs[j].c, h1[j], rho, k, -1, n);
  }

  const int p = rho + 1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      const double c = sched.cutoffs[j].c;
      const double h = h1[j];
      const double u = (x[i] - c) / h;
      const double kw = mcrd::kernel_eval(k, u);
      if (kw == 0.0) continue;
      const bool vplus = x[i] >= c && x[i] < c + h;
      const bool vminus = x[i] > c - h && x[i] < c;
      if (!vplus && !vminus) continue;
      Eigen::VectorXd hh(p);
      double pw = 1.0;
      for (int m = 0; m < p; ++m) {
        hh[m] = pw;
        pw *= u;
      }
      const Eigen::MatrixXd& g = vplus ? gp[j] : gm[j];
      const double sign = vplus ? 1.0 : -1.0;
      inner += weights[j] / (static_cast<double>(n) * h) * kw * sign * (g.row(0) * hh)(0);
    }
    total += eps2[i] * inner * inner;
  }
  return total;
}

/// Moment covariance for the parametric fuzzy case, transcribed with the
/// full Kronecker structure (shared one-dimensional design blocks).
inline Eigen::MatrixXd var_ec(const std::vector<double>& x, const Eigen::MatrixXd& yv,
                              const mcrd::CutoffSchedule& sched, const std::vector<double>& h1,
                              int rho, const mcrd::KernelSpec& k, const Eigen::VectorXd& theta,
                              int neighbors = 3) {
  const std::size_t n = x.size();
  const std::size_t K = sched.size();
  const Eigen::Index q1 = yv.cols();  // 1 + q
  const int p = rho + 1;

  // nearest-neighbor residual vectors within segments
  std::vector<Eigen::VectorXd> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int seg = sched.segment_of(x[i]);
    std::vector<std::size_t> pool;
    for (std::size_t v = 0; v < n; ++v)
      if (v != i && sched.segment_of(x[v]) == seg) pool.push_back(v);
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(x[a] - x[i]);
      const double db = std::abs(x[b] - x[i]);
      if (da != db) return da < db;
      return a < b;
    });
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(q1);
    for (int t = 0; t < neighbors; ++t)
      mean += yv.row(static_cast<Eigen::Index>(pool[static_cast<std::size_t>(t)])).transpose();
    mean /= neighbors;
    resid[i] = std::sqrt(static_cast<double>(neighbors) / (neighbors + 1.0)) *
               (yv.row(static_cast<Eigen::Index>(i)).transpose() - mean);
  }

  const Eigen::MatrixXd iq = Eigen::MatrixXd::Identity(q1, q1);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(p);
  e1[0] = 1.0;
  Eigen::MatrixXd e1bold = Eigen::MatrixXd::Zero(q1 * p, q1);  // I otimes e1
  for (Eigen::Index a = 0; a < q1; ++a) e1bold.block(a * p, a, p, 1) = e1;

  std::vector<Eigen::MatrixXd> gp(K), gm(K);
  for (std::size_t j = 0; j < K; ++j) {
    const Eigen::MatrixXd g_plus =
        gram_inverse(x, sched.cutoffs[j].c, h1[j], rho, k, +1, n);
    const Eigen::MatrixXd g_minus =
        gram_inverse(x, sched.cutoffs[j].c, h1[j], rho, k, -1, n);
    gp[j] = Eigen::MatrixXd::Zero(q1 * p, q1 * p);
    gm[j] = Eigen::MatrixXd::Zero(q1 * p, q1 * p);
    for (Eigen::Index a = 0; a < q1; ++a) {
      gp[j].block(a * p, a * p, p, p) = g_plus;
      gm[j].block(a * p, a * p, p, p) = g_minus;
    }
  }

  Eigen::VectorXd alpha(q1);
  alpha[0] = 1.0;
  alpha.tail(q1 - 1) = -theta;

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K),
                                            static_cast<Eigen::Index>(K));
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t l = 0; l < K; ++l) {
      if (j > l + 1 || l > j + 1) continue;  // zero beyond the first off-diagonal
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        auto window_term = [&](std::size_t jj) -> Eigen::VectorXd {
          const double c = sched.cutoffs[jj].c;
          const double h = h1[jj];
          const double u = (x[i] - c) / h;
          const double kw = mcrd::kernel_eval(k, u);
          const bool vplus = x[i] >= c && x[i] < c + h;
          const bool vminus = x[i] > c - h && x[i] < c;
          if (kw == 0.0 || (!vplus && !vminus))
            return Eigen::VectorXd::Zero(q1);
          Eigen::VectorXd hh(p);
          double pw = 1.0;
          for (int m = 0; m < p; ++m) {
            hh[m] = pw;
            pw *= u;
          }
          Eigen::VectorXd hbold(q1 * p);  // (I otimes H) e_a stacked
          for (Eigen::Index a = 0; a < q1; ++a) hbold.segment(a * p, p) = hh;
          const Eigen::MatrixXd& g = vplus ? gp[jj] : gm[jj];
          const double sign = vplus ? 1.0 : -1.0;
          // e1bold' (v+ G+ - v- G-) Hbold -> q1 x q1 contraction with resid
          Eigen::MatrixXd block = sign * e1bold.transpose() * g;
          Eigen::VectorXd out(q1);
          for (Eigen::Index a = 0; a < q1; ++a)
            out[a] = block.row(a).segment(a * p, p).dot(hh) ;
          const double scale = kw / (static_cast<double>(n) * h);
          return scale * out;
        };
        const Eigen::VectorXd tj = window_term(j);
        const Eigen::VectorXd tl = window_term(l);
        if (tj.isZero(0.0) || tl.isZero(0.0)) continue;
        // terms are diagonal contractions: alpha' diag(tj_a) resid resid' diag(tl_a) alpha
        double left = 0.0, right = 0.0;
        for (Eigen::Index a = 0; a < q1; ++a) {
          left += alpha[a] * tj[a] * resid[i][a];
          right += alpha[a] * tl[a] * resid[i][a];
        }
        acc += left * right;
      }
      v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = acc;
    }
  }
  return v;
}

/// Composite Simpson integral on [a, b].
inline double simpson(double a, double b, int panels, const std::function<double(double)>& f) {
  const int m = 2 * panels;
  const double h = (b - a) / m;
  double acc = f(a) + f(b);
  for (int i = 1; i < m; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace oracle
