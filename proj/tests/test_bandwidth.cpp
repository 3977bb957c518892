#include <cmath>
#include <random>

#include "doctest.h"
#include "mcrd/bandwidth.hpp"
#include "mcrd/error.hpp"

using namespace mcrd;

namespace {

const KernelSpec kTri{KernelKind::triangular};

void smooth_rd_sample(std::size_t n, unsigned seed, std::vector<double>& x,
                      std::vector<double>& y) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> eps(0.0, 0.3);
  x.clear();
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = ux(gen);
    x.push_back(xi);
    // smooth on each side; the curvature change dominates the plug-in
    // regularization from n = 1000 on, so the n^{-1/5} factor drives the rate
    const double side = xi >= 0.5 ? 1.0 + 10.0 * (xi - 0.5) * (xi - 0.5) : 0.0;
    y.push_back(std::sin(3.0 * xi) + side + eps(gen));
  }
}

}  // namespace

TEST_CASE("bandwidth shrinks at the n^{-1/5} rate") {
  std::vector<double> logs_n, logs_h;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> x, y;
    smooth_rd_sample(n, 1234, x, y);
    const double h = ik_bandwidth(x, y, 0.5, kTri);
    CHECK(h > 0.0);
    logs_n.push_back(std::log(static_cast<double>(n)));
    logs_h.push_back(std::log(h));
  }
  // least-squares slope of log h against log n
  const double mx = (logs_n[0] + logs_n[1] + logs_n[2]) / 3.0;
  const double my = (logs_h[0] + logs_h[1] + logs_h[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (logs_n[static_cast<std::size_t>(i)] - mx) * (logs_h[static_cast<std::size_t>(i)] - my);
    den += (logs_n[static_cast<std::size_t>(i)] - mx) * (logs_n[static_cast<std::size_t>(i)] - mx);
  }
  const double slope = num / den;
  CHECK(slope == doctest::Approx(-0.2).epsilon(0.25));
  CHECK(std::abs(slope + 0.2) < 0.05);
}

TEST_CASE("bandwidth has the right order of magnitude") {
  std::vector<double> x, y;
  smooth_rd_sample(5000, 99, x, y);
  const double h = ik_bandwidth(x, y, 0.5, kTri);
  const double rate = std::pow(5000.0, -0.2);
  CHECK(h / rate > 0.1);
  CHECK(h / rate < 10.0);
}

TEST_CASE("audit components are populated and consistent") {
  std::vector<double> x, y;
  smooth_rd_sample(3000, 7, x, y);
  IkAudit audit;
  const double h = ik_bandwidth(x, y, 0.5, kTri, &audit);
  CHECK(audit.h_ik == h);
  CHECK(audit.f_hat > 0.0);
  CHECK(audit.sigma2_hat > 0.0);
  CHECK(audit.h_pilot > 0.0);
  CHECK(audit.reg_plus > 0.0);
  CHECK(audit.reg_minus > 0.0);
  CHECK(audit.n_used == 3000);
}

TEST_CASE("invariant to adding a constant to the outcome") {
  std::vector<double> x, y;
  smooth_rd_sample(4000, 55, x, y);
  const double h1 = ik_bandwidth(x, y, 0.5, kTri);
  for (auto& v : y) v += 123.0;
  const double h2 = ik_bandwidth(x, y, 0.5, kTri);
  CHECK(h1 == doctest::Approx(h2).epsilon(1e-12));
}

TEST_CASE("insufficient data raises") {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(0.6 + i * 0.01);  // only 0 points left of c
    y.push_back(0.0);
  }
  CHECK_THROWS_AS(ik_bandwidth(x, y, 0.5, kTri), Error);
}

TEST_CASE("rate adjustment arithmetic") {
  const std::vector<double> h{0.5, 0.25};
  SUBCASE("lambda at the natural rate is the identity") {
    const auto out = rate_adjust(h, 12345, 0.2);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == doctest::Approx(0.25));
  }
  SUBCASE("default recommendation multiplies by n^{-0.3}") {
    const auto out = rate_adjust(h, 10000, 0.5);
    const double factor = std::pow(10000.0, -0.3);
    CHECK(factor == doctest::Approx(0.0631).epsilon(1e-3));
    CHECK(out[0] == doctest::Approx(0.5 * factor).epsilon(1e-12));
  }
  SUBCASE("order preserving") {
    const auto out = rate_adjust(h, 5000, 0.45);
    CHECK(out[0] > out[1]);
  }
  SUBCASE("warns through the flag when inflating") {
    bool shrinks = true;
    rate_adjust(h, 5000, 0.1, &shrinks);
    CHECK_FALSE(shrinks);
  }
}

TEST_CASE("robustness shrink factor") {
  const std::vector<double> h{0.4};
  const auto out = shrink_bandwidths(h, 100000);
  CHECK(out[0] == doctest::Approx(0.4 * std::pow(100000.0, -0.05)).epsilon(1e-14));
}
