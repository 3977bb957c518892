#include <random>

#include "doctest.h"
#include "mcrd/error.hpp"
#include "mcrd/lpr.hpp"
#include "mcrd/mc.hpp"
#include "oracles.hpp"

using namespace mcrd;

namespace {

CutoffSchedule one_cutoff(double c = 0.5) {
  CutoffSchedule sched;
  sched.x_min = 0.0;
  sched.x_max = 1.0;
  sched.cutoffs = {{c, 0.0, 1.0}};
  return sched;
}

}  // namespace

TEST_CASE("exact polynomial reproduction on one side") {
  const double c = 0.4;
  Sample s;
  for (int i = 0; i < 60; ++i) {
    const double x = c + (i + 1) * 0.004;
    s.x.push_back(x);
    s.y.push_back(2.0 + 3.0 * (x - c));
  }
  const SortedSample sorted = sort_sample(s);
  ResponseColumns cols{std::span<const double>(sorted.y)};
  const auto fit = fit_one_sided(sorted, cols, sorted.size(), c, 0.3, 1,
                                 KernelSpec{KernelKind::triangular}, Side::right);
  CHECK(fit.coef(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.coef(1, 0) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("fit matches the brute-force normal equations") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> uy(0.0, 1.0);
  Sample s;
  for (int i = 0; i < 20; ++i) {
    s.x.push_back(ux(gen));
    s.y.push_back(uy(gen));
  }
  const double c = 0.45, h = 0.45;
  const SortedSample sorted = sort_sample(s);
  ResponseColumns cols{std::span<const double>(sorted.y)};
  for (Side side : {Side::left, Side::right}) {
    const auto fit = fit_one_sided(sorted, cols, sorted.size(), c, h, 2,
                                   KernelSpec{KernelKind::triangular}, side);
    const auto ref = oracle::lpr_fit(s.x, s.y, c, h, 2, KernelSpec{KernelKind::triangular},
                                     side == Side::right ? +1 : -1);
    for (int m = 0; m <= 2; ++m) CHECK(fit.coef(m, 0) == doctest::Approx(ref[m]).epsilon(1e-8));
  }
}

TEST_CASE("uniform kernel reduces to plain least squares") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> uy(0.0, 1.0);
  Sample s;
  for (int i = 0; i < 50; ++i) {
    s.x.push_back(ux(gen));
    s.y.push_back(uy(gen));
  }
  const double c = 0.5, h = 0.5;
  const SortedSample sorted = sort_sample(s);
  ResponseColumns cols{std::span<const double>(sorted.y)};
  const auto fit = fit_one_sided(sorted, cols, sorted.size(), c, h, 1,
                                 KernelSpec{KernelKind::uniform}, Side::right);

  // unweighted OLS over the same window
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.x[i] >= c && s.x[i] < c + h) {
      xs.push_back(s.x[i]);
      ys.push_back(s.y[i]);
    }
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), 2);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = xs[i] - c;
    Y[static_cast<Eigen::Index>(i)] = ys[i];
  }
  const Eigen::VectorXd ols = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
  CHECK(fit.coef(0, 0) == doctest::Approx(ols[0]).epsilon(1e-10));
  CHECK(fit.coef(1, 0) == doctest::Approx(ols[1]).epsilon(1e-10));
}

TEST_CASE("pure step yields a unit jump") {
  Sample s;
  for (int i = 0; i < 200; ++i) {
    const double x = (i + 0.5) / 200.0;
    s.x.push_back(x);
    s.y.push_back(x >= 0.5 ? 1.0 : 0.0);
  }
  BandwidthPlan plan;
  plan.h1 = {0.3};
  plan.rho1 = 1;
  const auto jumps =
      jump_estimates(sort_sample(s), one_cutoff(0.5), plan, KernelSpec{KernelKind::triangular});
  CHECK(jumps[0].value[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("simulated draw matches the two-regression reference at every cutoff") {
  DgpConfig dgp;
  dgp.n = 1789;
  const Sample s = draw_sample(dgp, 42);
  const CutoffSchedule sched = dgp.schedule();
  const int K = dgp.cutoff_count();
  BandwidthPlan plan;
  plan.h1.assign(static_cast<std::size_t>(K), 1.0 / (K + 1));
  plan.rho1 = 1;
  const KernelSpec k{KernelKind::triangular};
  const auto jumps = jump_estimates(sort_sample(s), sched, plan, k);
  for (int j = 0; j < K; ++j) {
    const double ref = oracle::lpr_jump(s.x, s.y, sched.cutoffs[static_cast<std::size_t>(j)].c,
                                        plan.h1[static_cast<std::size_t>(j)], 1, k);
    CHECK(jumps[static_cast<std::size_t>(j)].value[0] == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("vector response: dose jump equals the schedule step") {
  DgpConfig dgp;
  dgp.n = 4000;
  const Sample s = draw_sample(dgp, 7);
  const CutoffSchedule sched = dgp.schedule();
  const int K = dgp.cutoff_count();
  BandwidthPlan plan;
  plan.h1.assign(static_cast<std::size_t>(K), 1.0 / (K + 1));
  plan.rho1 = 1;
  const SortedSample sorted = sort_sample(s);
  ResponseColumns cols{std::span<const double>(sorted.y), std::span<const double>(sorted.d)};
  const auto jumps = jump_estimates(sorted, cols, sched, plan, KernelSpec{KernelKind::triangular});
  for (const auto& je : jumps) {
    CHECK(je.value[1] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("jump equivariance under location shift") {
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> uy(0.0, 1.0);
  Sample s;
  for (int i = 0; i < 500; ++i) {
    s.x.push_back(ux(gen));
    s.y.push_back(uy(gen) + (s.x.back() >= 0.5 ? 2.0 : 0.0));
  }
  BandwidthPlan plan;
  plan.h1 = {0.25};
  plan.rho1 = 1;
  const KernelSpec k{KernelKind::triangular};
  const auto base = jump_estimates(sort_sample(s), one_cutoff(0.5), plan, k);

  const double shift = 17.5;
  Sample t = s;
  for (auto& v : t.x) v += shift;
  CutoffSchedule sched2 = one_cutoff(0.5);
  sched2.x_min += shift;
  sched2.x_max += shift;
  sched2.cutoffs[0].c += shift;
  const auto shifted = jump_estimates(sort_sample(t), sched2, plan, k);
  CHECK(shifted[0].value[0] == doctest::Approx(base[0].value[0]).epsilon(1e-10));
}

TEST_CASE("jump scales linearly with the outcome") {
  std::mt19937 gen(29);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  Sample s;
  for (int i = 0; i < 300; ++i) {
    s.x.push_back(ux(gen));
    s.y.push_back(std::sin(7.0 * s.x.back()));
  }
  BandwidthPlan plan;
  plan.h1 = {0.2};
  plan.rho1 = 2;
  const KernelSpec k{KernelKind::triangular};
  const double base = jump_estimates(sort_sample(s), one_cutoff(0.5), plan, k)[0].value[0];
  for (auto& v : s.y) v *= -3.5;
  const double scaled = jump_estimates(sort_sample(s), one_cutoff(0.5), plan, k)[0].value[0];
  CHECK(scaled == doctest::Approx(-3.5 * base));
}

TEST_CASE("boundary point belongs to the right window only") {
  Sample s;
  // one observation exactly at the cutoff with a very different outcome
  for (int i = 1; i <= 30; ++i) {
    s.x.push_back(0.5 - i * 0.01);
    s.y.push_back(0.0);
    s.x.push_back(0.5 + i * 0.01);
    s.y.push_back(0.0);
  }
  s.x.push_back(0.5);
  s.y.push_back(10.0);

  const SortedSample sorted = sort_sample(s);
  ResponseColumns cols{std::span<const double>(sorted.y)};
  const KernelSpec k{KernelKind::uniform};
  const auto right = fit_one_sided(sorted, cols, sorted.size(), 0.5, 0.35, 0, k, Side::right);
  const auto left = fit_one_sided(sorted, cols, sorted.size(), 0.5, 0.35, 0, k, Side::left);
  CHECK(right.n_window == 31);  // includes x = c
  CHECK(left.n_window == 30);
  CHECK(right.coef(0, 0) > 0.2);                      // pulled up by the boundary point
  CHECK(left.coef(0, 0) == doctest::Approx(0.0));     // unaffected
}

TEST_CASE("raising the order restores exactness for higher-degree sides") {
  // side means of degree 2 with different curvatures: local-linear jumps are
  // biased, local-quadratic exact
  Sample s;
  for (int i = 0; i < 400; ++i) {
    const double x = (i + 0.5) / 400.0;
    s.x.push_back(x);
    const double curv = x < 0.5 ? 1.0 : 5.0;
    const double base = curv * (x - 0.5) * (x - 0.5);
    s.y.push_back(base + (x >= 0.5 ? 1.0 : 0.0));
  }
  BandwidthPlan plan;
  plan.h1 = {0.4};
  const KernelSpec k{KernelKind::triangular};
  plan.rho1 = 2;
  const auto exact = jump_estimates(sort_sample(s), one_cutoff(0.5), plan, k);
  CHECK(exact[0].value[0] == doctest::Approx(1.0).epsilon(1e-9));
  plan.rho1 = 1;
  const auto biased = jump_estimates(sort_sample(s), one_cutoff(0.5), plan, k);
  CHECK(std::abs(biased[0].value[0] - 1.0) > 1e-6);
}

TEST_CASE("degenerate windows are rejected") {
  Sample s;
  s.x = {0.45, 0.48, 0.55, 0.58};
  s.y = {0.0, 0.0, 1.0, 1.0};
  const SortedSample sorted = sort_sample(s);
  ResponseColumns cols{std::span<const double>(sorted.y)};
  // two distinct x on the right is rho+1 = 2 for rho=1: need rho+2 = 3
  CHECK_THROWS_AS(fit_one_sided(sorted, cols, sorted.size(), 0.5, 0.2, 1,
                                KernelSpec{KernelKind::triangular}, Side::right),
                  Error);
}
