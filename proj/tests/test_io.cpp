#include <cmath>

#include "doctest.h"
#include "mcrd/error.hpp"
#include "mcrd/json_io.hpp"

using namespace mcrd;
using nlohmann::json;

TEST_CASE("schedule json round trip") {
  const json j = {{"x_min", 0.0},
                  {"x_max", 10.0},
                  {"cutoffs", json::array({{{"c", 2.5}, {"d_lo", 0.0}, {"d_hi", 1.0}},
                                           {{"c", 7.5}, {"d_lo", 1.0}, {"d_hi", 3.0}}})}};
  const CutoffSchedule sched = schedule_from_json(j);
  CHECK(sched.size() == 2);
  CHECK(sched.cutoffs[1].d_hi == 3.0);
  const json back = schedule_to_json(sched);
  CHECK(back["cutoffs"][0]["c"] == 2.5);
  CHECK(schedule_from_json(back).cutoffs[1].c == 7.5);
}

TEST_CASE("counterfactual json parsing") {
  SUBCASE("discrete") {
    const auto cf = counterfactual_from_json(
        {{"kind", "discrete"}, {"weights", {0.25, 0.75}}});
    REQUIRE(cf.is_discrete());
    CHECK(cf.discrete().weights[1] == 0.75);
  }
  SUBCASE("continuous cutoff-only") {
    const auto cf = counterfactual_from_json({{"kind", "continuous"},
                                              {"profile", "cutoff_only"},
                                              {"density", "uniform"},
                                              {"support", {{"c", {0.0, 2.0}}}}});
    REQUIRE_FALSE(cf.is_discrete());
    CHECK(cf.continuous().density({1.0, 0.0, 0.0}) == doctest::Approx(0.5));
  }
  SUBCASE("continuous dose-change with pinned step") {
    const auto cf = counterfactual_from_json({{"kind", "continuous"},
                                              {"profile", "dose_change"},
                                              {"density", "uniform"},
                                              {"support", {{"c", {0.0, 1.0}}, {"u", 1.0}}}});
    CHECK(cf.continuous().support[1].degenerate());
  }
  SUBCASE("bad kind") {
    CHECK_THROWS_AS(counterfactual_from_json({{"kind", "nope"}}), Error);
  }
}

TEST_CASE("counterfactual mass validation") {
  const auto cf = counterfactual_from_json({{"kind", "continuous"},
                                            {"profile", "cutoff_only"},
                                            {"density", "uniform"},
                                            {"support", {{"c", {0.0, 1.0}}}}});
  CHECK_NOTHROW(check_counterfactual(cf, 5, {}));
  CHECK_THROWS_AS(
      check_counterfactual(CounterfactualSpec{DiscreteCf{{0.5, 0.4}}}, 2, {}), Error);
  CHECK_THROWS_AS(
      check_counterfactual(CounterfactualSpec{DiscreteCf{{0.5, 0.5}}}, 3, {}), Error);
}

TEST_CASE("ate result json survives a round trip") {
  AteResult r;
  r.mu = -1.0123456789012345;
  r.variance = 0.0079;
  r.mu_bc = -0.9987654321098765;
  r.variance_bc = 0.0164;
  r.ci95 = {-1.25, -0.75};
  r.weights_used = {0.5, 0.5};
  r.weights_used_bc = {0.45, 0.55};
  r.bandwidths.h1 = {0.047619, 0.047619};
  r.bandwidths.h2 = 3.0 / 21.0;
  r.bandwidths.rho1 = 1;
  r.bandwidths.rho2 = 1;
  r.diag.clipped = true;
  r.diag.h1_effective = r.bandwidths.h1;
  r.diag.warnings = {"example"};
  r.diag.ci95_uncorrected = {-1.2, -0.8};

  const AteResult back = ate_result_from_json(ate_result_to_json(r));
  CHECK(back.mu == doctest::Approx(r.mu).epsilon(1e-15));
  CHECK(back.variance == doctest::Approx(r.variance).epsilon(1e-15));
  CHECK(back.mu_bc == doctest::Approx(r.mu_bc).epsilon(1e-15));
  CHECK(back.bandwidths.rho1 == 1);
  CHECK(back.weights_used == r.weights_used);
  CHECK(back.diag.clipped);
  CHECK(back.diag.warnings == r.diag.warnings);

  SUBCASE("infinite h2 is encoded as a string") {
    r.bandwidths.h2 = std::numeric_limits<double>::infinity();
    const AteResult naive = ate_result_from_json(ate_result_to_json(r));
    CHECK(std::isinf(naive.bandwidths.h2));
  }
}

TEST_CASE("basis and quadrature configs") {
  const WBasis basis = wbasis_from_json({{"monomials", {{0, 1}, {1, 1}, {2, 1}, {3, 1}}}});
  CHECK(basis.q() == 4);
  CHECK(basis.eval(2.0, 3.0)[3] == doctest::Approx(24.0));  // c^3 d

  const QuadratureConfig q = quadrature_from_json({{"nodes_per_dim", 32}, {"refine", false}});
  CHECK(q.nodes_per_dim == 32);
  CHECK_FALSE(q.refine);
  CHECK_THROWS_AS(quadrature_from_json({{"rule", "monte-carlo"}}), Error);
}
