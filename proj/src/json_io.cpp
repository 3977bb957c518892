#include "mcrd/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "mcrd/error.hpp"

namespace mcrd {

using nlohmann::json;

namespace {

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw Error(ErrorCode::InvalidInput, std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open JSON file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, "bad JSON in " + path + ": " + e.what());
  }
  return j;
}

CutoffSchedule schedule_from_json(const json& j) {
  CutoffSchedule sched;
  sched.x_min = require_number(j, "x_min");
  sched.x_max = require_number(j, "x_max");
  if (!j.contains("cutoffs") || !j["cutoffs"].is_array())
    throw Error(ErrorCode::InvalidInput, "schedule needs a 'cutoffs' array");
  for (const auto& cj : j["cutoffs"]) {
    sched.cutoffs.push_back(
        {require_number(cj, "c"), require_number(cj, "d_lo"), require_number(cj, "d_hi")});
  }
  sched.check();
  return sched;
}

json schedule_to_json(const CutoffSchedule& sched) {
  json cutoffs = json::array();
  for (const auto& cj : sched.cutoffs)
    cutoffs.push_back({{"c", cj.c}, {"d_lo", cj.d_lo}, {"d_hi", cj.d_hi}});
  return {{"x_min", sched.x_min}, {"x_max", sched.x_max}, {"cutoffs", cutoffs}};
}

namespace {

Interval interval_from_json(const json& j) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw Error(ErrorCode::InvalidInput, "support entries must be a number or [lo, hi]");
}

}  // namespace

CounterfactualSpec counterfactual_from_json(const json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "discrete") {
    if (!j.contains("weights") || !j["weights"].is_array())
      throw Error(ErrorCode::InvalidInput, "discrete counterfactual needs 'weights'");
    DiscreteCf d;
    for (const auto& w : j["weights"]) d.weights.push_back(w.get<double>());
    return CounterfactualSpec{d};
  }
  if (kind == "continuous") {
    const Profile profile = profile_from_name(j.value("profile", "cutoff_only"));
    const std::string density = j.value("density", "uniform");
    if (density != "uniform")
      throw Error(ErrorCode::InvalidInput, "only uniform densities are configurable here");
    if (!j.contains("support"))
      throw Error(ErrorCode::InvalidInput, "continuous counterfactual needs 'support'");
    const json& sup = j["support"];
    std::array<Interval, 3> box{};
    box[0] = interval_from_json(sup.at("c"));
    if (profile == Profile::dose_change) {
      box[1] = interval_from_json(sup.at("u"));
    } else if (profile == Profile::full) {
      box[1] = interval_from_json(sup.at("d"));
      box[2] = interval_from_json(sup.at("dp"));
    }
    return CounterfactualSpec{uniform_cf(profile, box)};
  }
  throw Error(ErrorCode::InvalidInput, "counterfactual 'kind' must be discrete or continuous");
}

WBasis wbasis_from_json(const json& j) {
  if (!j.contains("monomials") || !j["monomials"].is_array())
    throw Error(ErrorCode::InvalidInput, "basis needs a 'monomials' array of [a,b] pairs");
  WBasis basis;
  for (const auto& m : j["monomials"]) {
    if (!m.is_array() || m.size() != 2)
      throw Error(ErrorCode::InvalidInput, "each monomial must be an [a,b] pair");
    basis.monomials.emplace_back(m[0].get<int>(), m[1].get<int>());
  }
  if (basis.monomials.empty()) throw Error(ErrorCode::InvalidInput, "basis is empty");
  return basis;
}

QuadratureConfig quadrature_from_json(const json& j) {
  QuadratureConfig q;
  q.nodes_per_dim = j.value("nodes_per_dim", q.nodes_per_dim);
  q.nodes_per_panel = j.value("nodes_per_panel", q.nodes_per_panel);
  q.refine = j.value("refine", q.refine);
  q.kink_aligned = j.value("kink_aligned", q.kink_aligned);
  q.drop_boundary_singular = j.value("drop_boundary_singular", q.drop_boundary_singular);
  q.rule = j.value("rule", q.rule);
  if (q.rule != "gauss-legendre")
    throw Error(ErrorCode::InvalidInput, "unsupported quadrature rule: " + q.rule);
  return q;
}

json ate_result_to_json(const AteResult& r) {
  json diag{{"clipped", r.diag.clipped},
            {"h1_effective", r.diag.h1_effective},
            {"warnings", r.diag.warnings},
            {"quadrature_error", r.diag.quadrature_error},
            {"quadrature_mass_deficit", r.diag.quadrature_mass_deficit},
            {"ci95_uncorrected", r.diag.ci95_uncorrected}};
  return {{"schema_version", kSchemaVersion},
          {"mu", r.mu},
          {"se", std::sqrt(std::max(0.0, r.variance))},
          {"variance", r.variance},
          {"mu_bc", r.mu_bc},
          {"se_bc", std::sqrt(std::max(0.0, r.variance_bc))},
          {"variance_bc", r.variance_bc},
          {"ci95", r.ci95},
          {"weights", r.weights_used},
          {"weights_bc", r.weights_used_bc},
          {"h1", r.bandwidths.h1},
          {"h2", std::isfinite(r.bandwidths.h2) ? json(r.bandwidths.h2) : json("inf")},
          {"rho1", r.bandwidths.rho1},
          {"rho2", r.bandwidths.rho2},
          {"diagnostics", diag}};
}

AteResult ate_result_from_json(const json& j) {
  AteResult r;
  r.mu = require_number(j, "mu");
  r.variance = require_number(j, "variance");
  r.mu_bc = require_number(j, "mu_bc");
  r.variance_bc = require_number(j, "variance_bc");
  r.ci95 = {j.at("ci95")[0].get<double>(), j.at("ci95")[1].get<double>()};
  r.weights_used = j.at("weights").get<std::vector<double>>();
  r.weights_used_bc = j.at("weights_bc").get<std::vector<double>>();
  r.bandwidths.h1 = j.at("h1").get<std::vector<double>>();
  if (j.at("h2").is_string()) {
    r.bandwidths.h2 = std::numeric_limits<double>::infinity();
  } else {
    r.bandwidths.h2 = j.at("h2").get<double>();
  }
  r.bandwidths.rho1 = j.at("rho1").get<int>();
  r.bandwidths.rho2 = j.at("rho2").get<int>();
  const json& diag = j.at("diagnostics");
  r.diag.clipped = diag.at("clipped").get<bool>();
  r.diag.h1_effective = diag.at("h1_effective").get<std::vector<double>>();
  r.diag.warnings = diag.at("warnings").get<std::vector<std::string>>();
  r.diag.quadrature_error = diag.at("quadrature_error").get<double>();
  r.diag.quadrature_mass_deficit = diag.at("quadrature_mass_deficit").get<double>();
  r.diag.ci95_uncorrected = {diag.at("ci95_uncorrected")[0].get<double>(),
                             diag.at("ci95_uncorrected")[1].get<double>()};
  return r;
}

json mc_report_to_json(const McReport& r) {
  json stats = json::array();
  for (const auto& st : r.stats) {
    stats.push_back({{"estimator", st.estimator},
                     {"h2", std::isfinite(st.h2) ? json(st.h2) : json("inf")},
                     {"bias", st.bias},
                     {"variance", st.variance},
                     {"mse", st.mse},
                     {"coverage", st.coverage},
                     {"avg_ci_length", st.avg_ci_length},
                     {"mean_vhat", st.mean_vhat}});
  }
  return {{"schema_version", kSchemaVersion},
          {"n", r.n},
          {"K", r.K},
          {"reps", r.reps},
          {"h1_mode", r.h1_mode},
          {"seed", r.seed},
          {"true_mu", r.true_mu},
          {"failed_reps", r.failed_reps},
          {"stats", stats}};
}

json fuzzy_result_to_json(const FuzzyResult& r) {
  return {{"schema_version", kSchemaVersion},
          {"theta", std::vector<double>(r.theta.theta.data(),
                                        r.theta.theta.data() + r.theta.theta.size())},
          {"mu_ec", r.mu_ec},
          {"se_ec", std::sqrt(std::max(0.0, r.var_mu_ec))},
          {"ci95", r.ci95},
          {"outer_iterations", r.theta.outer_iterations},
          {"inner_iterations", r.theta.inner_iterations},
          {"converged", r.theta.converged},
          {"h1", r.h1}};
}

json h2_selection_to_json(const H2Selection& sel) {
  json curve = json::array();
  for (const auto& pt : sel.curve) {
    curve.push_back({{"h2", pt.h2},
                     {"mu", pt.mu},
                     {"mu_bc", pt.mu_bc},
                     {"vhat", pt.vhat},
                     {"mse", pt.mse},
                     {"feasible", pt.feasible},
                     {"failure", pt.failure}});
  }
  json j = ate_result_to_json(sel.result);
  j["h2_star"] = sel.h2_star;
  j["mse_curve"] = curve;
  return j;
}

}  // namespace mcrd
