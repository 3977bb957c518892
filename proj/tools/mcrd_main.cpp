#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcrd/bandwidth.hpp"
#include "mcrd/discrete_weights.hpp"
#include "mcrd/error.hpp"
#include "mcrd/fuzzy.hpp"
#include "mcrd/json_io.hpp"
#include "mcrd/mc.hpp"
#include "mcrd/sharp.hpp"

namespace {

using nlohmann::json;

int exit_code_for(const mcrd::Error& e) {
  switch (e.code()) {
    case mcrd::ErrorCode::InvalidInput:
    case mcrd::ErrorCode::UnorderedCutoffs:
    case mcrd::ErrorCode::EnumerationTooLarge:
      return 2;
    default:
      return 1;
  }
}

void emit(const json& doc, const std::string& sink) {
  std::cout << doc.dump(2) << std::endl;
  if (!sink.empty()) {
    std::ofstream out(sink);
    if (!out) throw mcrd::Error(mcrd::ErrorCode::InvalidInput, "cannot write to " + sink);
    out << doc.dump(2) << '\n';
  }
}

struct CommonOpts {
  std::string data_path;
  std::string schedule_path;
  std::string kernel = "triangular";
  std::string output_sink;
  int rho1 = 1;
  std::string bandwidth_mode = "ik";
  std::vector<double> h1;
  double lambda1 = 0.5;
  bool shrink = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_data = true) {
  if (needs_data) {
    cmd->add_option("--data", o.data_path, "CSV with header y,x[,d]")->required();
  }
  cmd->add_option("--schedule", o.schedule_path, "schedule JSON")->required();
  cmd->add_option("--kernel", o.kernel, "triangular|uniform");
  cmd->add_option("--rho1", o.rho1, "first-step polynomial order");
  cmd->add_option("--bandwidth", o.bandwidth_mode, "ik|manual");
  cmd->add_option("--h1", o.h1, "manual per-cutoff bandwidths (single value broadcasts)");
  cmd->add_option("--lambda1", o.lambda1, "rate exponent for the ik adjustment");
  cmd->add_flag("--shrink", o.shrink, "extra n^{-1/20} robustness shrink");
  cmd->add_option("--output", o.output_sink, "also write the JSON result to this file");
}

std::vector<double> resolve_h1(const CommonOpts& o, const mcrd::SortedSample& s,
                               const mcrd::CutoffSchedule& sched, const mcrd::KernelSpec& k) {
  std::vector<double> h1;
  if (o.bandwidth_mode == "manual") {
    if (o.h1.empty())
      throw mcrd::Error(mcrd::ErrorCode::InvalidInput, "--bandwidth manual requires --h1");
    h1 = o.h1.size() == 1 ? std::vector<double>(sched.size(), o.h1[0]) : o.h1;
    if (h1.size() != sched.size())
      throw mcrd::Error(mcrd::ErrorCode::InvalidInput,
                        "--h1 must give one value or one per cutoff");
  } else if (o.bandwidth_mode == "ik") {
    h1 = mcrd::ik_bandwidths_per_cutoff(s, sched, k);
    h1 = mcrd::rate_adjust(h1, s.size(), o.lambda1);
  } else {
    throw mcrd::Error(mcrd::ErrorCode::InvalidInput,
                      "unknown --bandwidth mode: " + o.bandwidth_mode);
  }
  if (o.shrink) h1 = mcrd::shrink_bandwidths(h1, s.size());
  return mcrd::clip_bandwidths(sched, h1);
}

int cmd_sharp_discrete(const CommonOpts& o, const std::string& weights_path, double density_bw) {
  const mcrd::Sample sample = mcrd::Sample::from_csv_file(o.data_path);
  const mcrd::CutoffSchedule sched = mcrd::schedule_from_json(mcrd::load_json_file(o.schedule_path));
  const mcrd::KernelSpec kernel = mcrd::kernel_from_name(o.kernel);
  const mcrd::SortedSample sorted = mcrd::sort_sample(sample);

  std::vector<double> weights;
  if (!weights_path.empty()) {
    const json wj = mcrd::load_json_file(weights_path);
    const auto cf = mcrd::counterfactual_from_json(wj);
    if (!cf.is_discrete())
      throw mcrd::Error(mcrd::ErrorCode::InvalidInput,
                        "estimate-sharp-discrete needs a discrete counterfactual");
    weights = cf.discrete().weights;
  } else {
    const double bw = density_bw > 0.0 ? density_bw : mcrd::silverman_bandwidth(sorted);
    weights = mcrd::discrete_weights_normalized(sorted, sched, bw, kernel).weights;
  }

  mcrd::BandwidthPlan plan;
  plan.rho1 = o.rho1;
  plan.h1 = resolve_h1(o, sorted, sched, kernel);
  const mcrd::AteResult res = mcrd::ate_discrete(sample, sched, weights, plan, kernel);
  emit(mcrd::ate_result_to_json(res), o.output_sink);
  return 0;
}

int cmd_sharp_continuous(const CommonOpts& o, const std::string& cf_path, int rho2, double h2,
                         bool grid_search, const std::string& quad_path) {
  const mcrd::Sample sample = mcrd::Sample::from_csv_file(o.data_path);
  const mcrd::CutoffSchedule sched = mcrd::schedule_from_json(mcrd::load_json_file(o.schedule_path));
  const mcrd::KernelSpec kernel = mcrd::kernel_from_name(o.kernel);
  const auto cf = mcrd::counterfactual_from_json(mcrd::load_json_file(cf_path));
  mcrd::QuadratureConfig quad;
  if (!quad_path.empty()) quad = mcrd::quadrature_from_json(mcrd::load_json_file(quad_path));
  mcrd::check_counterfactual(cf, sched.size(), quad);

  const mcrd::SortedSample sorted = mcrd::sort_sample(sample);
  mcrd::BandwidthPlan plan;
  plan.rho1 = o.rho1;
  plan.rho2 = rho2;
  plan.h1 = resolve_h1(o, sorted, sched, kernel);

  if (grid_search) {
    const auto grid = mcrd::default_h2_grid(sched.size());
    const auto sel = mcrd::select_h2(sample, sched, cf, plan, kernel, grid, quad);
    emit(mcrd::h2_selection_to_json(sel), o.output_sink);
    return 0;
  }
  if (!(h2 > 0.0))
    throw mcrd::Error(mcrd::ErrorCode::InvalidInput, "--h2 must be positive (or use --h2-grid)");
  plan.h2 = h2;
  const mcrd::AteResult res = mcrd::ate_continuous(sample, sched, cf, plan, kernel, quad);
  emit(mcrd::ate_result_to_json(res), o.output_sink);
  return 0;
}

int cmd_weights(const std::string& schedule_path, const std::string& cf_path, int rho2, double h2,
                const std::string& kernel_name, const std::string& quad_path,
                const std::string& sink) {
  const mcrd::CutoffSchedule sched = mcrd::schedule_from_json(mcrd::load_json_file(schedule_path));
  const auto cf = mcrd::counterfactual_from_json(mcrd::load_json_file(cf_path));
  if (cf.is_discrete())
    throw mcrd::Error(mcrd::ErrorCode::InvalidInput,
                      "correction weights need a continuous counterfactual");
  mcrd::QuadratureConfig quad;
  if (!quad_path.empty()) quad = mcrd::quadrature_from_json(mcrd::load_json_file(quad_path));
  const mcrd::KernelSpec kernel = mcrd::kernel_from_name(kernel_name);
  const auto basis = mcrd::PolyBasis::make(cf.continuous().profile, rho2);
  const auto cw = mcrd::correction_weights(sched, cf.continuous(), basis, h2, kernel, quad);
  double total = 0.0;
  for (double v : cw.delta) total += v;
  emit(json{{"schema_version", mcrd::kSchemaVersion},
            {"delta", cw.delta},
            {"sum", total},
            {"h2", cw.h2},
            {"rho2", cw.rho2},
            {"nodes", cw.node_count},
            {"rule", cw.rule},
            {"est_error", cw.est_error},
            {"mass_deficit", cw.mass_deficit}},
       sink);
  return 0;
}

int cmd_fuzzy(const CommonOpts& o, const std::string& basis_path, const std::string& zf_path,
              const std::string& cf_path, int max_outer) {
  const mcrd::Sample sample = mcrd::Sample::from_csv_file(o.data_path);
  if (!sample.has_dose())
    throw mcrd::Error(mcrd::ErrorCode::InvalidInput,
                      "estimate-fuzzy requires a 'd' column in the data CSV");
  const mcrd::CutoffSchedule sched = mcrd::schedule_from_json(mcrd::load_json_file(o.schedule_path));
  const mcrd::KernelSpec kernel = mcrd::kernel_from_name(o.kernel);
  const mcrd::WBasis basis = mcrd::wbasis_from_json(mcrd::load_json_file(basis_path));

  Eigen::VectorXd zf;
  if (!zf_path.empty()) {
    const json zj = mcrd::load_json_file(zf_path);
    const auto values = zj.at("z").get<std::vector<double>>();
    zf = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
  } else if (!cf_path.empty()) {
    const auto cf = mcrd::counterfactual_from_json(mcrd::load_json_file(cf_path));
    if (cf.is_discrete())
      throw mcrd::Error(mcrd::ErrorCode::InvalidInput,
                        "Z(F) from a counterfactual needs a continuous one");
    zf = mcrd::zf_from_counterfactual(basis, cf.continuous());
  } else {
    throw mcrd::Error(mcrd::ErrorCode::InvalidInput, "provide --zf or --cf");
  }

  mcrd::FuzzyOptions opt;
  opt.lambda1 = o.lambda1;
  opt.max_outer = max_outer;
  const auto res = mcrd::iterate_mse_optimal(sample, sched, basis, zf, kernel, opt);
  emit(mcrd::fuzzy_result_to_json(res), o.output_sink);
  return 0;
}

int cmd_simulate(std::size_t n, int reps, const std::string& h1_mode, const std::string& h2_rule,
                 std::uint64_t seed, int threads, const std::string& sink,
                 const std::string& format) {
  mcrd::StudyConfig cfg;
  cfg.dgp.n = n;
  cfg.reps = reps;
  cfg.h1_mode = mcrd::h1_mode_from_name(h1_mode);
  cfg.seed = seed;
  cfg.threads = threads;
  if (threads == 0) {
    if (const char* env = std::getenv("MCRD_THREADS")) cfg.threads = std::atoi(env);
  }

  if (h2_rule.rfind("fixed:", 0) == 0) {
    cfg.h2_multipliers = {std::stod(h2_rule.substr(6))};
  } else if (h2_rule == "grid") {
    cfg.h2_multipliers.clear();
    for (int m = 3; m <= 12; ++m) cfg.h2_multipliers.push_back(m);
  } else if (h2_rule == "mse") {
    cfg.h2_multipliers.clear();
    for (int m = 3; m <= 12; ++m) cfg.h2_multipliers.push_back(m);
    cfg.select_h2_by_mse = true;
  } else {
    throw mcrd::Error(mcrd::ErrorCode::InvalidInput,
                      "--h2-rule must be fixed:<m>, grid, or mse");
  }

  const mcrd::McReport report = mcrd::run_study(cfg);
  if (format == "csv") {
    // one table row: n, K, then bias/variance/mse for the four estimators at
    // the first configured h2
    const double m0 = cfg.select_h2_by_mse ? 0.0 : cfg.h2_multipliers.front();
    const auto& mu = report.find("mu", m0);
    const auto& mu_bc = report.find("mu_bc", m0);
    const double inf = std::numeric_limits<double>::infinity();
    const auto& nv = report.find("naive", inf);
    const auto& nv_bc = report.find("naive_bc", inf);
    std::cout << "n,K,bias_mu,bias_mu_bc,bias_naive,bias_naive_bc,"
              << "var_mu,var_mu_bc,var_naive,var_naive_bc,"
              << "mse_mu,mse_mu_bc,mse_naive,mse_naive_bc\n";
    std::cout << report.n << ',' << report.K << ',' << mu.bias << ',' << mu_bc.bias << ','
              << nv.bias << ',' << nv_bc.bias << ',' << mu.variance << ',' << mu_bc.variance
              << ',' << nv.variance << ',' << nv_bc.variance << ',' << mu.mse << ','
              << mu_bc.mse << ',' << nv.mse << ',' << nv_bc.mse << '\n';
    if (!sink.empty()) {
      std::ofstream out(sink);
      out << mcrd::mc_report_to_json(report).dump(2) << '\n';
    }
  } else {
    emit(mcrd::mc_report_to_json(report), sink);
  }
  return 0;
}

int cmd_enumerate(int k, std::uint64_t cap, const std::string& sink) {
  const auto census = mcrd::enumerate_compliance(static_cast<std::size_t>(k), cap);
  json listing = json::array();
  for (const auto& [a, cls] : census.listing) {
    listing.push_back({{"u", a.u}, {"class", mcrd::compliance_name(cls)}});
  }
  emit(json{{"schema_version", mcrd::kSchemaVersion},
            {"K", k},
            {"never_changers", census.never_changers},
            {"ever_compliers", census.ever_compliers},
            {"ever_defiers", census.ever_defiers},
            {"listing", listing}},
       sink);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ATE estimation for regression discontinuity designs with many cutoffs"};
  app.require_subcommand(1);

  CommonOpts sd_opts, sc_opts, fz_opts;

  auto* sd = app.add_subcommand("estimate-sharp-discrete",
                                "weighted aggregate of cutoff jumps, discrete counterfactual");
  add_common(sd, sd_opts);
  std::string sd_weights;
  double sd_density_bw = 0.0;
  sd->add_option("--weights", sd_weights, "discrete counterfactual JSON (default: density weights)");
  sd->add_option("--density-bw", sd_density_bw, "KDE bandwidth for density weights");

  auto* sc = app.add_subcommand("estimate-sharp-continuous",
                                "correction-weighted aggregate, continuous counterfactual");
  add_common(sc, sc_opts);
  std::string sc_cf, sc_quad;
  int sc_rho2 = 1;
  double sc_h2 = 0.0;
  bool sc_grid = false;
  sc->add_option("--cf", sc_cf, "counterfactual JSON")->required();
  sc->add_option("--rho2", sc_rho2, "second-step polynomial order");
  sc->add_option("--h2", sc_h2, "second-step bandwidth");
  sc->add_flag("--h2-grid", sc_grid, "pick h2 on the default grid by estimated MSE");
  sc->add_option("--quadrature", sc_quad, "quadrature config JSON");

  auto* wt = app.add_subcommand("weights", "correction weights for a continuous counterfactual");
  std::string wt_schedule, wt_cf, wt_quad, wt_kernel = "triangular", wt_sink;
  int wt_rho2 = 1;
  double wt_h2 = 0.0;
  wt->add_option("--schedule", wt_schedule)->required();
  wt->add_option("--cf", wt_cf)->required();
  wt->add_option("--h2", wt_h2)->required();
  wt->add_option("--rho2", wt_rho2);
  wt->add_option("--kernel", wt_kernel);
  wt->add_option("--quadrature", wt_quad);
  wt->add_option("--output", wt_sink);

  auto* fz = app.add_subcommand("estimate-fuzzy",
                                "iterated parametric estimator for fuzzy assignment");
  add_common(fz, fz_opts);
  std::string fz_basis, fz_zf, fz_cf;
  int fz_max_outer = 100;
  fz->add_option("--wbasis", fz_basis, "effect-surface basis JSON")->required();
  fz->add_option("--zf", fz_zf, "precomputed Z(F) JSON {\"z\": [...]}");
  fz->add_option("--cf", fz_cf, "continuous counterfactual for Z(F)");
  fz->add_option("--max-outer", fz_max_outer);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the continuous-case pipeline");
  std::size_t sim_n = 1789;
  int sim_reps = 1000, sim_threads = 0;
  std::string sim_h1 = "overlap", sim_h2 = "fixed:3", sim_sink, sim_format = "json";
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  sim->add_option("--n", sim_n, "sample size")->required();
  sim->add_option("--reps", sim_reps, "replications")->required();
  sim->add_option("--h1-mode", sim_h1, "overlap|no_overlap|data_driven");
  sim->add_option("--h2-rule", sim_h2, "fixed:<m>, grid, or mse (in units of 1/(K+1))");
  sim->add_option("--seed", sim_seed, "base RNG seed")->required()->each([&](const std::string&) {
    sim_seed_set = true;
  });
  sim->add_option("--threads", sim_threads, "worker cap (0 = all cores)");
  sim->add_option("--output", sim_sink, "also write the JSON report here");
  sim->add_option("--format", sim_format, "json|csv");

  auto* en = app.add_subcommand("enumerate-compliance", "partition the potential assignments");
  int en_k = 2;
  std::uint64_t en_cap = 2'000'000;
  std::string en_sink;
  en->add_option("--k", en_k, "number of cutoffs")->required();
  en->add_option("--cap", en_cap, "enumeration cap");
  en->add_option("--output", en_sink);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sd->parsed()) return cmd_sharp_discrete(sd_opts, sd_weights, sd_density_bw);
    if (sc->parsed())
      return cmd_sharp_continuous(sc_opts, sc_cf, sc_rho2, sc_h2, sc_grid, sc_quad);
    if (wt->parsed())
      return cmd_weights(wt_schedule, wt_cf, wt_rho2, wt_h2, wt_kernel, wt_quad, wt_sink);
    if (fz->parsed()) return cmd_fuzzy(fz_opts, fz_basis, fz_zf, fz_cf, fz_max_outer);
    if (sim->parsed())
      return cmd_simulate(sim_n, sim_reps, sim_h1, sim_h2, sim_seed, sim_threads, sim_sink,
                          sim_format);
    if (en->parsed()) return cmd_enumerate(en_k, en_cap, en_sink);
  } catch (const mcrd::Error& e) {
    nlohmann::json err{{"error", mcrd::error_code_name(e.code())}, {"message", e.what()}};
    std::cerr << err.dump() << std::endl;
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "Unhandled"}, {"message", e.what()}}.dump()
              << std::endl;
    return 1;
  }
  return 2;
}
