#include "mcrd/mc.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "mcrd/bandwidth.hpp"
#include "mcrd/correction_weights.hpp"
#include "mcrd/error.hpp"
#include "mcrd/rng.hpp"
#include "mcrd/sharp.hpp"

namespace mcrd {

int DgpConfig::cutoff_count() const {
  if (K > 0) return K;
  return static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.4)));
}

CutoffSchedule DgpConfig::schedule() const {
  const int kk = cutoff_count();
  CutoffSchedule sched;
  sched.x_min = 0.0;
  sched.x_max = 1.0;
  sched.cutoffs.resize(static_cast<std::size_t>(kk));
  for (int j = 1; j <= kk; ++j) {
    sched.cutoffs[static_cast<std::size_t>(j - 1)] = {
        static_cast<double>(j) / (kk + 1.0), d0 + (j - 1) * dose_step, d0 + j * dose_step};
  }
  return sched;
}

double DgpConfig::phi_at(double x) const {
  return ((phi[0] * x + phi[1]) * x + phi[2]) * x + phi[3];
}

double DgpConfig::dose_at(double x) const {
  const int kk = cutoff_count();
  const double spacing = 1.0 / (kk + 1.0);
  int below = static_cast<int>(std::floor(x / spacing));
  below = std::min(below, kk);
  return d0 + below * dose_step;
}

double DgpConfig::true_mu() const {
  // unit dose increase: the estimand is the integral of phi over [0,1]
  return phi[0] / 4.0 + phi[1] / 3.0 + phi[2] / 2.0 + phi[3];
}

Sample draw_sample(const DgpConfig& cfg, std::uint64_t seed, std::uint64_t rep) {
  RngStream rng(seed, rep);
  Sample s;
  s.x.resize(cfg.n);
  s.y.resize(cfg.n);
  s.d.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double x = rng.uniform01();
    const double dose = cfg.dose_at(x);
    s.x[i] = x;
    s.d[i] = dose;
    s.y[i] = cfg.phi_at(x) * dose + rng.normal();
  }
  return s;
}

H1Mode h1_mode_from_name(const std::string& name) {
  if (name == "overlap") return H1Mode::overlap;
  if (name == "no_overlap" || name == "no-overlap") return H1Mode::no_overlap;
  if (name == "data_driven" || name == "data-driven" || name == "ik") return H1Mode::data_driven;
  throw Error(ErrorCode::InvalidInput, "unknown h1 mode: " + name);
}

const char* h1_mode_name(H1Mode mode) {
  switch (mode) {
    case H1Mode::overlap: return "overlap";
    case H1Mode::no_overlap: return "no_overlap";
    case H1Mode::data_driven: return "data_driven";
  }
  return "?";
}

const EstimatorStats& McReport::find(const std::string& estimator, double h2_multiplier) const {
  const double target = h2_multiplier <= 0.0
                            ? h2_multiplier
                            : h2_multiplier / (static_cast<double>(K) + 1.0);
  for (const auto& st : stats) {
    if (st.estimator != estimator) continue;
    if (std::isinf(target) && std::isinf(st.h2)) return st;
    if (std::abs(st.h2 - target) < 1e-12) return st;
  }
  throw Error(ErrorCode::InvalidInput,
              "no stats entry for " + estimator + " at multiplier " +
                  std::to_string(h2_multiplier));
}

namespace {

struct CellRecord {
  double mu = 0.0;
  double vhat = 0.0;
  bool ok = false;
};

struct RepOutcome {
  std::vector<CellRecord> cells;
  bool failed = false;
  ErrorCode code = ErrorCode::InvalidInput;
  std::string message;
};

}  // namespace

McReport run_study(const StudyConfig& cfg) {
  if (cfg.reps < 1) throw Error(ErrorCode::InvalidInput, "reps must be >= 1");
  const int K = cfg.dgp.cutoff_count();
  const CutoffSchedule sched = cfg.dgp.schedule();
  const double spacing = 1.0 / (K + 1.0);
  const double true_mu = cfg.dgp.true_mu();

  std::vector<double> grid;
  for (double m : cfg.h2_multipliers) grid.push_back(m * spacing);
  if (grid.empty()) throw Error(ErrorCode::InvalidInput, "empty h2 grid");

  // Correction weights depend only on (schedule, h2, order); one computation
  // serves every replication.
  const ContinuousCf cf = uniform_cf(
      Profile::cutoff_only, {Interval{0.0, 1.0}, Interval{0.0, 0.0}, Interval{0.0, 0.0}});
  const PolyBasis basis1 = PolyBasis::make(Profile::cutoff_only, 1);
  const PolyBasis basis2 = PolyBasis::make(Profile::cutoff_only, 2);
  std::vector<std::vector<double>> delta1(grid.size()), delta2(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    delta1[g] = correction_weights(sched, cf, basis1, grid[g], cfg.kernel, cfg.quad).delta;
    delta2[g] = correction_weights(sched, cf, basis2, grid[g], cfg.kernel, cfg.quad).delta;
  }
  const std::vector<double> naive_w(static_cast<std::size_t>(K), 1.0 / K);

  // cell layout: per grid point mu/mu_bc (or one slot each under MSE
  // selection), then the naive pair
  const std::size_t grid_cells = cfg.select_h2_by_mse ? 1 : grid.size();
  const std::size_t cells_total = 2 * grid_cells + 2;

  auto run_rep = [&](int rep, RepOutcome& out) {
    out.cells.assign(cells_total, CellRecord{});
    try {
      const Sample sample = draw_sample(cfg.dgp, cfg.seed, static_cast<std::uint64_t>(rep));
      SortedSample sorted = sort_sample(sample);

      std::vector<double> h1(static_cast<std::size_t>(K), spacing);
      if (cfg.h1_mode == H1Mode::no_overlap) {
        for (auto& h : h1) h = 0.5 * spacing;
      } else if (cfg.h1_mode == H1Mode::data_driven) {
        const std::vector<double> h_ik =
            ik_bandwidths_per_cutoff(sorted, sched, cfg.kernel, {});
        h1 = rate_adjust(h_ik, sample.size(), cfg.lambda1);
        h1 = clip_bandwidths(sched, h1);
      }

      SharpEngine engine(std::move(sorted), sched, cfg.kernel);
      engine.prepare_order(1, h1);
      engine.prepare_order(2, h1);

      if (cfg.select_h2_by_mse) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_g = grid.size();
        std::vector<double> mu(grid.size()), mubc(grid.size()), v(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) {
          mu[g] = engine.aggregate(1, delta1[g]);
          mubc[g] = engine.aggregate(2, delta2[g]);
          v[g] = engine.variance(1, delta1[g]);
          const double mse = (mu[g] - mubc[g]) * (mu[g] - mubc[g]) + v[g];
          if (mse < best) {
            best = mse;
            best_g = g;
          }
        }
        out.cells[0] = {mu[best_g], v[best_g], true};
        out.cells[1] = {mubc[best_g], engine.variance(2, delta2[best_g]), true};
      } else {
        for (std::size_t g = 0; g < grid.size(); ++g) {
          out.cells[2 * g] = {engine.aggregate(1, delta1[g]), engine.variance(1, delta1[g]),
                              true};
          out.cells[2 * g + 1] = {engine.aggregate(2, delta2[g]),
                                  engine.variance(2, delta2[g]), true};
        }
      }
      out.cells[2 * grid_cells] = {engine.aggregate(1, naive_w), engine.variance(1, naive_w),
                                   true};
      out.cells[2 * grid_cells + 1] = {engine.aggregate(2, naive_w),
                                       engine.variance(2, naive_w), true};
    } catch (const Error& e) {
      out.failed = true;
      out.code = e.code();
      out.message = e.what();
    }
  };

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.reps));
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.reps));
  if (workers <= 1) {
    for (int rep = 0; rep < cfg.reps; ++rep) run_rep(rep, outcomes[static_cast<std::size_t>(rep)]);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      while (true) {
        const int rep = next.fetch_add(1);
        if (rep >= cfg.reps) break;
        run_rep(rep, outcomes[static_cast<std::size_t>(rep)]);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  int failed = 0;
  std::string first_failure;
  ErrorCode first_code = ErrorCode::InvalidInput;
  for (const auto& oc : outcomes) {
    if (oc.failed) {
      if (failed == 0) {
        first_failure = oc.message;
        first_code = oc.code;
      }
      ++failed;
    }
  }
  if (failed > 0 && static_cast<double>(failed) >= 0.001 * cfg.reps)
    throw Error(first_code, "replication failures above the 0.1% budget (" +
                                std::to_string(failed) + "/" + std::to_string(cfg.reps) +
                                "): " + first_failure);

  McReport report;
  report.n = cfg.dgp.n;
  report.K = K;
  report.reps = cfg.reps;
  report.h1_mode = h1_mode_name(cfg.h1_mode);
  report.seed = cfg.seed;
  report.true_mu = true_mu;
  report.failed_reps = failed;

  auto summarize = [&](const std::string& name, double h2, std::size_t cell) {
    EstimatorStats st;
    st.estimator = name;
    st.h2 = h2;
    double sum = 0.0, count = 0.0;
    for (const auto& oc : outcomes) {
      if (oc.failed) continue;
      sum += oc.cells[cell].mu;
      count += 1.0;
    }
    const double mean = sum / count;
    double ss = 0.0, cover = 0.0, len = 0.0, vsum = 0.0;
    for (const auto& oc : outcomes) {
      if (oc.failed) continue;
      const auto& cr = oc.cells[cell];
      ss += (cr.mu - mean) * (cr.mu - mean);
      const double half = 1.959963984540054 * std::sqrt(std::max(0.0, cr.vhat));
      if (std::abs(cr.mu - true_mu) <= half) cover += 1.0;
      len += 2.0 * half;
      vsum += cr.vhat;
    }
    st.bias = mean - true_mu;
    st.variance = ss / count;
    st.mse = st.bias * st.bias + st.variance;
    st.coverage = cover / count;
    st.avg_ci_length = len / count;
    st.mean_vhat = vsum / count;
    report.stats.push_back(st);
  };

  if (cfg.select_h2_by_mse) {
    summarize("mu", 0.0, 0);
    summarize("mu_bc", 0.0, 1);
  } else {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      summarize("mu", grid[g], 2 * g);
      summarize("mu_bc", grid[g], 2 * g + 1);
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  summarize("naive", inf, 2 * grid_cells);
  summarize("naive_bc", inf, 2 * grid_cells + 1);
  return report;
}

}  // namespace mcrd
