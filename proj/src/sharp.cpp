#include "mcrd/sharp.hpp"

#include <cmath>
#include <limits>

#include "mcrd/error.hpp"

namespace mcrd {

SharpEngine::SharpEngine(const Sample& sample, const CutoffSchedule& sched, KernelSpec k,
                         int nn_neighbors)
    : SharpEngine(sort_sample(sample), sched, k, nn_neighbors) {}

SharpEngine::SharpEngine(SortedSample sorted, const CutoffSchedule& sched, KernelSpec k,
                         int nn_neighbors)
    : sorted_(std::move(sorted)), sched_(sched), kernel_(k) {
  sched_.check();
  eps2_ = nn_squared_residuals(sorted_, sched_, nn_neighbors);
  segment_.resize(sorted_.size());
  std::size_t j = 0;
  const std::size_t K = sched_.size();
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    while (j < K && sorted_.x[i] >= sched_.cutoffs[j].c) ++j;
    segment_[i] = static_cast<int>(j);
  }
}

void SharpEngine::prepare_order(int rho, const std::vector<double>& h1) {
  OrderState st;
  st.h1 = clip_bandwidths(sched_, h1);
  for (std::size_t j = 0; j < h1.size(); ++j) st.clipped = st.clipped || st.h1[j] != h1[j];

  BandwidthPlan plan;
  plan.h1 = st.h1;
  plan.rho1 = rho;
  st.jumps = jump_estimates(sorted_, sched_, plan, kernel_);

  const std::size_t K = sched_.size();
  const std::size_t n = sorted_.size();
  st.bhat.resize(static_cast<Eigen::Index>(K));
  st.psi_right.assign(n, 0.0);
  st.psi_left.assign(n, 0.0);

  const std::size_t p = static_cast<std::size_t>(rho) + 1;
  Eigen::VectorXd hu(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < K; ++j) {
    const JumpEstimate& je = st.jumps[j];
    st.bhat[static_cast<Eigen::Index>(j)] = je.value[0];
    const double c = sched_.cutoffs[j].c;
    const double h = st.h1[j];
    const double scale = 1.0 / (static_cast<double>(n) * h);

    const std::size_t right_lo = sorted_.lower_bound(c);
    const std::size_t right_hi = sorted_.lower_bound(c + h);
    for (std::size_t i = right_lo; i < right_hi; ++i) {
      const double u = (sorted_.x[i] - c) / h;
      const double w = kernel_eval(kernel_, u);
      if (w == 0.0) continue;
      double uu = 1.0;
      for (std::size_t r = 0; r < p; ++r) {
        hu[static_cast<Eigen::Index>(r)] = uu;
        uu *= u;
      }
      st.psi_right[i] = scale * w * je.right.e1_gram_inv.dot(hu);
    }

    const std::size_t left_lo = sorted_.lower_bound(std::nextafter(c - h, c));
    const std::size_t left_hi = right_lo;
    for (std::size_t i = left_lo; i < left_hi; ++i) {
      const double u = (sorted_.x[i] - c) / h;
      const double w = kernel_eval(kernel_, u);
      if (w == 0.0) continue;
      double uu = 1.0;
      for (std::size_t r = 0; r < p; ++r) {
        hu[static_cast<Eigen::Index>(r)] = uu;
        uu *= u;
      }
      st.psi_left[i] = -scale * w * je.left.e1_gram_inv.dot(hu);
    }
  }
  orders_[rho] = std::move(st);
}

const SharpEngine::OrderState& SharpEngine::state(int rho) const {
  auto it = orders_.find(rho);
  if (it == orders_.end())
    throw Error(ErrorCode::MissingGram,
                "order " + std::to_string(rho) + " has not been prepared");
  return it->second;
}

bool SharpEngine::has_order(int rho) const { return orders_.count(rho) > 0; }

const Eigen::VectorXd& SharpEngine::bhat(int rho) const { return state(rho).bhat; }

const std::vector<double>& SharpEngine::effective_h1(int rho) const { return state(rho).h1; }

bool SharpEngine::clipped(int rho) const { return state(rho).clipped; }

const std::vector<JumpEstimate>& SharpEngine::jumps(int rho) const { return state(rho).jumps; }

double SharpEngine::aggregate(int rho, const std::vector<double>& weights) const {
  const OrderState& st = state(rho);
  if (weights.size() != sched_.size())
    throw Error(ErrorCode::InvalidInput, "weight count does not match cutoff count");
  double mu = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j)
    mu += weights[j] * st.bhat[static_cast<Eigen::Index>(j)];
  return mu;
}

double SharpEngine::variance(int rho, const std::vector<double>& weights) const {
  const OrderState& st = state(rho);
  if (weights.size() != sched_.size())
    throw Error(ErrorCode::InvalidInput, "weight count does not match cutoff count");
  const int K = static_cast<int>(sched_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    const int s = segment_[i];
    double inner = 0.0;
    if (s >= 1) inner += weights[static_cast<std::size_t>(s - 1)] * st.psi_right[i];
    if (s < K) inner += weights[static_cast<std::size_t>(s)] * st.psi_left[i];
    if (inner != 0.0) acc += eps2_[i] * inner * inner;
  }
  return acc;
}

namespace {

std::array<double, 2> interval95(double mu, double variance) {
  const double half = 1.959963984540054 * std::sqrt(std::max(0.0, variance));
  return {mu - half, mu + half};
}

void check_discrete_weights(const std::vector<double>& w, std::size_t K) {
  if (w.size() != K)
    throw Error(ErrorCode::InvalidInput, "weights length does not match cutoff count");
  double total = 0.0;
  for (double v : w) {
    if (v < 0.0) throw Error(ErrorCode::InvalidInput, "weights must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidInput, "weights must sum to 1");
}

}  // namespace

AteResult ate_discrete(const Sample& sample, const CutoffSchedule& sched,
                       const std::vector<double>& weights, const BandwidthPlan& plan,
                       const KernelSpec& k) {
  check_discrete_weights(weights, sched.size());
  SharpEngine engine(sample, sched, k);
  engine.prepare_order(plan.rho1, plan.h1);
  engine.prepare_order(plan.rho1 + 1, plan.h1);

  AteResult res;
  res.mu = engine.aggregate(plan.rho1, weights);
  res.variance = engine.variance(plan.rho1, weights);
  res.mu_bc = engine.aggregate(plan.rho1 + 1, weights);
  res.variance_bc = engine.variance(plan.rho1 + 1, weights);
  res.ci95 = interval95(res.mu_bc, res.variance_bc);
  res.weights_used = weights;
  res.weights_used_bc = weights;
  res.bandwidths = plan;
  res.bandwidths.h1 = engine.effective_h1(plan.rho1);
  res.diag.clipped = engine.clipped(plan.rho1);
  res.diag.h1_effective = engine.effective_h1(plan.rho1);
  res.diag.ci95_uncorrected = interval95(res.mu, res.variance);
  return res;
}

double var_sharp(const Sample& sample, const CutoffSchedule& sched,
                 const std::vector<double>& weights, const BandwidthPlan& plan,
                 const KernelSpec& k, int rho) {
  SharpEngine engine(sample, sched, k);
  engine.prepare_order(rho, plan.h1);
  return engine.variance(rho, weights);
}

std::vector<std::string> rate_guidance_warnings(Profile profile, int rho2, std::size_t K,
                                                double h2) {
  std::vector<std::string> warnings;
  const int min_rho2 = profile == Profile::full ? 3 : (profile == Profile::dose_change ? 2 : 1);
  if (rho2 < min_rho2) {
    warnings.push_back("rho2=" + std::to_string(rho2) + " is below the rate guidance (" +
                       std::to_string(min_rho2) + ") for the " + profile_name(profile) +
                       " profile");
  }
  if (!std::isinf(h2)) {
    const double kh = static_cast<double>(K) * std::pow(h2, profile_dims(profile));
    if (kh < 1.0) {
      warnings.push_back("K * h2^dims = " + std::to_string(kh) +
                         " < 1: second-step neighborhoods are sparse");
    }
  }
  return warnings;
}

namespace {

AteResult ate_continuous_with_engine(SharpEngine& engine, const CutoffSchedule& sched,
                                     const ContinuousCf& cf, const BandwidthPlan& plan,
                                     const KernelSpec& k, const QuadratureConfig& quad) {
  const PolyBasis basis = PolyBasis::make(cf.profile, plan.rho2);
  const PolyBasis basis_bc = PolyBasis::make(cf.profile, plan.rho2 + 1);
  const CorrectionWeights cw = correction_weights(sched, cf, basis, plan.h2, k, quad);
  const CorrectionWeights cw_bc = correction_weights(sched, cf, basis_bc, plan.h2, k, quad);

  if (!engine.has_order(plan.rho1)) engine.prepare_order(plan.rho1, plan.h1);
  if (!engine.has_order(plan.rho1 + 1)) engine.prepare_order(plan.rho1 + 1, plan.h1);

  AteResult res;
  res.mu = engine.aggregate(plan.rho1, cw.delta);
  res.variance = engine.variance(plan.rho1, cw.delta);
  res.mu_bc = engine.aggregate(plan.rho1 + 1, cw_bc.delta);
  res.variance_bc = engine.variance(plan.rho1 + 1, cw_bc.delta);
  res.ci95 = interval95(res.mu_bc, res.variance_bc);
  res.weights_used = cw.delta;
  res.weights_used_bc = cw_bc.delta;
  res.bandwidths = plan;
  res.bandwidths.h1 = engine.effective_h1(plan.rho1);
  res.diag.clipped = engine.clipped(plan.rho1);
  res.diag.h1_effective = engine.effective_h1(plan.rho1);
  res.diag.quadrature_error = std::max(cw.est_error, cw_bc.est_error);
  res.diag.quadrature_mass_deficit = std::max(cw.mass_deficit, cw_bc.mass_deficit);
  res.diag.ci95_uncorrected = interval95(res.mu, res.variance);
  res.diag.warnings = rate_guidance_warnings(cf.profile, plan.rho2, sched.size(), plan.h2);
  return res;
}

}  // namespace

AteResult ate_continuous(const Sample& sample, const CutoffSchedule& sched,
                         const CounterfactualSpec& cf, const BandwidthPlan& plan,
                         const KernelSpec& k, const QuadratureConfig& quad) {
  if (cf.is_discrete())
    throw Error(ErrorCode::InvalidInput, "ate_continuous requires a continuous counterfactual");
  SharpEngine engine(sample, sched, k);
  return ate_continuous_with_engine(engine, sched, cf.continuous(), plan, k, quad);
}

std::vector<double> default_h2_grid(std::size_t n_cutoffs) {
  std::vector<double> grid;
  for (int m = 3; m <= 12; ++m)
    grid.push_back(static_cast<double>(m) / (static_cast<double>(n_cutoffs) + 1.0));
  return grid;
}

H2Selection select_h2(const Sample& sample, const CutoffSchedule& sched,
                      const CounterfactualSpec& cf, const BandwidthPlan& plan_without_h2,
                      const KernelSpec& k, const std::vector<double>& grid,
                      const QuadratureConfig& quad) {
  if (grid.empty()) throw Error(ErrorCode::InvalidInput, "h2 grid is empty");
  if (cf.is_discrete())
    throw Error(ErrorCode::InvalidInput, "select_h2 requires a continuous counterfactual");

  SharpEngine engine(sample, sched, k);
  H2Selection sel;
  sel.curve.reserve(grid.size());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = grid.size();

  for (double h2 : grid) {
    H2GridPoint pt;
    pt.h2 = h2;
    BandwidthPlan plan = plan_without_h2;
    plan.h2 = h2;
    try {
      AteResult r = ate_continuous_with_engine(engine, sched, cf.continuous(), plan, k, quad);
      pt.mu = r.mu;
      pt.mu_bc = r.mu_bc;
      pt.vhat = r.variance;
      pt.mse = (r.mu - r.mu_bc) * (r.mu - r.mu_bc) + r.variance;
      pt.feasible = true;
    } catch (const Error& e) {
      pt.failure = e.what();
    }
    sel.curve.push_back(pt);
    if (pt.feasible && pt.mse < best) {
      best = pt.mse;
      best_idx = sel.curve.size() - 1;
    }
  }
  if (best_idx == grid.size())
    throw Error(ErrorCode::AllGridPointsInfeasible, "no h2 grid point produced an estimate");

  sel.h2_star = grid[best_idx];
  BandwidthPlan plan = plan_without_h2;
  plan.h2 = sel.h2_star;
  sel.result = ate_continuous_with_engine(engine, sched, cf.continuous(), plan, k, quad);
  return sel;
}

}  // namespace mcrd
