#include "mcrd/correction_weights.hpp"

#include <cmath>
#include <limits>

#include "cf_nodes.hpp"
#include "mcrd/error.hpp"

namespace mcrd {

double local_weight(const Cutoff& cj, const CfPoint& at, Profile profile, double h2,
                    const KernelSpec& k) {
  if (std::isinf(h2)) return 1.0;
  const CfPoint cc = cutoff_coordinates(cj, profile);
  const int dims = profile_dims(profile);
  double w = 1.0;
  for (int a = 0; a < dims; ++a) {
    w *= kernel_eval(k, (cc[static_cast<std::size_t>(a)] - at[static_cast<std::size_t>(a)]) / h2);
    if (w == 0.0) return 0.0;
  }
  return w;
}

namespace {

struct LocalSolve {
  std::vector<int> active;        // cutoff indices with positive weight
  std::vector<double> weight;     // their kernel weights
  Eigen::MatrixXd basis_reduced;  // |active| x J_eff rescaled basis rows
  Eigen::VectorXd y;              // solves (D'D) y = e1 over kept columns
};

/// Weighted design at one evaluation point, with identically-zero columns
/// (from pinned coordinates) removed before the solve.
LocalSolve solve_local_design(const CutoffSchedule& sched, const PolyBasis& basis, double h2,
                              const KernelSpec& k, const CfPoint& at) {
  const std::size_t K = sched.size();
  const int J = basis.size();
  const double scale = std::isinf(h2) ? 1.0 : 1.0 / h2;

  LocalSolve out;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(K), J);
  for (std::size_t j = 0; j < K; ++j) {
    const double w = local_weight(sched.cutoffs[j], at, basis.profile, h2, k);
    if (w <= 0.0) continue;
    const CfPoint cc = cutoff_coordinates(sched.cutoffs[j], basis.profile);
    const std::array<double, 3> diff{(cc[0] - at[0]) * scale, (cc[1] - at[1]) * scale,
                                     (cc[2] - at[2]) * scale};
    rows.row(static_cast<Eigen::Index>(out.active.size())) = basis.eval(diff).transpose();
    out.active.push_back(static_cast<int>(j));
    out.weight.push_back(w);
  }
  const Eigen::Index na = static_cast<Eigen::Index>(out.active.size());

  // Columns that vanish across every active row carry no information; they
  // arise when a coordinate is pinned by the counterfactual support.
  std::vector<int> keep;
  for (int t = 0; t < J; ++t) {
    double mx = 0.0;
    for (Eigen::Index r = 0; r < na; ++r) mx = std::max(mx, std::abs(rows(r, t)));
    if (t == 0 || mx > 1e-14) keep.push_back(t);
  }
  const Eigen::Index jeff = static_cast<Eigen::Index>(keep.size());
  if (na < jeff)
    throw Error(ErrorCode::SingularLocalDesign,
                "only " + std::to_string(na) + " cutoffs carry weight near (" +
                    std::to_string(at[0]) + ", " + std::to_string(at[1]) + ", " +
                    std::to_string(at[2]) + "), basis needs " + std::to_string(jeff));

  out.basis_reduced.resize(na, jeff);
  for (Eigen::Index t = 0; t < jeff; ++t)
    out.basis_reduced.col(t) = rows.col(keep[static_cast<std::size_t>(t)]).head(na);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(jeff, jeff);
  for (Eigen::Index r = 0; r < na; ++r) {
    gram.noalias() += out.weight[static_cast<std::size_t>(r)] *
                      out.basis_reduced.row(r).transpose() * out.basis_reduced.row(r);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible() || !(lu.rcond() > 1e-13))
    throw Error(ErrorCode::SingularLocalDesign,
                "rank-deficient local design at (" + std::to_string(at[0]) + ", " +
                    std::to_string(at[1]) + ", " + std::to_string(at[2]) + ")");
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(jeff);
  e1[0] = 1.0;
  out.y = lu.solve(e1);
  return out;
}

}  // namespace

Eigen::VectorXd local_fit_row(const CutoffSchedule& sched, const PolyBasis& basis, double h2,
                              const KernelSpec& k, const CfPoint& at) {
  const LocalSolve ls = solve_local_design(sched, basis, h2, k, at);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sched.size()));
  for (std::size_t r = 0; r < ls.active.size(); ++r) {
    row[ls.active[r]] = ls.weight[r] * ls.basis_reduced.row(static_cast<Eigen::Index>(r)).dot(ls.y);
  }
  return row;
}

double local_beta_fit(const Eigen::VectorXd& bhat, const CutoffSchedule& sched,
                      const PolyBasis& basis, double h2, const KernelSpec& k, const CfPoint& at) {
  if (bhat.size() != static_cast<Eigen::Index>(sched.size()))
    throw Error(ErrorCode::InvalidInput, "bhat length does not match cutoff count");
  return local_fit_row(sched, basis, h2, k, at).dot(bhat);
}

namespace {

std::vector<double> kink_breakpoints(const CutoffSchedule& sched, double h2) {
  std::vector<double> brk;
  if (std::isinf(h2)) return brk;
  brk.reserve(sched.size() * 3);
  for (const auto& cj : sched.cutoffs) {
    brk.push_back(cj.c);
    brk.push_back(cj.c - h2);
    brk.push_back(cj.c + h2);
  }
  return brk;
}

bool near_support_boundary(const ContinuousCf& cf, const CfPoint& at, double h2) {
  const int dims = profile_dims(cf.profile);
  for (int a = 0; a < dims; ++a) {
    const Interval& iv = cf.support[static_cast<std::size_t>(a)];
    if (iv.degenerate()) continue;
    if (at[static_cast<std::size_t>(a)] - iv.lo < h2 || iv.hi - at[static_cast<std::size_t>(a)] < h2)
      return true;
  }
  return false;
}

}  // namespace

CorrectionWeights correction_weights(const CutoffSchedule& sched, const ContinuousCf& cf,
                                     const PolyBasis& basis, double h2, const KernelSpec& k,
                                     const QuadratureConfig& quad) {
  sched.check();
  if (!cf.density) throw Error(ErrorCode::InvalidInput, "continuous counterfactual lacks density");
  if (!(h2 > 0.0)) throw Error(ErrorCode::InvalidInput, "h2 must be positive");
  if (cf.profile != basis.profile)
    throw Error(ErrorCode::InvalidInput, "basis and counterfactual profiles differ");

  const std::size_t K = sched.size();
  const auto brk = kink_breakpoints(sched, h2);

  double mass_deficit = 0.0;
  std::size_t nodes = 0;
  auto integrate = [&](bool refined) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    detail::cf_for_each_node(cf, quad, refined, brk, [&](const CfPoint& at, double w) {
      ++nodes;
      const double dens = cf.density(at);
      if (dens == 0.0) return;
      try {
        delta.noalias() += (w * dens) * local_fit_row(sched, basis, h2, k, at);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SingularLocalDesign && quad.drop_boundary_singular &&
            near_support_boundary(cf, at, h2)) {
          mass_deficit += w * dens;
          return;
        }
        throw;
      }
    });
    return delta;
  };

  Eigen::VectorXd coarse = integrate(false);
  Eigen::VectorXd fine = coarse;
  double est_error = 0.0;
  if (quad.refine) {
    nodes = 0;
    fine = integrate(true);
    est_error = (fine - coarse).cwiseAbs().maxCoeff();
    const double tol = 1e-3 * std::max(1.0, fine.cwiseAbs().sum());
    if (est_error > tol)
      throw Error(ErrorCode::QuadratureDivergence,
                  "refined correction weights moved by " + std::to_string(est_error));
  }

  CorrectionWeights out;
  out.delta.assign(fine.data(), fine.data() + fine.size());
  out.h2 = h2;
  out.rho2 = basis.rho2;
  out.node_count = nodes;
  out.rule = quad.rule;
  out.est_error = est_error;
  out.mass_deficit = mass_deficit;
  for (double v : out.delta) {
    if (!std::isfinite(v))
      throw Error(ErrorCode::QuadratureDivergence, "non-finite correction weight");
  }
  return out;
}

}  // namespace mcrd
