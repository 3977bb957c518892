#include "mcrd/poly_basis.hpp"

#include <algorithm>

#include "mcrd/error.hpp"

namespace mcrd {

PolyBasis PolyBasis::make(Profile profile, int rho2) {
  if (rho2 < 0) throw Error(ErrorCode::InvalidInput, "rho2 must be non-negative");
  PolyBasis basis;
  basis.rho2 = rho2;
  basis.profile = profile;
  // Constant first, then graded lexicographic by total degree.
  for (int total = 0; total <= rho2; ++total) {
    for (int g1 = total; g1 >= 0; --g1) {
      const int rest = total - g1;
      switch (profile) {
        case Profile::cutoff_only:
          if (rest == 0) basis.exponents.push_back({g1, 0, 0});
          break;
        case Profile::dose_change:
          basis.exponents.push_back({g1, rest, 0});
          break;
        case Profile::full:
          for (int g2 = rest; g2 >= 0; --g2) {
            const int g3 = rest - g2;
            if (std::min(g2, g3) != 0) continue;
            basis.exponents.push_back({g1, g2, g3});
          }
          break;
      }
    }
  }
  return basis;
}

Eigen::VectorXd PolyBasis::eval(const std::array<double, 3>& diff) const {
  Eigen::VectorXd out(size());
  for (int t = 0; t < size(); ++t) {
    const auto& g = exponents[static_cast<std::size_t>(t)];
    double v = 1.0;
    for (int r = 0; r < g[0]; ++r) v *= diff[0];
    for (int r = 0; r < g[1]; ++r) v *= diff[1];
    for (int r = 0; r < g[2]; ++r) v *= diff[2];
    out[t] = v;
  }
  return out;
}

const char* profile_name(Profile p) {
  switch (p) {
    case Profile::full: return "full";
    case Profile::cutoff_only: return "cutoff_only";
    case Profile::dose_change: return "dose_change";
  }
  return "?";
}

Profile profile_from_name(const std::string& name) {
  if (name == "full") return Profile::full;
  if (name == "cutoff_only" || name == "cutoff-only") return Profile::cutoff_only;
  if (name == "dose_change" || name == "dose-change") return Profile::dose_change;
  throw Error(ErrorCode::InvalidInput, "unknown profile: " + name);
}

int profile_dims(Profile p) {
  switch (p) {
    case Profile::full: return 3;
    case Profile::cutoff_only: return 1;
    case Profile::dose_change: return 2;
  }
  return 0;
}

}  // namespace mcrd
