#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace mcrd {

/// Dimension profile of the treatment-effect function over (c, d, d'):
///   full        — beta depends on the whole triple;
///   cutoff_only — beta depends on c alone (binary-treatment case);
///   dose_change — beta depends on (c, u) with u = d' - d.
enum class Profile { full, cutoff_only, dose_change };

/// Centered polynomial basis used by the second-step local regressions.
/// Exponent triples (g1,g2,g3) satisfy |g| <= rho2 and min{g2,g3} = 0; the
/// profile zeroes out unused components. The first element is the constant.
struct PolyBasis {
  int rho2 = 1;
  Profile profile = Profile::cutoff_only;
  std::vector<std::array<int, 3>> exponents;

  int size() const { return static_cast<int>(exponents.size()); }

  static PolyBasis make(Profile profile, int rho2);

  /// Evaluates every basis polynomial at the (already rescaled) coordinate
  /// difference between a cutoff triple and the evaluation point.
  Eigen::VectorXd eval(const std::array<double, 3>& diff) const;
};

const char* profile_name(Profile p);
Profile profile_from_name(const std::string& name);

/// Number of coordinates the profile actually uses (1, 2, or 3).
int profile_dims(Profile p);

}  // namespace mcrd
