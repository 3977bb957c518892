#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mcrd {

/// Composite Gauss–Legendre configuration for the correction-weight
/// integrals. `nodes_per_dim` is the total budget along one dimension,
/// split into panels of `nodes_per_panel` points. When `kink_aligned` is
/// set, panel boundaries additionally snap to the points where a cutoff
/// enters or leaves the h2 window, which makes the integrand smooth within
/// every panel. `refine` reruns with doubled panels to estimate error.
struct QuadratureConfig {
  int nodes_per_dim = 64;
  int nodes_per_panel = 8;
  bool kink_aligned = true;
  bool refine = true;
  bool drop_boundary_singular = false;
  std::string rule = "gauss-legendre";
};

/// Nodes/weights of an s-point Gauss–Legendre rule on [-1, 1].
void gauss_legendre(int s, std::vector<double>& nodes, std::vector<double>& weights);

/// Composite rule over [lo, hi] with the given interior breakpoints merged in.
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Quadrature1D composite_gauss_legendre(double lo, double hi, const std::vector<double>& breakpoints,
                                      int nodes_per_panel, int min_panels);

}  // namespace mcrd
