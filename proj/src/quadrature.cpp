#include "mcrd/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "mcrd/error.hpp"

namespace mcrd {

void gauss_legendre(int s, std::vector<double>& nodes, std::vector<double>& weights) {
  if (s < 1) throw Error(ErrorCode::InvalidInput, "quadrature order must be >= 1");
  nodes.assign(static_cast<std::size_t>(s), 0.0);
  weights.assign(static_cast<std::size_t>(s), 0.0);
  const int m = (s + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev-angle initial guess.
    double z = std::cos(M_PI * (i + 0.75) / (s + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < s; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = s * (z * p0 - p1) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p0 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -z;
    nodes[static_cast<std::size_t>(s - 1 - i)] = z;
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(s - 1 - i)] = w;
  }
}

Quadrature1D composite_gauss_legendre(double lo, double hi, const std::vector<double>& breakpoints,
                                      int nodes_per_panel, int min_panels) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidInput, "empty quadrature interval");
  std::vector<double> edges{lo, hi};
  for (double b : breakpoints) {
    if (b > lo && b < hi) edges.push_back(b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [&](double a, double b) { return b - a < 1e-14 * (hi - lo); }),
              edges.end());

  // Split the widest panels until the panel budget is met.
  while (static_cast<int>(edges.size()) - 1 < min_panels) {
    std::size_t widest = 0;
    double width = 0.0;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      if (edges[e + 1] - edges[e] > width) {
        width = edges[e + 1] - edges[e];
        widest = e;
      }
    }
    edges.insert(edges.begin() + static_cast<std::ptrdiff_t>(widest) + 1,
                 0.5 * (edges[widest] + edges[widest + 1]));
  }

  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(nodes_per_panel, gl_nodes, gl_weights);

  Quadrature1D q;
  q.nodes.reserve((edges.size() - 1) * gl_nodes.size());
  q.weights.reserve((edges.size() - 1) * gl_nodes.size());
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e], b = edges[e + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t t = 0; t < gl_nodes.size(); ++t) {
      q.nodes.push_back(mid + half * gl_nodes[t]);
      q.weights.push_back(half * gl_weights[t]);
    }
  }
  return q;
}

}  // namespace mcrd
