#pragma once

#include <functional>
#include <vector>

#include "mcrd/counterfactual.hpp"

namespace mcrd::detail {

/// Visits every tensor-product quadrature node of the counterfactual support
/// with its weight. `breakpoints_c` feeds kink-aligned panels along the
/// cutoff coordinate; `refined` doubles the panel count.
void cf_for_each_node(const ContinuousCf& cf, const QuadratureConfig& quad, bool refined,
                      const std::vector<double>& breakpoints_c,
                      const std::function<void(const CfPoint&, double)>& visit);

}  // namespace mcrd::detail
