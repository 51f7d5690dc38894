#pragma once

#include <vector>

namespace decster::detail {

// Exact minimum-cost assignment of every row to a distinct column via the
// Hungarian algorithm with potentials. Requires rows <= cols; O(n^2 m).
double min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace decster::detail
