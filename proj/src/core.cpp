#include "decster/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decster {

ActionSpace build_action_space(const SearchSpace& space,
                               const std::vector<int>& scales,
                               const std::vector<double>& clutter_rates) {
  if (space.width <= 0.0 || space.length <= 0.0)
    throw std::invalid_argument("build_action_space: space dimensions must be positive");
  if (scales.size() != clutter_rates.size())
    throw std::invalid_argument("build_action_space: scales and clutter_rates differ in length");
  if (scales.empty())
    throw std::invalid_argument("build_action_space: at least one scale required");

  std::vector<std::pair<int, double>> levels;
  levels.reserve(scales.size());
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const int s = scales[i];
    if (s <= 0) throw std::invalid_argument("build_action_space: scale must be positive");
    const double cols = space.width / s;
    const double rows = space.length / s;
    if (cols != std::floor(cols) || rows != std::floor(rows))
      throw std::invalid_argument("build_action_space: scale does not divide space dimensions");
    levels.emplace_back(s, clutter_rates[i]);
  }
  std::sort(levels.begin(), levels.end());

  ActionSpace out;
  for (const auto& [s, lambda] : levels) {
    const int cols = static_cast<int>(space.width) / s;
    const int rows = static_cast<int>(space.length) / s;
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        SensingAction a;
        a.origin_x = static_cast<double>(col) * s;
        a.origin_y = static_cast<double>(row) * s;
        a.scale = s;
        a.clutter_rate = lambda;
        a.closed_right = (col == cols - 1);
        a.closed_top = (row == rows - 1);
        out.actions.push_back(a);
      }
    }
  }
  return out;
}

}  // namespace decster
