#pragma once

#include <vector>

#include "decster/rng.hpp"

namespace decster {

// Rectangular 2D search region. Positions satisfy x in [0, width],
// y in [0, length].
struct SearchSpace {
  double width = 16.0;
  double length = 16.0;
};

// Position + velocity of a single target, in grid units.
struct TargetState {
  double px = 0.0;
  double py = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

// Finite set of target states. Elements carry no identities; ordering is an
// implementation detail and never significant.
using TargetSet = std::vector<TargetState>;

// One axis-aligned square tile of the hierarchical sensing lattice.
// Membership is half-open in both axes except at the far edges of the search
// space, where the tile is closed so that tiles of each scale partition the
// closed space.
struct SensingAction {
  double origin_x = 0.0;
  double origin_y = 0.0;
  int scale = 1;
  double clutter_rate = 0.0;  // expected false positives per observation
  bool closed_right = false;
  bool closed_top = false;

  double area() const { return static_cast<double>(scale) * scale; }

  bool contains(double x, double y) const {
    const double s = static_cast<double>(scale);
    const bool in_x =
        x >= origin_x && (x < origin_x + s || (closed_right && x == origin_x + s));
    const bool in_y =
        y >= origin_y && (y < origin_y + s || (closed_top && y == origin_y + s));
    return in_x && in_y;
  }
};

inline bool action_contains(const SensingAction& action, const TargetState& state) {
  return action.contains(state.px, state.py);
}

// Full tiled action lattice, ordered by (scale ascending, origin row-major).
struct ActionSpace {
  std::vector<SensingAction> actions;
};

// Builds every tile of each scale over the space. Each scale must divide both
// space dimensions; scales and clutter_rates pair up positionally.
ActionSpace build_action_space(const SearchSpace& space,
                               const std::vector<int>& scales,
                               const std::vector<double>& clutter_rates);

}  // namespace decster
