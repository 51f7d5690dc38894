#pragma once

#include <array>
#include <ostream>
#include <vector>

#include "decster/core.hpp"
#include "decster/rng.hpp"

namespace decster {

using Mat4 = std::array<std::array<double, 4>, 4>;

// Linear-Gaussian target motion: x' = F x + eps, eps ~ N(0, Q).
struct MotionModel {
  Mat4 transition{{{1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
  Mat4 process_noise_cov{{{0.03, 0, 0.05, 0},
                          {0, 0.03, 0, 0.05},
                          {0.05, 0, 0.1, 0},
                          {0, 0.05, 0, 0.1}}};
  double step = 1.0;
  double survival_prob = 1.0;
};

// Lower-triangular Cholesky factor of a 4x4 PSD matrix. Zero (or numerically
// negative) pivots produce zero rows rather than failing, so Q = 0 is valid.
Mat4 cholesky4(const Mat4& m);

// Linear position sensor: z = H x + omega, omega ~ N(0, noise_std^2 I).
struct SensorModel {
  std::array<std::array<double, 4>, 2> projection{{{1, 0, 0, 0}, {0, 1, 0, 0}}};
  double noise_std = 0.1;
  double detection_prob = 0.9;

  std::array<double, 2> project(const TargetState& x) const {
    const std::array<double, 4> v{x.px, x.py, x.vx, x.vy};
    std::array<double, 2> z{0.0, 0.0};
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 4; ++c) z[r] += projection[r][c] * v[c];
    return z;
  }
};

struct MeasurementSet {
  std::vector<std::array<double, 2>> points;
};

// k targets with positions uniform over the space and each velocity component
// uniform on [-v_max, v_max].
TargetSet init_targets(const SearchSpace& space, int count, double v_max,
                       RngStream& rng);

// Advances every target one step through the motion model. Positions leaving
// the space are reflected across the violated boundary and the corresponding
// velocity component negated.
TargetSet step_targets(const TargetSet& targets, const MotionModel& model,
                       const SearchSpace& space, RngStream& rng);

// The boundary behavior of the motion model, applied to one state in place.
void reflect_state(TargetState& state, const SearchSpace& space);

// Noisy measurement set for one sensing action: each in-region target is
// detected with probability p_d (measurement clamped to the region boundary),
// plus Poisson(lambda_q) clutter points uniform over the region.
MeasurementSet sense(const TargetSet& targets, const SensingAction& action,
                     const SensorModel& sensor, RngStream& rng);

// Plain-text trajectory row: t, target index, p_x, p_y, v_x, v_y.
void write_truth_rows(std::ostream& os, int t, const TargetSet& targets);

}  // namespace decster
