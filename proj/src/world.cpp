#include "decster/world.hpp"

#include <cmath>

namespace decster {

namespace {

std::array<double, 4> mat_vec(const Mat4& m, const std::array<double, 4>& v) {
  std::array<double, 4> out{0, 0, 0, 0};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r] += m[r][c] * v[c];
  return out;
}

// Reflect p into [0, hi], flipping v once per boundary crossing.
void reflect(double& p, double& v, double hi) {
  while (p < 0.0 || p > hi) {
    if (p < 0.0) {
      p = -p;
      v = -v;
    } else {
      p = 2.0 * hi - p;
      v = -v;
    }
  }
}

}  // namespace

Mat4 cholesky4(const Mat4& m) {
  Mat4 l{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = m[i][j];
      for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        l[i][j] = sum > 1e-15 ? std::sqrt(sum) : 0.0;
      } else {
        l[i][j] = l[j][j] > 0.0 ? sum / l[j][j] : 0.0;
      }
    }
  }
  return l;
}

TargetSet init_targets(const SearchSpace& space, int count, double v_max,
                       RngStream& rng) {
  TargetSet targets;
  targets.reserve(static_cast<std::size_t>(count < 0 ? 0 : count));
  for (int i = 0; i < count; ++i) {
    TargetState s;
    s.px = rng.uniform(0.0, space.width);
    s.py = rng.uniform(0.0, space.length);
    s.vx = rng.uniform(-v_max, v_max);
    s.vy = rng.uniform(-v_max, v_max);
    targets.push_back(s);
  }
  return targets;
}

void reflect_state(TargetState& state, const SearchSpace& space) {
  reflect(state.px, state.vx, space.width);
  reflect(state.py, state.vy, space.length);
}

TargetSet step_targets(const TargetSet& targets, const MotionModel& model,
                       const SearchSpace& space, RngStream& rng) {
  const Mat4 chol = cholesky4(model.process_noise_cov);
  TargetSet out;
  out.reserve(targets.size());
  for (const TargetState& s : targets) {
    std::array<double, 4> v{s.px, s.py, s.vx, s.vy};
    std::array<double, 4> next = mat_vec(model.transition, v);
    std::array<double, 4> z{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c <= r; ++c) next[r] += chol[r][c] * z[c];
    TargetState n{next[0], next[1], next[2], next[3]};
    reflect(n.px, n.vx, space.width);
    reflect(n.py, n.vy, space.length);
    out.push_back(n);
  }
  return out;
}

MeasurementSet sense(const TargetSet& targets, const SensingAction& action,
                     const SensorModel& sensor, RngStream& rng) {
  MeasurementSet z;
  const double s = static_cast<double>(action.scale);
  const auto clamp = [&](double v, double lo) {
    if (v < lo) return lo;
    if (v > lo + s) return lo + s;
    return v;
  };
  for (const TargetState& x : targets) {
    if (!action_contains(action, x)) continue;
    if (rng.uniform01() >= sensor.detection_prob) continue;
    auto h = sensor.project(x);
    h[0] = clamp(h[0] + rng.normal(0.0, sensor.noise_std), action.origin_x);
    h[1] = clamp(h[1] + rng.normal(0.0, sensor.noise_std), action.origin_y);
    z.points.push_back(h);
  }
  const int clutter = rng.poisson(action.clutter_rate);
  for (int i = 0; i < clutter; ++i) {
    z.points.push_back({rng.uniform(action.origin_x, action.origin_x + s),
                        rng.uniform(action.origin_y, action.origin_y + s)});
  }
  return z;
}

void write_truth_rows(std::ostream& os, int t, const TargetSet& targets) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const TargetState& s = targets[i];
    os << t << ' ' << i << ' ' << s.px << ' ' << s.py << ' ' << s.vx << ' '
       << s.vy << '\n';
  }
}

}  // namespace decster
