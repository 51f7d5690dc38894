#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "decster/core.hpp"
#include "decster/rng.hpp"
#include "decster/world.hpp"

namespace decster {

struct Particle {
  double weight = 0.0;
  TargetState state;
};

// Weighted particle representation of the PHD intensity. The sum of weights of
// particles inside a region is the expected target count there.
struct ParticlePhd {
  std::vector<Particle> particles;

  double total_weight() const {
    double w = 0.0;
    for (const Particle& p : particles) w += p.weight;
    return w;
  }
};

// Birth-particle injection parameters. Positions are drawn around each
// anchoring measurement, velocities around zero.
struct BirthConfig {
  int particles_per_measurement = 100;
  double birth_weight_total = 0.01;  // per measurement
  double position_std = 0.1;
  double velocity_std = 0.05;
};

// Hard per-agent particle ceiling; beyond it the owner resamples immediately.
inline constexpr std::size_t kParticleCap = 200000;

// Prediction step: advances every particle through the motion model (weight
// scaled by p_s) and appends birth particles anchored to each measurement of
// each birth set. When `space` is given, particles take the motion model's
// boundary behavior: positions reflect into the space with the velocity
// component negated, matching target motion.
ParticlePhd predict(const ParticlePhd& phd, const MotionModel& model,
                    const std::vector<std::pair<const MeasurementSet*, BirthConfig>>& births,
                    RngStream& rng, const SearchSpace* space = nullptr);

// Measurement update for one sensing action. States are unchanged; weights
// follow the PHD update with constant in-region detection probability and
// uniform clutter density lambda_q / area. Throws if a measurement lies
// outside the action region.
ParticlePhd update(const ParticlePhd& phd, const SensingAction& action,
                   const SensorModel& sensor, const MeasurementSet& measurements);

// Sum of weights of particles inside `region` (whole space when null).
double expected_cardinality(const ParticlePhd& phd,
                            const SensingAction* region = nullptr);

// Systematic (low-variance) resampling: max(1, round(W)) * particles_per_target
// draws proportional to weight, uniform output weights summing to W. Total
// weight zero yields an empty cloud.
ParticlePhd resample(const ParticlePhd& phd, int particles_per_target,
                     RngStream& rng);

// Multi-target state extraction: round-half-up of the total weight gives the
// target count; weighted k-means over particle positions (k-means++ seeding,
// 3 restarts, 50 iteration cap) gives the states, with velocities averaged per
// cluster.
TargetSet extract_targets(const ParticlePhd& phd, RngStream& rng);

// Lloyd-only extraction warm-started from `init` positions. When the rounded
// cardinality exceeds |init|, extra centroids are seeded from `extra_seeds`
// and then from weight-proportional random particles. Used by rollout-heavy
// callers; extract_targets is the reference path.
TargetSet extract_targets_warm(const ParticlePhd& phd, const TargetSet& init,
                               const MeasurementSet& extra_seeds, RngStream& rng);

inline long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

}  // namespace decster
