#pragma once

#include "decster/core.hpp"
#include "decster/phd.hpp"
#include "decster/rng.hpp"

namespace decster {

enum class TsMethod { TS1, TS2 };

struct TsConfig {
  TsMethod method = TsMethod::TS2;
  int ts1_particle_count = 100;      // rho-tilde
  int ts2_samples_per_decision = 10;
  int ts2_random_pool_size = 0;      // 0: auto, 4 * ceil(n_hat) + 8
  double v_max = 0.1;                // velocity range for uniform random states
  // Alternative cardinality rule for TS-PHD-I: round the summed original
  // weights of the drawn particles instead of the total PHD mass.
  bool ts1_cardinality_from_drawn = false;
};

// TS-PHD-I: draw rho-tilde particles proportional to weight, cluster them with
// k-means into round(total PHD weight) centroids.
TargetSet ts_phd_1(const ParticlePhd& phd, const TsConfig& config, RngStream& rng);

// TS-PHD-II: sample a Poisson cardinality from the expected count, then fill
// the sample with extracted target estimates first and uniform-random states
// for the remainder.
TargetSet ts_phd_2(const ParticlePhd& phd, const SearchSpace& space,
                   const TsConfig& config, RngStream& rng);

// As ts_phd_2 but with the target estimates already extracted from `phd`;
// lets a caller drawing many samples per decision hoist the extraction.
TargetSet ts_phd_2_with_estimates(const ParticlePhd& phd,
                                  const TargetSet& estimates,
                                  const SearchSpace& space,
                                  const TsConfig& config, RngStream& rng);

}  // namespace decster
