#pragma once

#include <vector>

#include "decster/core.hpp"
#include "decster/phd.hpp"
#include "decster/rng.hpp"
#include "decster/sampling.hpp"
#include "decster/world.hpp"

namespace decster {

struct OspaParams {
  double cutoff = 2.0;  // c
  double order = 1.0;   // p >= 1
};

enum class PolicyVariant {
  DECSTER_TS1,
  DECSTER_TS2,
  DECSTER_C,
  RENYI,
  TS_RENYI,
  RANDOM,
};

struct PolicyKind {
  PolicyVariant variant = PolicyVariant::DECSTER_TS2;
  double renyi_alpha = 0.5;  // in (0, 1)
  // Ablation switch: generate rollout pseudo-measurements with p_d thinning,
  // sensor noise and clutter instead of the deterministic projection.
  bool stochastic_rollouts = false;
  // Rollout acceleration for the experiment harness: warm-start the rollout
  // extraction from the no-interaction estimate instead of re-seeding, and
  // reuse that estimate for empty-pseudo-measurement actions whose expected
  // cardinality does not change. Off by default; action scoring is then exact.
  bool fast_rollouts = false;
};

// OSPA distance between two state sets, position components only. Empty vs
// empty is 0; exactly one empty set costs the full cutoff.
double ospa(const TargetSet& a, const TargetSet& b, const OspaParams& params);

// Cardinality-error term of the OSPA for set sizes m <= n swapped as needed.
double ospa_cardinality_term(std::size_t size_a, std::size_t size_b,
                             const OspaParams& params);

// Renyi divergence between a predicted and an updated particle weight vector
// over the same particle support.
double renyi_divergence(const std::vector<double>& predicted_weights,
                        const std::vector<double>& updated_weights,
                        double alpha);

// Hypothetical post-action estimate: projects the in-region members of
// `sample` to noiseless pseudo-measurements, applies the PHD update, and
// extracts the resulting target set. With `stochastic` set, the
// pseudo-measurements are thinned by p_d, perturbed by sensor noise, and mixed
// with Poisson clutter.
TargetSet pseudo_rollout(const ParticlePhd& predicted, const TargetSet& sample,
                         const SensingAction& action, const SensorModel& sensor,
                         RngStream& rng, bool stochastic = false);

// Optional per-decision diagnostics.
struct DecisionDiagnostics {
  int chosen_index = -1;
  std::vector<double> scores;                       // one per action
  std::vector<std::pair<int, double>> top_scores;   // best 10 (index, score)
  std::vector<int> sample_cardinalities;            // per TS replicate
};

// One decentralized action selection step. Side-effect free with respect to
// the caller's PHD.
SensingAction select_action(const PolicyKind& policy, const ParticlePhd& phd,
                            const SearchSpace& space, const ActionSpace& actions,
                            const SensorModel& sensor, const MotionModel& motion,
                            const TsConfig& ts, const OspaParams& ospa_params,
                            RngStream& rng, DecisionDiagnostics* diag = nullptr);

}  // namespace decster
