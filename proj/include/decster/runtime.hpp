#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "decster/core.hpp"
#include "decster/phd.hpp"
#include "decster/policy.hpp"
#include "decster/rng.hpp"
#include "decster/sampling.hpp"
#include "decster/world.hpp"

namespace decster {

// The unit of inter-agent communication: one timestamped observation tuple.
struct ObservationRecord {
  int time = 0;
  int agent_id = 0;  // 1-based
  SensingAction action;
  MeasurementSet measurements;
};

// Lossy all-to-all broadcast channel. Each step an agent emits its pending
// records with probability share_prob; delivery lag per (record, receiver) is
// uniform over [delay_min, delay_max] steps.
struct ChannelConfig {
  double share_prob = 1.0;
  int delay_min = 1;
  int delay_max = 1;
};

struct FilterConfig {
  BirthConfig birth;
  int resample_particles_per_target = 1000;
  bool births_from_previous = false;  // anchor births to step t-1 measurements
  int checkpoint_horizon = 25;        // steps of replay history kept
};

// Full configuration of one simulated trial.
struct TrialConfig {
  SearchSpace space{16.0, 16.0};
  int target_count = 15;
  double v_max = 0.1;
  int agent_count = 2;
  int steps = 150;
  std::vector<int> scales{1, 2, 4, 8};
  std::vector<double> clutter_rates{0.005, 0.04, 1.0, 5.0};
  PolicyKind policy{};
  OspaParams ospa_params{};
  TsConfig ts{};
  ChannelConfig channel{};
  FilterConfig filter{};
  MotionModel motion{};
  SensorModel sensor{};
  // Ground-truth target motion. The filter's `motion` model (with its process
  // noise Q) is what the agents assume; the true targets default to noiseless
  // constant-velocity motion with boundary reflection.
  MotionModel truth_motion{.process_noise_cov = Mat4{}};
  // Optional debug hooks, invoked once per (step, agent) / per step.
  std::function<void(int step, int agent_id, const ParticlePhd&)> particle_dump;
  std::function<void(int step, const TargetSet&)> truth_dump;
};

struct AgentState {
  int agent_id = 0;  // 1-based
  std::uint64_t trial_seed = 0;
  ParticlePhd phd;
  std::vector<ObservationRecord> log;       // sorted by (time, agent_id)
  std::map<int, ParticlePhd> checkpoints;   // key t: state before step t
  std::vector<ObservationRecord> unsent;
  int next_step = 0;
  TargetSet estimate;
  // Diagnostics.
  int filter_steps_run = 0;
  int out_of_order_applied = 0;  // records older than the replay horizon
};

AgentState make_agent(int agent_id, std::uint64_t trial_seed);

// One filter step at time t: predict with births anchored to the logged
// measurements, update with every logged record at t in (time, agent id)
// order, then resample. RNG is keyed by (trial seed, agent, t) so replays are
// exact.
void run_filter_step(AgentState& agent, int t, const TrialConfig& config);

struct AgentStepResult {
  SensingAction action;
  MeasurementSet measurements;
  std::vector<ObservationRecord> broadcast;  // empty when the share coin fails
};

// One full decentralized step for an agent: select action, sense the ground
// truth, filter, extract the estimate, and decide whether to share.
AgentStepResult agent_step(AgentState& agent, int t, const TargetSet& world_targets,
                           const ActionSpace& actions, const TrialConfig& config);

// Inserts a teammate record into the log. Late records roll the filter back to
// the checkpoint before their timestamp and replay; duplicates are no-ops.
// Records older than the replay horizon are applied out of order at the
// current step.
void assimilate(AgentState& agent, const ObservationRecord& record,
                const TrialConfig& config);

// Batched form: inserts all records, then replays once from the earliest
// affected step.
void assimilate_batch(AgentState& agent, std::vector<ObservationRecord> records,
                      const TrialConfig& config);

// Rebuilds the PHD implied by a log from scratch; the reference for the
// replay-consistency property.
ParticlePhd replay_log(const std::vector<ObservationRecord>& log, int steps,
                       int agent_id, std::uint64_t trial_seed,
                       const TrialConfig& config);

struct TraceRow {
  int step = 0;
  double ospa = 0.0;
  int cumulative_measurements = 0;
  double estimated_cardinality = 0.0;
};

struct TrialTrace {
  int agent_id = 0;
  std::vector<TraceRow> rows;
};

struct TrialResult {
  std::vector<TrialTrace> traces;
  std::vector<AgentState> agents;  // final states, for inspection/tests
};

TrialResult run_trial_full(const TrialConfig& config, std::uint64_t seed);
std::vector<TrialTrace> run_trial(const TrialConfig& config, std::uint64_t seed);

}  // namespace decster
