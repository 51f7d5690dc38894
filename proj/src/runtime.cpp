#include "decster/runtime.hpp"

#include <algorithm>
#include <stdexcept>

namespace decster {

namespace {

// Stream tags; every RNG consumer gets its own (tag, agent, t) stream so the
// decentralized decision draws never perturb the world or the filter.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamWorld = 2;
constexpr std::uint64_t kStreamSense = 3;
constexpr std::uint64_t kStreamFilter = 4;
constexpr std::uint64_t kStreamDecide = 5;
constexpr std::uint64_t kStreamExtract = 6;
constexpr std::uint64_t kStreamChannel = 7;

RngStream stream_for(std::uint64_t seed, std::uint64_t tag, int agent_id, int t) {
  return RngStream(seed, mix64(tag, mix64(static_cast<std::uint64_t>(agent_id),
                                          static_cast<std::uint64_t>(t))));
}

bool record_order(const ObservationRecord& a, const ObservationRecord& b) {
  if (a.time != b.time) return a.time < b.time;
  return a.agent_id < b.agent_id;
}

bool is_duplicate(const std::vector<ObservationRecord>& log,
                  const ObservationRecord& rec) {
  auto it = std::lower_bound(log.begin(), log.end(), rec, record_order);
  return it != log.end() && it->time == rec.time && it->agent_id == rec.agent_id;
}

void insert_sorted(std::vector<ObservationRecord>& log, ObservationRecord rec) {
  auto it = std::lower_bound(log.begin(), log.end(), rec, record_order);
  log.insert(it, std::move(rec));
}

void prune_checkpoints(AgentState& agent, const TrialConfig& config) {
  const int oldest = agent.next_step - config.filter.checkpoint_horizon;
  while (!agent.checkpoints.empty() && agent.checkpoints.begin()->first < oldest)
    agent.checkpoints.erase(agent.checkpoints.begin());
}

// Runs step t and records the post-step checkpoint.
void advance_one_step(AgentState& agent, int t, const TrialConfig& config) {
  run_filter_step(agent, t, config);
  agent.next_step = t + 1;
  agent.checkpoints[t + 1] = agent.phd;
  prune_checkpoints(agent, config);
}

// Rolls back to the checkpoint before `from_step` and replays through the
// current step.
void replay_from(AgentState& agent, int from_step, const TrialConfig& config) {
  auto cp = agent.checkpoints.find(from_step);
  if (cp == agent.checkpoints.end())
    throw std::logic_error("replay_from: missing checkpoint");
  agent.phd = cp->second;
  agent.checkpoints.erase(std::next(cp), agent.checkpoints.end());
  const int until = agent.next_step;
  for (int t = from_step; t < until; ++t) {
    run_filter_step(agent, t, config);
    agent.checkpoints[t + 1] = agent.phd;
  }
  agent.next_step = until;
}

void assimilate_one(AgentState& agent, ObservationRecord record,
                    const TrialConfig& config, bool replay) {
  if (is_duplicate(agent.log, record)) return;
  const int t = record.time;
  const SensingAction action = record.action;
  const MeasurementSet measurements = record.measurements;
  insert_sorted(agent.log, std::move(record));
  if (t >= agent.next_step) return;  // consumed when that step runs
  if (!agent.checkpoints.empty() && t >= agent.checkpoints.begin()->first) {
    if (replay) replay_from(agent, t, config);
    return;
  }
  // Beyond the replay horizon: apply the measurement out of order now.
  agent.phd = update(agent.phd, action, config.sensor, measurements);
  ++agent.out_of_order_applied;
}

}  // namespace

AgentState make_agent(int agent_id, std::uint64_t trial_seed) {
  AgentState a;
  a.agent_id = agent_id;
  a.trial_seed = trial_seed;
  a.checkpoints[0] = ParticlePhd{};
  return a;
}

void run_filter_step(AgentState& agent, int t, const TrialConfig& config) {
  RngStream rng = stream_for(agent.trial_seed, kStreamFilter, agent.agent_id, t);

  const int birth_time = config.filter.births_from_previous ? t - 1 : t;
  std::vector<std::pair<const MeasurementSet*, BirthConfig>> births;
  for (const ObservationRecord& rec : agent.log)
    if (rec.time == birth_time)
      births.emplace_back(&rec.measurements, config.filter.birth);

  agent.phd = predict(agent.phd, config.motion, births, rng, &config.space);
  for (const ObservationRecord& rec : agent.log) {
    if (rec.time != t) continue;
    agent.phd = update(agent.phd, rec.action, config.sensor, rec.measurements);
    if (agent.phd.particles.size() > kParticleCap)
      agent.phd = resample(agent.phd, config.filter.resample_particles_per_target, rng);
  }
  agent.phd = resample(agent.phd, config.filter.resample_particles_per_target, rng);
  ++agent.filter_steps_run;
}

AgentStepResult agent_step(AgentState& agent, int t, const TargetSet& world_targets,
                           const ActionSpace& actions, const TrialConfig& config) {
  RngStream decide = stream_for(agent.trial_seed, kStreamDecide, agent.agent_id, t);
  AgentStepResult result;
  result.action = select_action(config.policy, agent.phd, config.space, actions,
                                config.sensor, config.motion, config.ts,
                                config.ospa_params, decide);

  RngStream sense_rng = stream_for(agent.trial_seed, kStreamSense, agent.agent_id, t);
  result.measurements = sense(world_targets, result.action, config.sensor, sense_rng);

  ObservationRecord own{t, agent.agent_id, result.action, result.measurements};
  insert_sorted(agent.log, own);
  advance_one_step(agent, t, config);

  RngStream extract_rng =
      stream_for(agent.trial_seed, kStreamExtract, agent.agent_id, t);
  agent.estimate = extract_targets(agent.phd, extract_rng);

  RngStream channel = stream_for(agent.trial_seed, kStreamChannel, agent.agent_id, t);
  if (channel.uniform01() < config.channel.share_prob) {
    result.broadcast.reserve(agent.unsent.size() + 1);
    for (ObservationRecord& r : agent.unsent)
      result.broadcast.push_back(std::move(r));
    agent.unsent.clear();
    result.broadcast.push_back(std::move(own));
  } else {
    agent.unsent.push_back(std::move(own));
  }
  return result;
}

void assimilate(AgentState& agent, const ObservationRecord& record,
                const TrialConfig& config) {
  if (record.agent_id == agent.agent_id)
    throw std::invalid_argument("assimilate: own records enter the log at agent_step");
  assimilate_one(agent, record, config, /*replay=*/true);
}

void assimilate_batch(AgentState& agent, std::vector<ObservationRecord> records,
                      const TrialConfig& config) {
  int earliest = agent.next_step;
  bool inserted_past = false;
  for (ObservationRecord& rec : records) {
    if (is_duplicate(agent.log, rec)) continue;
    const int t = rec.time;
    if (t < agent.next_step &&
        (agent.checkpoints.empty() || t < agent.checkpoints.begin()->first)) {
      assimilate_one(agent, std::move(rec), config, /*replay=*/false);
      continue;  // out-of-order path already applied
    }
    if (t < agent.next_step) {
      inserted_past = true;
      earliest = std::min(earliest, t);
    }
    insert_sorted(agent.log, std::move(rec));
  }
  if (inserted_past) replay_from(agent, earliest, config);
}

ParticlePhd replay_log(const std::vector<ObservationRecord>& log, int steps,
                       int agent_id, std::uint64_t trial_seed,
                       const TrialConfig& config) {
  AgentState ghost = make_agent(agent_id, trial_seed);
  ghost.log = log;
  std::sort(ghost.log.begin(), ghost.log.end(), record_order);
  for (int t = 0; t < steps; ++t) run_filter_step(ghost, t, config);
  return ghost.phd;
}

TrialResult run_trial_full(const TrialConfig& config, std::uint64_t seed) {
  if (config.agent_count < 1 || config.steps < 0 || config.target_count < 0 ||
      config.space.width <= 0.0 || config.space.length <= 0.0)
    throw std::invalid_argument("run_trial: invalid configuration");
  const ActionSpace actions =
      build_action_space(config.space, config.scales, config.clutter_rates);

  RngStream init_rng = stream_for(seed, kStreamInit, 0, 0);
  TargetSet targets =
      init_targets(config.space, config.target_count, config.v_max, init_rng);
  RngStream world_rng(seed, kStreamWorld);

  std::vector<AgentState> agents;
  for (int j = 1; j <= config.agent_count; ++j)
    agents.push_back(make_agent(j, seed));

  TrialResult result;
  result.traces.resize(agents.size());
  for (std::size_t j = 0; j < agents.size(); ++j)
    result.traces[j].agent_id = agents[j].agent_id;

  // pending[t]: deliveries due at the start of step t, per receiver index.
  std::map<int, std::vector<std::vector<ObservationRecord>>> pending;
  auto pending_slot = [&](int t) -> std::vector<std::vector<ObservationRecord>>& {
    auto it = pending.find(t);
    if (it == pending.end())
      it = pending.emplace(t, std::vector<std::vector<ObservationRecord>>(
                                  agents.size())).first;
    return it->second;
  };

  for (int t = 0; t < config.steps; ++t) {
    if (auto it = pending.find(t); it != pending.end()) {
      for (std::size_t j = 0; j < agents.size(); ++j)
        if (!it->second[j].empty())
          assimilate_batch(agents[j], std::move(it->second[j]), config);
      pending.erase(it);
    }

    targets = step_targets(targets, config.truth_motion, config.space, world_rng);
    if (config.truth_dump) config.truth_dump(t, targets);

    std::vector<std::pair<std::size_t, ObservationRecord>> immediate;
    for (std::size_t j = 0; j < agents.size(); ++j) {
      AgentState& agent = agents[j];
      AgentStepResult step = agent_step(agent, t, targets, actions, config);

      TraceRow row;
      row.step = t;
      row.ospa = ospa(targets, agent.estimate, config.ospa_params);
      row.cumulative_measurements = t + 1;
      row.estimated_cardinality = agent.phd.total_weight();
      result.traces[j].rows.push_back(row);
      if (config.particle_dump) config.particle_dump(t, agent.agent_id, agent.phd);

      if (step.broadcast.empty()) continue;
      RngStream channel =
          stream_for(seed, kStreamChannel, agent.agent_id, t).child(1);
      for (const ObservationRecord& rec : step.broadcast) {
        for (std::size_t r = 0; r < agents.size(); ++r) {
          if (r == j) continue;
          int delay = config.channel.delay_min;
          if (config.channel.delay_max > config.channel.delay_min)
            delay += static_cast<int>(channel.uniform_index(
                static_cast<std::size_t>(config.channel.delay_max -
                                         config.channel.delay_min + 1)));
          const int due = t + delay;
          if (due <= t)
            immediate.emplace_back(r, rec);
          else if (due < config.steps)
            pending_slot(due)[r].push_back(rec);
        }
      }
    }
    for (auto& [r, rec] : immediate) assimilate(agents[r], rec, config);
  }
  result.agents = std::move(agents);
  return result;
}

std::vector<TrialTrace> run_trial(const TrialConfig& config, std::uint64_t seed) {
  return run_trial_full(config, seed).traces;
}

}  // namespace decster
