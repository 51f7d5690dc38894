#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "decster/runtime.hpp"

using namespace decster;

namespace {

TrialConfig small_config() {
  TrialConfig c;
  c.target_count = 3;
  c.agent_count = 2;
  c.steps = 30;
  c.policy.variant = PolicyVariant::RANDOM;
  return c;
}

// Mirrors the owner-side bookkeeping of agent_step for tests that drive the
// filter directly.
void advance(AgentState& agent, int t, const TrialConfig& c) {
  run_filter_step(agent, t, c);
  agent.next_step = t + 1;
  agent.checkpoints[t + 1] = agent.phd;
  const int oldest = agent.next_step - c.filter.checkpoint_horizon;
  while (!agent.checkpoints.empty() && agent.checkpoints.begin()->first < oldest)
    agent.checkpoints.erase(agent.checkpoints.begin());
}

bool same_phd(const ParticlePhd& a, const ParticlePhd& b) {
  if (a.particles.size() != b.particles.size()) return false;
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    if (a.particles[i].weight != b.particles[i].weight) return false;
    if (a.particles[i].state.px != b.particles[i].state.px) return false;
    if (a.particles[i].state.py != b.particles[i].state.py) return false;
    if (a.particles[i].state.vx != b.particles[i].state.vx) return false;
    if (a.particles[i].state.vy != b.particles[i].state.vy) return false;
  }
  return true;
}

ObservationRecord make_record(int t, int agent, double ox, double oy,
                              std::vector<std::array<double, 2>> pts) {
  ObservationRecord r;
  r.time = t;
  r.agent_id = agent;
  r.action = SensingAction{ox, oy, 4, 0.1, false, false};
  r.measurements.points = std::move(pts);
  return r;
}

}  // namespace

TEST_CASE("same seed gives bit-identical traces") {
  TrialConfig c = small_config();
  auto t1 = run_trial(c, 77);
  auto t2 = run_trial(c, 77);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t a = 0; a < t1.size(); ++a) {
    REQUIRE(t1[a].rows.size() == t2[a].rows.size());
    for (std::size_t i = 0; i < t1[a].rows.size(); ++i) {
      CHECK(t1[a].rows[i].ospa == t2[a].rows[i].ospa);
      CHECK(t1[a].rows[i].estimated_cardinality ==
            t2[a].rows[i].estimated_cardinality);
    }
  }
  auto t3 = run_trial(c, 78);
  bool any_diff = false;
  for (std::size_t a = 0; a < t1.size(); ++a)
    for (std::size_t i = 0; i < t1[a].rows.size(); ++i)
      any_diff |= t1[a].rows[i].ospa != t3[a].rows[i].ospa;
  CHECK(any_diff);
}

TEST_CASE("trace rows carry step index and cumulative measurement count") {
  TrialConfig c = small_config();
  auto traces = run_trial(c, 5);
  REQUIRE(traces.size() == 2);
  for (const TrialTrace& trace : traces) {
    REQUIRE(trace.rows.size() == 30);
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
      CHECK(trace.rows[i].step == static_cast<int>(i));
      CHECK(trace.rows[i].cumulative_measurements == static_cast<int>(i) + 1);
      CHECK(trace.rows[i].ospa >= 0.0);
      CHECK(trace.rows[i].ospa <= c.ospa_params.cutoff);
    }
  }
}

TEST_CASE("filter step consumes logged records and advances the clock") {
  TrialConfig c = small_config();
  AgentState agent = make_agent(1, 9);
  ObservationRecord r = make_record(0, 1, 4.0, 4.0, {{5.0, 5.0}});
  agent.log.push_back(r);
  run_filter_step(agent, 0, c);
  CHECK(agent.filter_steps_run == 1);
  // One measurement seeds births: mass 0.01 enters, then the update runs.
  CHECK(agent.phd.total_weight() > 0.0);
}

TEST_CASE("duplicate records are no-ops") {
  TrialConfig c = small_config();
  c.channel.share_prob = 0.0;
  AgentState agent = make_agent(1, 9);
  for (int t = 0; t < 5; ++t) {
    agent.log.push_back(make_record(t, 1, 4.0, 4.0, {{5.0, 5.0}}));
    advance(agent, t, c);
  }
  const ObservationRecord teammate = make_record(3, 2, 8.0, 8.0, {{9.0, 9.0}});
  assimilate(agent, teammate, c);
  AgentState before = agent;
  assimilate(agent, teammate, c);
  CHECK(same_phd(agent.phd, before.phd));
  CHECK(agent.log.size() == before.log.size());
  CHECK(agent.filter_steps_run == before.filter_steps_run);
  // Own records never arrive through the channel.
  CHECK_THROWS(assimilate(agent, agent.log[0], c));
}

TEST_CASE("late records trigger replay of exactly the affected suffix") {
  TrialConfig c = small_config();
  AgentState agent = make_agent(1, 9);
  for (int t = 0; t < 6; ++t) {
    agent.log.push_back(make_record(t, 1, 4.0, 4.0, {{5.0, 5.0}}));
    advance(agent, t, c);
  }
  const int before = agent.filter_steps_run;
  // A teammate record for t = 3 arrives at local time 6: steps 3,4,5 replay.
  assimilate(agent, make_record(3, 2, 8.0, 8.0, {{9.0, 9.0}}), c);
  CHECK(agent.filter_steps_run - before == 3);
  CHECK(agent.out_of_order_applied == 0);
}

TEST_CASE("records beyond the replay horizon are applied out of order") {
  TrialConfig c = small_config();
  c.steps = 40;
  c.filter.checkpoint_horizon = 5;
  AgentState agent = make_agent(1, 9);
  for (int t = 0; t < 30; ++t) {
    agent.log.push_back(make_record(t, 1, 4.0, 4.0, {{5.0, 5.0}}));
    advance(agent, t, c);
  }
  const int before = agent.filter_steps_run;
  assimilate(agent, make_record(2, 2, 8.0, 8.0, {{9.0, 9.0}}), c);
  CHECK(agent.out_of_order_applied == 1);
  CHECK(agent.filter_steps_run == before);  // no rollback happened
}

TEST_CASE("replayed filter state is bit-identical to a from-scratch rebuild") {
  TrialConfig c = small_config();
  const std::uint64_t seed = 13;
  RngStream fuzz(171, 0);

  for (int round = 0; round < 6; ++round) {
    AgentState agent = make_agent(1, seed);
    std::vector<ObservationRecord> all;
    const int steps = 10;
    // Teammate records arrive late in a random order while the agent runs its
    // own fixed schedule.
    std::vector<ObservationRecord> pending;
    for (int t = 0; t < steps; ++t)
      pending.push_back(make_record(
          t, 2, 8.0, 8.0, {{fuzz.uniform(8.0, 12.0), fuzz.uniform(8.0, 12.0)}}));
    std::shuffle(pending.begin(), pending.end(),
                 std::mt19937_64(fuzz.next_u64()));

    auto insert_sorted = [&](const ObservationRecord& r) {
      agent.log.insert(
          std::upper_bound(agent.log.begin(), agent.log.end(), r,
                           [](const ObservationRecord& a,
                              const ObservationRecord& b) {
                             return std::make_pair(a.time, a.agent_id) <
                                    std::make_pair(b.time, b.agent_id);
                           }),
          r);
    };
    std::size_t delivered = 0;
    for (int t = 0; t < steps; ++t) {
      insert_sorted(make_record(t, 1, 4.0, 4.0, {{5.0, 5.0}}));
      advance(agent, t, c);
      while (delivered < pending.size() && fuzz.uniform01() < 0.5) {
        if (pending[delivered].time <= t)
          assimilate(agent, pending[delivered], c);
        else
          insert_sorted(pending[delivered]);
        ++delivered;
      }
    }
    // Deliver stragglers.
    for (; delivered < pending.size(); ++delivered)
      assimilate(agent, pending[delivered], c);

    ParticlePhd reference = replay_log(agent.log, steps, 1, seed, c);
    CHECK(same_phd(agent.phd, reference));
  }
}

TEST_CASE("share coin respects the channel probability") {
  TrialConfig c = small_config();
  SearchSpace space = c.space;
  ActionSpace actions = build_action_space(space, c.scales, c.clutter_rates);
  RngStream rng(21, 0);
  TargetSet world = init_targets(space, 3, 0.1, rng);

  auto count_broadcasts = [&](double p) {
    TrialConfig cc = c;
    cc.channel.share_prob = p;
    int sent = 0, total = 0;
    AgentState agent = make_agent(1, 55);
    for (int t = 0; t < 40; ++t) {
      AgentStepResult r = agent_step(agent, t, world, actions, cc);
      sent += static_cast<int>(!r.broadcast.empty());
      ++total;
    }
    return std::make_pair(sent, total);
  };

  auto [sent0, total0] = count_broadcasts(0.0);
  CHECK(sent0 == 0);
  auto [sent1, total1] = count_broadcasts(1.0);
  CHECK(sent1 == total1);
  auto [sent_half, total_half] = count_broadcasts(0.5);
  CHECK(sent_half > total_half / 5);
  CHECK(sent_half < total_half * 4 / 5);
}

TEST_CASE("unsent records queue up and flush with the next successful share") {
  TrialConfig c = small_config();
  c.channel.share_prob = 0.0;
  SearchSpace space = c.space;
  ActionSpace actions = build_action_space(space, c.scales, c.clutter_rates);
  RngStream rng(22, 0);
  TargetSet world = init_targets(space, 3, 0.1, rng);

  AgentState agent = make_agent(1, 56);
  for (int t = 0; t < 5; ++t) agent_step(agent, t, world, actions, c);
  CHECK(agent.unsent.size() == 5);

  // Force a successful share: everything queued goes out at once.
  c.channel.share_prob = 1.0;
  AgentStepResult r = agent_step(agent, 5, world, actions, c);
  CHECK(r.broadcast.size() == 6);
  CHECK(agent.unsent.empty());
}

TEST_CASE("perfect channel keeps team logs complete") {
  TrialConfig c = small_config();
  c.channel.share_prob = 1.0;
  c.channel.delay_min = 0;
  c.channel.delay_max = 0;
  TrialResult result = run_trial_full(c, 31);
  // With zero-delay sharing every agent holds all J * T records.
  for (const AgentState& agent : result.agents)
    CHECK(agent.log.size() ==
          static_cast<std::size_t>(c.agent_count) * c.steps);
}

TEST_CASE("silent channel keeps logs private") {
  TrialConfig c = small_config();
  c.channel.share_prob = 0.0;
  TrialResult result = run_trial_full(c, 31);
  for (const AgentState& agent : result.agents)
    CHECK(agent.log.size() == static_cast<std::size_t>(c.steps));
}

TEST_CASE("agent count does not perturb the world trajectory") {
  // With sharing off, adding agents must not change what agent 1 experiences.
  TrialConfig c = small_config();
  c.channel.share_prob = 0.0;
  c.agent_count = 1;
  auto solo = run_trial(c, 99);
  c.agent_count = 3;
  auto team = run_trial(c, 99);
  REQUIRE(solo.size() == 1);
  REQUIRE(team.size() == 3);
  REQUIRE(solo[0].rows.size() == team[0].rows.size());
  for (std::size_t i = 0; i < solo[0].rows.size(); ++i) {
    CHECK(solo[0].rows[i].ospa == team[0].rows[i].ospa);
    CHECK(solo[0].rows[i].estimated_cardinality ==
          team[0].rows[i].estimated_cardinality);
  }
}

TEST_CASE("lossy channels on fuzzed schedules keep replay consistency") {
  RngStream fuzz(172, 0);
  for (int round = 0; round < 3; ++round) {
    TrialConfig c;
    c.target_count = 3;
    c.agent_count = 3;
    c.steps = 20;
    c.policy.variant = PolicyVariant::RANDOM;
    c.channel.share_prob = fuzz.uniform(0.2, 0.9);
    c.channel.delay_min = 1;
    c.channel.delay_max = 1 + static_cast<int>(fuzz.uniform_index(4));
    TrialResult result = run_trial_full(c, 500 + round);
    for (const AgentState& agent : result.agents) {
      ParticlePhd reference =
          replay_log(agent.log, c.steps, agent.agent_id, agent.trial_seed, c);
      CHECK(same_phd(agent.phd, reference));
    }
  }
}
