#pragma once

#include <string>
#include <vector>

#include "decster/runtime.hpp"

namespace decster {

struct ExperimentConfig {
  TrialConfig trial;
  int trials = 10;
  std::uint64_t base_seed = 1;
  std::string out_dir = "./results";
  bool dump_particles = false;
  bool dump_truth = false;
};

struct StepAggregate {
  int step = 0;
  double mean_ospa = 0.0;          // over agents and trials
  double se_ospa = 0.0;            // standard error across per-trial team means
  double mean_cumulative_measurements = 0.0;
  double mean_estimated_cardinality = 0.0;
};

struct ExperimentResult {
  std::vector<std::vector<TrialTrace>> trial_traces;  // one entry per trial
  std::vector<StepAggregate> aggregate;
};

// Runs `trials` independent trials with seeds base_seed + index and aggregates
// the per-step team-mean OSPA with standard errors across trials.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Pure aggregation over already-computed traces.
std::vector<StepAggregate> aggregate_traces(
    const std::vector<std::vector<TrialTrace>>& trial_traces);

// Writes summary.csv, traces.csv and a re-runnable config echo into out_dir.
void write_results(const ExperimentConfig& config, const ExperimentResult& result);

// CLI policy names: random, renyi, ts-renyi, decster1, decster2, decster-c.
std::string policy_name(PolicyVariant variant);
PolicyVariant parse_policy(const std::string& name);

// Flat key=value config file support. Unknown keys are an error; '#' starts a
// comment.
void apply_config_file(ExperimentConfig& config, const std::string& path);
void apply_key_value(ExperimentConfig& config, const std::string& key,
                     const std::string& value);
std::string config_echo(const ExperimentConfig& config);

}  // namespace decster
