#include "decster/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace decster {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad numeric value for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  double v = parse_double(key, value);
  int i = static_cast<int>(std::llround(v));
  if (static_cast<double>(i) != v)
    throw std::runtime_error("expected integer for '" + key + "': " + value);
  return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::runtime_error("expected boolean for '" + key + "': " + value);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw std::runtime_error("empty list for '" + key + "'");
  return out;
}

}  // namespace

std::string policy_name(PolicyVariant variant) {
  switch (variant) {
    case PolicyVariant::RANDOM: return "random";
    case PolicyVariant::RENYI: return "renyi";
    case PolicyVariant::TS_RENYI: return "ts-renyi";
    case PolicyVariant::DECSTER_TS1: return "decster1";
    case PolicyVariant::DECSTER_TS2: return "decster2";
    case PolicyVariant::DECSTER_C: return "decster-c";
  }
  throw std::logic_error("unknown policy variant");
}

PolicyVariant parse_policy(const std::string& name) {
  if (name == "random") return PolicyVariant::RANDOM;
  if (name == "renyi") return PolicyVariant::RENYI;
  if (name == "ts-renyi") return PolicyVariant::TS_RENYI;
  if (name == "decster1") return PolicyVariant::DECSTER_TS1;
  if (name == "decster2") return PolicyVariant::DECSTER_TS2;
  if (name == "decster-c") return PolicyVariant::DECSTER_C;
  throw std::runtime_error(
      "unknown policy '" + name +
      "' (expected one of: random, renyi, ts-renyi, decster1, decster2, decster-c)");
}

void apply_key_value(ExperimentConfig& config, const std::string& key,
                     const std::string& value) {
  TrialConfig& t = config.trial;
  if (key == "policy") {
    t.policy.variant = parse_policy(value);
    if (t.policy.variant == PolicyVariant::DECSTER_TS1) t.ts.method = TsMethod::TS1;
    if (t.policy.variant == PolicyVariant::DECSTER_TS2 ||
        t.policy.variant == PolicyVariant::DECSTER_C ||
        t.policy.variant == PolicyVariant::TS_RENYI)
      t.ts.method = TsMethod::TS2;
  } else if (key == "targets") {
    t.target_count = parse_int(key, value);
  } else if (key == "agents") {
    t.agent_count = parse_int(key, value);
  } else if (key == "steps") {
    t.steps = parse_int(key, value);
  } else if (key == "trials") {
    config.trials = parse_int(key, value);
  } else if (key == "seed") {
    config.base_seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "comm_prob") {
    t.channel.share_prob = parse_double(key, value);
  } else if (key == "delay_min") {
    t.channel.delay_min = parse_int(key, value);
  } else if (key == "delay_max") {
    t.channel.delay_max = parse_int(key, value);
  } else if (key == "space_width") {
    t.space.width = parse_double(key, value);
  } else if (key == "space_length") {
    t.space.length = parse_double(key, value);
  } else if (key == "scales") {
    t.scales.clear();
    for (double v : parse_list(key, value)) t.scales.push_back(static_cast<int>(v));
  } else if (key == "clutter_rates") {
    t.clutter_rates = parse_list(key, value);
  } else if (key == "detection_prob") {
    t.sensor.detection_prob = parse_double(key, value);
  } else if (key == "noise_std") {
    t.sensor.noise_std = parse_double(key, value);
  } else if (key == "v_max") {
    t.v_max = parse_double(key, value);
    t.ts.v_max = t.v_max;
  } else if (key == "ospa_cutoff") {
    t.ospa_params.cutoff = parse_double(key, value);
  } else if (key == "ospa_order") {
    t.ospa_params.order = parse_double(key, value);
  } else if (key == "renyi_alpha") {
    t.policy.renyi_alpha = parse_double(key, value);
  } else if (key == "birth_particles_per_measurement") {
    t.filter.birth.particles_per_measurement = parse_int(key, value);
  } else if (key == "birth_weight") {
    t.filter.birth.birth_weight_total = parse_double(key, value);
  } else if (key == "resample_particles_per_target") {
    t.filter.resample_particles_per_target = parse_int(key, value);
  } else if (key == "checkpoint_horizon") {
    t.filter.checkpoint_horizon = parse_int(key, value);
  } else if (key == "ts1_particles") {
    t.ts.ts1_particle_count = parse_int(key, value);
  } else if (key == "ts2_samples") {
    t.ts.ts2_samples_per_decision = parse_int(key, value);
  } else if (key == "stochastic_rollouts") {
    t.policy.stochastic_rollouts = parse_bool(key, value);
  } else if (key == "fast_rollouts") {
    t.policy.fast_rollouts = parse_bool(key, value);
  } else if (key == "noisy_truth") {
    t.truth_motion.process_noise_cov =
        parse_bool(key, value) ? t.motion.process_noise_cov : Mat4{};
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "dump_particles") {
    config.dump_particles = parse_bool(key, value);
  } else {
    throw std::runtime_error("unknown config key '" + key + "'");
  }
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_key_value(config, key, value);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
}

std::string config_echo(const ExperimentConfig& config) {
  const TrialConfig& t = config.trial;
  std::ostringstream out;
  auto list = [](const auto& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  out << "policy = " << policy_name(t.policy.variant) << "\n"
      << "targets = " << t.target_count << "\n"
      << "agents = " << t.agent_count << "\n"
      << "steps = " << t.steps << "\n"
      << "trials = " << config.trials << "\n"
      << "seed = " << config.base_seed << "\n"
      << "comm_prob = " << t.channel.share_prob << "\n"
      << "delay_min = " << t.channel.delay_min << "\n"
      << "delay_max = " << t.channel.delay_max << "\n"
      << "space_width = " << t.space.width << "\n"
      << "space_length = " << t.space.length << "\n"
      << "scales = " << list(t.scales) << "\n"
      << "clutter_rates = " << list(t.clutter_rates) << "\n"
      << "detection_prob = " << t.sensor.detection_prob << "\n"
      << "noise_std = " << t.sensor.noise_std << "\n"
      << "v_max = " << t.v_max << "\n"
      << "ospa_cutoff = " << t.ospa_params.cutoff << "\n"
      << "ospa_order = " << t.ospa_params.order << "\n"
      << "renyi_alpha = " << t.policy.renyi_alpha << "\n"
      << "birth_particles_per_measurement = "
      << t.filter.birth.particles_per_measurement << "\n"
      << "birth_weight = " << t.filter.birth.birth_weight_total << "\n"
      << "resample_particles_per_target = "
      << t.filter.resample_particles_per_target << "\n"
      << "checkpoint_horizon = " << t.filter.checkpoint_horizon << "\n"
      << "ts1_particles = " << t.ts.ts1_particle_count << "\n"
      << "ts2_samples = " << t.ts.ts2_samples_per_decision << "\n"
      << "stochastic_rollouts = " << (t.policy.stochastic_rollouts ? "true" : "false")
      << "\n"
      << "fast_rollouts = " << (t.policy.fast_rollouts ? "true" : "false") << "\n"
      << "noisy_truth = "
      << (t.truth_motion.process_noise_cov == Mat4{} ? "false" : "true") << "\n";
  return out.str();
}

std::vector<StepAggregate> aggregate_traces(
    const std::vector<std::vector<TrialTrace>>& trial_traces) {
  if (trial_traces.empty()) return {};
  std::size_t steps = 0;
  for (const auto& trial : trial_traces)
    for (const auto& trace : trial) steps = std::max(steps, trace.rows.size());

  std::vector<StepAggregate> out(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    // Team mean per trial first; the standard error is across trials.
    std::vector<double> team_means;
    double meas_sum = 0.0, card_sum = 0.0;
    std::size_t cell_count = 0;
    for (const auto& trial : trial_traces) {
      double sum = 0.0;
      int n = 0;
      for (const auto& trace : trial) {
        if (s >= trace.rows.size()) continue;
        const TraceRow& row = trace.rows[s];
        sum += row.ospa;
        meas_sum += row.cumulative_measurements;
        card_sum += row.estimated_cardinality;
        ++n;
        ++cell_count;
      }
      if (n > 0) team_means.push_back(sum / n);
    }
    StepAggregate& agg = out[s];
    agg.step = static_cast<int>(s);
    double mean = 0.0;
    for (double v : team_means) mean += v;
    mean /= static_cast<double>(team_means.size());
    agg.mean_ospa = mean;
    if (team_means.size() > 1) {
      double ss = 0.0;
      for (double v : team_means) ss += (v - mean) * (v - mean);
      double var = ss / static_cast<double>(team_means.size() - 1);
      agg.se_ospa = std::sqrt(var / static_cast<double>(team_means.size()));
    }
    agg.mean_cumulative_measurements = meas_sum / static_cast<double>(cell_count);
    agg.mean_estimated_cardinality = card_sum / static_cast<double>(cell_count);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.trial_traces.reserve(static_cast<std::size_t>(config.trials));
  for (int trial = 0; trial < config.trials; ++trial) {
    std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(trial);
    TrialConfig trial_config = config.trial;
    std::shared_ptr<std::ofstream> dump;
    if (config.dump_particles) {
      std::filesystem::create_directories(config.out_dir);
      dump = std::make_shared<std::ofstream>(
          std::filesystem::path(config.out_dir) /
          ("particles_trial" + std::to_string(trial) + ".txt"));
      *dump << "t agent weight p_x p_y v_x v_y\n";
      trial_config.particle_dump = [dump](int step, int agent_id,
                                          const ParticlePhd& phd) {
        for (const Particle& p : phd.particles)
          *dump << step << ' ' << agent_id << ' ' << p.weight << ' '
                << p.state.px << ' ' << p.state.py << ' ' << p.state.vx << ' '
                << p.state.vy << '\n';
      };
    }
    result.trial_traces.push_back(run_trial(trial_config, seed));
  }
  result.aggregate = aggregate_traces(result.trial_traces);
  return result;
}

void write_results(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const TrialConfig& t = config.trial;
  const std::string policy = policy_name(t.policy.variant);

  {
    std::ofstream out(fs::path(config.out_dir) / "config.txt");
    out << config_echo(config);
  }
  {
    std::ofstream out(fs::path(config.out_dir) / "traces.csv");
    out << "seed,policy,J,k,share_prob,trial,agent,step,cum_meas,ospa,"
           "est_cardinality\n";
    for (std::size_t trial = 0; trial < result.trial_traces.size(); ++trial) {
      std::uint64_t seed = config.base_seed + trial;
      for (const TrialTrace& trace : result.trial_traces[trial]) {
        for (const TraceRow& row : trace.rows) {
          out << seed << ',' << policy << ',' << t.agent_count << ','
              << t.target_count << ',' << t.channel.share_prob << ',' << trial
              << ',' << trace.agent_id << ',' << row.step << ','
              << row.cumulative_measurements << ',' << row.ospa << ','
              << row.estimated_cardinality << '\n';
        }
      }
    }
  }
  {
    std::ofstream out(fs::path(config.out_dir) / "summary.csv");
    out << "policy,J,k,share_prob,step,mean_ospa,se_ospa,mean_cum_meas,"
           "mean_est_cardinality\n";
    for (const StepAggregate& agg : result.aggregate) {
      out << policy << ',' << t.agent_count << ',' << t.target_count << ','
          << t.channel.share_prob << ',' << agg.step << ',' << agg.mean_ospa
          << ',' << agg.se_ospa << ',' << agg.mean_cumulative_measurements
          << ',' << agg.mean_estimated_cardinality << '\n';
    }
  }
}

}  // namespace decster
