#include "decster/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "decster/detail/assignment.hpp"

namespace decster {

namespace {

constexpr std::uint64_t kRolloutStreamTag = 0x726f6c6cULL;  // per-action children

double clamped_dist_pow(const TargetState& a, const TargetState& b,
                        const OspaParams& params) {
  const double dx = a.px - b.px;
  const double dy = a.py - b.py;
  const double d = std::min(params.cutoff, std::sqrt(dx * dx + dy * dy));
  return std::pow(d, params.order);
}

// Per-scale tiling view over the lattice plus particle buckets for one cloud.
struct Level {
  int scale = 1;
  int cols = 0;
  int rows = 0;
  int first_action = 0;
  std::vector<double> tile_mass;
  std::vector<std::vector<int>> tile_particles;
};

int tile_of(const Level& lv, const SearchSpace& space, double x, double y) {
  if (x < 0.0 || x > space.width || y < 0.0 || y > space.length) return -1;
  const double s = static_cast<double>(lv.scale);
  const int col = std::min(static_cast<int>(x / s), lv.cols - 1);
  const int row = std::min(static_cast<int>(y / s), lv.rows - 1);
  return row * lv.cols + col;
}

// Assumes the build_action_space layout: scale ascending, row-major tiles.
std::vector<Level> build_levels(const ActionSpace& actions,
                                const SearchSpace& space,
                                const ParticlePhd& cloud) {
  std::vector<Level> levels;
  for (std::size_t i = 0; i < actions.actions.size(); ++i) {
    const SensingAction& a = actions.actions[i];
    if (levels.empty() || levels.back().scale != a.scale) {
      Level lv;
      lv.scale = a.scale;
      lv.cols = static_cast<int>(space.width) / a.scale;
      lv.rows = static_cast<int>(space.length) / a.scale;
      lv.first_action = static_cast<int>(i);
      lv.tile_mass.assign(static_cast<std::size_t>(lv.cols) * lv.rows, 0.0);
      lv.tile_particles.assign(static_cast<std::size_t>(lv.cols) * lv.rows, {});
      levels.push_back(std::move(lv));
    }
  }
  for (Level& lv : levels) {
    for (std::size_t i = 0; i < cloud.particles.size(); ++i) {
      const Particle& p = cloud.particles[i];
      const int t = tile_of(lv, space, p.state.px, p.state.py);
      if (t < 0) continue;
      lv.tile_mass[t] += p.weight;
      lv.tile_particles[t].push_back(static_cast<int>(i));
    }
  }
  return levels;
}

// (level index, tile index) for an action, given the lattice layout.
std::pair<int, int> locate(const std::vector<Level>& levels, int action_index) {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Level& lv = levels[l];
    const int count = lv.cols * lv.rows;
    if (action_index < lv.first_action + count)
      return {static_cast<int>(l), action_index - lv.first_action};
  }
  throw std::logic_error("locate: action index outside lattice");
}

// Sum of the per-measurement normalized contributions plus miss-thinning:
// total updated weight without materializing the updated cloud.
double updated_total_weight(const ParticlePhd& cloud,
                            const std::vector<int>& inside, double total,
                            double mass_in, const SensingAction& action,
                            const SensorModel& sensor,
                            const MeasurementSet& zbar) {
  const double pd = sensor.detection_prob;
  double w = total - pd * mass_in;
  const double sigma2 = sensor.noise_std * sensor.noise_std;
  const double norm = sigma2 > 0.0 ? 1.0 / (2.0 * M_PI * sigma2) : 0.0;
  const double kappa = action.clutter_rate / action.area();
  for (const auto& z : zbar.points) {
    double s = 0.0;
    for (int i : inside) {
      const Particle& p = cloud.particles[i];
      const double dx = z[0] - p.state.px;
      const double dy = z[1] - p.state.py;
      const double g = sigma2 > 0.0
                           ? norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma2))
                           : ((dx == 0.0 && dy == 0.0) ? 1.0 : 0.0);
      s += pd * g * p.weight;
    }
    if (kappa + s > 0.0) w += s / (kappa + s);
  }
  return w;
}

std::size_t pick_extreme(const std::vector<double>& scores, bool minimize,
                         RngStream& rng) {
  double best = scores[0];
  for (double s : scores) best = minimize ? std::min(best, s) : std::max(best, s);
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] == best) ties.push_back(i);
  return ties[rng.uniform_index(ties.size())];
}

void fill_diag(DecisionDiagnostics* diag, const std::vector<double>& scores,
               int chosen, bool minimize) {
  if (!diag) return;
  diag->chosen_index = chosen;
  diag->scores = scores;
  std::vector<int> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  const std::size_t top = std::min<std::size_t>(10, order.size());
  std::partial_sort(order.begin(), order.begin() + top, order.end(),
                    [&](int a, int b) {
                      return minimize ? scores[a] < scores[b]
                                      : scores[a] > scores[b];
                    });
  diag->top_scores.clear();
  for (std::size_t i = 0; i < top; ++i)
    diag->top_scores.emplace_back(order[i], scores[order[i]]);
}

SensingAction decster_select(const PolicyKind& policy, const ParticlePhd& pred,
                             const SearchSpace& space, const ActionSpace& actions,
                             const SensorModel& sensor, const TsConfig& ts,
                             const OspaParams& params, RngStream& rng,
                             DecisionDiagnostics* diag) {
  const bool card_only = policy.variant == PolicyVariant::DECSTER_C;
  const int replicates = policy.variant == PolicyVariant::DECSTER_TS1
                             ? 1
                             : std::max(1, ts.ts2_samples_per_decision);

  TargetSet estimates;  // hoisted TS-II estimate set
  if (policy.variant != PolicyVariant::DECSTER_TS1)
    estimates = extract_targets(pred, rng);

  std::vector<TargetSet> samples;
  samples.reserve(replicates);
  for (int r = 0; r < replicates; ++r) {
    samples.push_back(policy.variant == PolicyVariant::DECSTER_TS1
                          ? ts_phd_1(pred, ts, rng)
                          : ts_phd_2_with_estimates(pred, estimates, space, ts, rng));
  }

  TargetSet y_base;  // no-interaction estimate, shared by cache hits
  if (!card_only) y_base = extract_targets(pred, rng);

  const std::vector<Level> levels = build_levels(actions, space, pred);
  const double total = pred.total_weight();
  const long n_hat = round_half_up(total);
  const double pd = sensor.detection_prob;

  const std::size_t n_actions = actions.actions.size();
  std::vector<double> scores(n_actions, 0.0);

  for (int r = 0; r < replicates; ++r) {
    const TargetSet& sample = samples[r];
    // Sample buckets per level.
    std::vector<std::vector<std::vector<int>>> members(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l)
      members[l].assign(levels[l].tile_mass.size(), {});
    for (std::size_t i = 0; i < sample.size(); ++i) {
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const int t = tile_of(levels[l], space, sample[i].px, sample[i].py);
        if (t >= 0) members[l][t].push_back(static_cast<int>(i));
      }
    }

    const double v_base =
        card_only
            ? ospa_cardinality_term(sample.size(),
                                    static_cast<std::size_t>(std::max(0L, n_hat)),
                                    params)
            : ospa(sample, y_base, params);

    for (std::size_t a = 0; a < n_actions; ++a) {
      const auto [l, t] = locate(levels, static_cast<int>(a));
      const std::vector<int>& in_sample = members[l][t];
      const double mass_in = levels[l].tile_mass[t];
      const SensingAction& act = actions.actions[a];

      if (!policy.stochastic_rollouts && in_sample.empty()) {
        if (mass_in == 0.0) {
          scores[a] += v_base;
          continue;
        }
        if (!card_only && policy.fast_rollouts &&
            round_half_up(total - pd * mass_in) == n_hat) {
          scores[a] += v_base;
          continue;
        }
      }

      RngStream rr = rng.child(kRolloutStreamTag + a, static_cast<std::uint64_t>(r));
      MeasurementSet zbar;
      if (policy.stochastic_rollouts) {
        zbar = sense(sample, act, sensor, rr);
      } else {
        for (int i : in_sample) {
          const auto h = sensor.project(sample[i]);
          zbar.points.push_back(h);
        }
      }

      if (card_only) {
        const double w_upd = updated_total_weight(
            pred, levels[l].tile_particles[t], total, mass_in, act, sensor, zbar);
        scores[a] += ospa_cardinality_term(
            sample.size(), static_cast<std::size_t>(std::max(0L, round_half_up(w_upd))),
            params);
        continue;
      }

      const ParticlePhd upd = update(pred, act, sensor, zbar);
      const TargetSet y = policy.fast_rollouts
                              ? extract_targets_warm(upd, y_base, zbar, rr)
                              : extract_targets(upd, rr);
      scores[a] += ospa(sample, y, params);
    }
  }
  for (double& s : scores) s /= static_cast<double>(replicates);

  const std::size_t chosen = pick_extreme(scores, /*minimize=*/true, rng);
  fill_diag(diag, scores, static_cast<int>(chosen), true);
  if (diag) {
    diag->sample_cardinalities.clear();
    for (const TargetSet& s : samples)
      diag->sample_cardinalities.push_back(static_cast<int>(s.size()));
  }
  return actions.actions[chosen];
}

SensingAction renyi_select(const PolicyKind& policy, const ParticlePhd& phd,
                           const ParticlePhd& pred, const SearchSpace& space,
                           const ActionSpace& actions, const SensorModel& sensor,
                           const TsConfig& ts, RngStream& rng,
                           DecisionDiagnostics* diag) {
  const double alpha = policy.renyi_alpha;
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("renyi_select: alpha must lie in (0, 1)");

  // RENYI treats its own estimate as ground truth; TS-RENYI swaps in one
  // TS-PHD-II sample from the predicted PHD.
  const TargetSet reference = policy.variant == PolicyVariant::RENYI
                                  ? extract_targets(phd, rng)
                                  : ts_phd_2(pred, space, ts, rng);

  const std::vector<Level> levels = build_levels(actions, space, pred);
  const double total = pred.total_weight();
  const double pd = sensor.detection_prob;
  const double sigma2 = sensor.noise_std * sensor.noise_std;
  const double norm = sigma2 > 0.0 ? 1.0 / (2.0 * M_PI * sigma2) : 0.0;

  // Reference states bucketed per level.
  std::vector<std::vector<std::vector<int>>> members(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l)
    members[l].assign(levels[l].tile_mass.size(), {});
  for (std::size_t i = 0; i < reference.size(); ++i)
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const int t = tile_of(levels[l], space, reference[i].px, reference[i].py);
      if (t >= 0) members[l][t].push_back(static_cast<int>(i));
    }

  const std::size_t n_actions = actions.actions.size();
  std::vector<double> scores(n_actions, 0.0);
  std::vector<double> factor;  // per in-region particle weight multiplier

  for (std::size_t a = 0; a < n_actions; ++a) {
    const auto [l, t] = locate(levels, static_cast<int>(a));
    const std::vector<int>& inside = levels[l].tile_particles[t];
    const std::vector<int>& in_ref = members[l][t];
    const double mass_in = levels[l].tile_mass[t];
    if (in_ref.empty() && mass_in == 0.0) {
      scores[a] = 0.0;  // updated weights equal predicted weights
      continue;
    }
    const SensingAction& act = actions.actions[a];
    const double kappa = act.clutter_rate / act.area();

    factor.assign(inside.size(), 1.0 - pd);
    for (int zi : in_ref) {
      const auto z = sensor.project(reference[zi]);
      double eta = kappa;
      std::vector<double> psi(inside.size());
      for (std::size_t ii = 0; ii < inside.size(); ++ii) {
        const Particle& p = pred.particles[inside[ii]];
        const double dx = z[0] - p.state.px;
        const double dy = z[1] - p.state.py;
        const double g =
            sigma2 > 0.0 ? norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma2))
                         : ((dx == 0.0 && dy == 0.0) ? 1.0 : 0.0);
        psi[ii] = pd * g;
        eta += psi[ii] * p.weight;
      }
      if (eta > 0.0)
        for (std::size_t ii = 0; ii < inside.size(); ++ii)
          factor[ii] += psi[ii] / eta;
    }

    double sum_prime_in = 0.0;
    double sum_cross_in = 0.0;
    for (std::size_t ii = 0; ii < inside.size(); ++ii) {
      const double w = pred.particles[inside[ii]].weight;
      sum_prime_in += w * factor[ii];
      // w'^alpha * w^(1-alpha) = w * factor^alpha
      sum_cross_in += w * std::pow(factor[ii], alpha);
    }
    const double out_mass = total - mass_in;
    scores[a] = total + alpha / (1.0 - alpha) * (out_mass + sum_prime_in) -
                1.0 / (1.0 - alpha) * (out_mass + sum_cross_in);
  }

  const std::size_t chosen = pick_extreme(scores, /*minimize=*/false, rng);
  fill_diag(diag, scores, static_cast<int>(chosen), false);
  if (diag) {
    diag->sample_cardinalities.assign(1, static_cast<int>(reference.size()));
  }
  return actions.actions[chosen];
}

}  // namespace

double ospa_cardinality_term(std::size_t size_a, std::size_t size_b,
                             const OspaParams& params) {
  const std::size_t m = std::min(size_a, size_b);
  const std::size_t n = std::max(size_a, size_b);
  if (n == 0) return 0.0;
  return std::pow(params.cutoff, params.order) * static_cast<double>(n - m) /
         static_cast<double>(n);
}

double ospa(const TargetSet& a, const TargetSet& b, const OspaParams& params) {
  if (params.cutoff <= 0.0 || params.order < 1.0)
    throw std::invalid_argument("ospa: need cutoff > 0 and order >= 1");
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return params.cutoff;

  const TargetSet& small = a.size() <= b.size() ? a : b;
  const TargetSet& large = a.size() <= b.size() ? b : a;
  const std::size_t m = small.size();
  const std::size_t n = large.size();

  std::vector<std::vector<double>> cost(m, std::vector<double>(n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i][j] = clamped_dist_pow(small[i], large[j], params);

  const double assignment = detail::min_cost_assignment(cost);
  const double total = assignment + std::pow(params.cutoff, params.order) *
                                        static_cast<double>(n - m);
  return std::pow(total / static_cast<double>(n), 1.0 / params.order);
}

double renyi_divergence(const std::vector<double>& predicted_weights,
                        const std::vector<double>& updated_weights,
                        double alpha) {
  if (predicted_weights.size() != updated_weights.size())
    throw std::invalid_argument("renyi_divergence: weight vectors differ in length");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("renyi_divergence: alpha must lie in (0, 1)");
  double sum_bar = 0.0, sum_prime = 0.0, sum_cross = 0.0;
  for (std::size_t i = 0; i < predicted_weights.size(); ++i) {
    sum_bar += predicted_weights[i];
    sum_prime += updated_weights[i];
    sum_cross += std::pow(updated_weights[i], alpha) *
                 std::pow(predicted_weights[i], 1.0 - alpha);
  }
  return sum_bar + alpha / (1.0 - alpha) * sum_prime -
         1.0 / (1.0 - alpha) * sum_cross;
}

TargetSet pseudo_rollout(const ParticlePhd& predicted, const TargetSet& sample,
                         const SensingAction& action, const SensorModel& sensor,
                         RngStream& rng, bool stochastic) {
  MeasurementSet zbar;
  if (stochastic) {
    zbar = sense(sample, action, sensor, rng);
  } else {
    for (const TargetState& s : sample)
      if (action_contains(action, s)) zbar.points.push_back(sensor.project(s));
  }
  const ParticlePhd upd = update(predicted, action, sensor, zbar);
  return extract_targets(upd, rng);
}

SensingAction select_action(const PolicyKind& policy, const ParticlePhd& phd,
                            const SearchSpace& space, const ActionSpace& actions,
                            const SensorModel& sensor, const MotionModel& motion,
                            const TsConfig& ts, const OspaParams& ospa_params,
                            RngStream& rng, DecisionDiagnostics* diag) {
  if (actions.actions.empty())
    throw std::invalid_argument("select_action: empty action space");

  if (policy.variant == PolicyVariant::RANDOM) {
    const std::size_t idx = rng.uniform_index(actions.actions.size());
    if (diag) {
      diag->chosen_index = static_cast<int>(idx);
      diag->scores.clear();
      diag->top_scores.clear();
      diag->sample_cardinalities.clear();
    }
    return actions.actions[idx];
  }

  const ParticlePhd pred = predict(phd, motion, {}, rng, &space);
  switch (policy.variant) {
    case PolicyVariant::DECSTER_TS1:
    case PolicyVariant::DECSTER_TS2:
    case PolicyVariant::DECSTER_C:
      return decster_select(policy, pred, space, actions, sensor, ts,
                            ospa_params, rng, diag);
    case PolicyVariant::RENYI:
    case PolicyVariant::TS_RENYI:
      return renyi_select(policy, phd, pred, space, actions, sensor, ts, rng,
                          diag);
    default:
      throw std::logic_error("select_action: unknown policy variant");
  }
}

}  // namespace decster
