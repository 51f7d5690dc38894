#include "decster/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "decster/detail/kmeans.hpp"

namespace decster {

namespace {

TargetState uniform_state(const SearchSpace& space, double v_max, RngStream& rng) {
  TargetState s;
  s.px = rng.uniform(0.0, space.width);
  s.py = rng.uniform(0.0, space.length);
  s.vx = rng.uniform(-v_max, v_max);
  s.vy = rng.uniform(-v_max, v_max);
  return s;
}

// Partial Fisher-Yates: first `take` entries of a random draw without
// replacement from pool indices 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t take,
                                                    RngStream& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  take = std::min(take, n);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

}  // namespace

TargetSet ts_phd_1(const ParticlePhd& phd, const TsConfig& config, RngStream& rng) {
  if (config.ts1_particle_count < 1)
    throw std::invalid_argument("ts_phd_1: ts1_particle_count must be >= 1");
  if (phd.particles.empty()) return {};
  const double total = phd.total_weight();
  if (total <= 0.0) return {};

  std::vector<double> cum(phd.particles.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < phd.particles.size(); ++i) {
    acc += phd.particles[i].weight;
    cum[i] = acc;
  }

  const int rho = config.ts1_particle_count;
  std::vector<const TargetState*> drawn(rho);
  double drawn_weight_sum = 0.0;
  for (int i = 0; i < rho; ++i) {
    const double u = rng.uniform01() * total;
    const std::size_t j =
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    const std::size_t idx = std::min(j, phd.particles.size() - 1);
    drawn[i] = &phd.particles[idx].state;
    drawn_weight_sum += phd.particles[idx].weight;
  }

  const long n_tilde = config.ts1_cardinality_from_drawn
                           ? round_half_up(drawn_weight_sum)
                           : round_half_up(total);
  if (n_tilde < 1) return {};
  const int k = static_cast<int>(std::min<long>(n_tilde, rho));

  std::vector<float> xs(rho), ys(rho), ws(rho, 1.0f);
  for (int i = 0; i < rho; ++i) {
    xs[i] = static_cast<float>(drawn[i]->px);
    ys[i] = static_cast<float>(drawn[i]->py);
  }
  const auto km = detail::weighted_kmeans(xs, ys, ws, k, rng);

  std::vector<double> cnt(k, 0.0), svx(k, 0.0), svy(k, 0.0);
  for (int i = 0; i < rho; ++i) {
    const int j = km.assign[i];
    cnt[j] += 1.0;
    svx[j] += drawn[i]->vx;
    svy[j] += drawn[i]->vy;
  }
  TargetSet out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) {
    out.push_back({km.cx[j], km.cy[j], cnt[j] > 0.0 ? svx[j] / cnt[j] : 0.0,
                   cnt[j] > 0.0 ? svy[j] / cnt[j] : 0.0});
  }
  return out;
}

// Composition step shared by both TS-II entry points. When `n_tilde` is
// negative the cardinality is drawn here.
static TargetSet ts2_compose(const ParticlePhd& phd, const TargetSet& estimates,
                             const SearchSpace& space, const TsConfig& config,
                             RngStream& rng, int n_tilde) {
  const double n_hat = phd.total_weight();
  if (n_tilde < 0) n_tilde = rng.poisson(n_hat);
  if (n_tilde == 0) return {};

  const std::size_t pool_size =
      config.ts2_random_pool_size > 0
          ? static_cast<std::size_t>(config.ts2_random_pool_size)
          : static_cast<std::size_t>(4.0 * std::ceil(n_hat) + 8.0);
  TargetSet pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i)
    pool.push_back(uniform_state(space, config.v_max, rng));

  TargetSet out;
  out.reserve(n_tilde);
  const std::size_t from_est =
      std::min<std::size_t>(n_tilde, estimates.size());
  for (std::size_t i : sample_without_replacement(estimates.size(), from_est, rng))
    out.push_back(estimates[i]);

  if (out.size() < static_cast<std::size_t>(n_tilde)) {
    const std::size_t rem = static_cast<std::size_t>(n_tilde) - out.size();
    for (std::size_t i :
         sample_without_replacement(pool.size(), std::min(rem, pool.size()), rng))
      out.push_back(pool[i]);
    // Pool underfilled: top up with fresh uniform draws.
    while (out.size() < static_cast<std::size_t>(n_tilde))
      out.push_back(uniform_state(space, config.v_max, rng));
  }
  return out;
}

TargetSet ts_phd_2(const ParticlePhd& phd, const SearchSpace& space,
                   const TsConfig& config, RngStream& rng) {
  const int n_tilde = rng.poisson(phd.total_weight());
  if (n_tilde == 0) return {};
  const TargetSet estimates = extract_targets(phd, rng);
  return ts2_compose(phd, estimates, space, config, rng, n_tilde);
}

TargetSet ts_phd_2_with_estimates(const ParticlePhd& phd,
                                  const TargetSet& estimates,
                                  const SearchSpace& space,
                                  const TsConfig& config, RngStream& rng) {
  return ts2_compose(phd, estimates, space, config, rng, -1);
}

}  // namespace decster
