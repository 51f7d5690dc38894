#include "decster/phd.hpp"

#include <cmath>
#include <stdexcept>

#include "decster/detail/kmeans.hpp"

namespace decster {

namespace {

bool measurement_in_region(const SensingAction& a, const std::array<double, 2>& z) {
  const double s = static_cast<double>(a.scale);
  return z[0] >= a.origin_x && z[0] <= a.origin_x + s && z[1] >= a.origin_y &&
         z[1] <= a.origin_y + s;
}

}  // namespace

ParticlePhd predict(const ParticlePhd& phd, const MotionModel& model,
                    const std::vector<std::pair<const MeasurementSet*, BirthConfig>>& births,
                    RngStream& rng, const SearchSpace* space) {
  const Mat4 chol = cholesky4(model.process_noise_cov);
  const Mat4& f = model.transition;
  ParticlePhd out;
  out.particles.reserve(phd.particles.size());
  for (const Particle& p : phd.particles) {
    const std::array<double, 4> v{p.state.px, p.state.py, p.state.vx, p.state.vy};
    std::array<double, 4> next{0, 0, 0, 0};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) next[r] += f[r][c] * v[c];
    const std::array<double, 4> z{rng.normal(), rng.normal(), rng.normal(),
                                  rng.normal()};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c <= r; ++c) next[r] += chol[r][c] * z[c];
    TargetState s{next[0], next[1], next[2], next[3]};
    if (space) reflect_state(s, *space);
    out.particles.push_back({p.weight * model.survival_prob, s});
  }
  for (const auto& [zset, cfg] : births) {
    if (cfg.particles_per_measurement < 1)
      throw std::invalid_argument("predict: particles_per_measurement must be >= 1");
    const double w =
        cfg.birth_weight_total / static_cast<double>(cfg.particles_per_measurement);
    for (const auto& z : zset->points) {
      for (int i = 0; i < cfg.particles_per_measurement; ++i) {
        TargetState s;
        s.px = rng.normal(z[0], cfg.position_std);
        s.py = rng.normal(z[1], cfg.position_std);
        s.vx = rng.normal(0.0, cfg.velocity_std);
        s.vy = rng.normal(0.0, cfg.velocity_std);
        if (space) reflect_state(s, *space);
        out.particles.push_back({w, s});
      }
    }
  }
  return out;
}

ParticlePhd update(const ParticlePhd& phd, const SensingAction& action,
                   const SensorModel& sensor, const MeasurementSet& measurements) {
  for (const auto& z : measurements.points)
    if (!measurement_in_region(action, z))
      throw std::invalid_argument("update: measurement outside action region");

  const double pd = sensor.detection_prob;
  const double sigma2 = sensor.noise_std * sensor.noise_std;
  const double kappa = action.clutter_rate / action.area();

  ParticlePhd out = phd;
  std::vector<std::size_t> inside;
  inside.reserve(out.particles.size());
  for (std::size_t i = 0; i < out.particles.size(); ++i)
    if (action_contains(action, out.particles[i].state)) inside.push_back(i);

  if (measurements.points.empty()) {
    for (std::size_t i : inside) out.particles[i].weight *= (1.0 - pd);
    return out;
  }

  const std::size_t nz = measurements.points.size();
  const std::size_t ni = inside.size();
  // psi[z][i] for in-region particles only; outside particles have psi = 0.
  std::vector<double> psi(nz * ni);
  std::vector<double> eta(nz);
  const double norm = sigma2 > 0.0 ? 1.0 / (2.0 * M_PI * sigma2) : 0.0;
  for (std::size_t zi = 0; zi < nz; ++zi) {
    const auto& z = measurements.points[zi];
    double acc = 0.0;
    for (std::size_t ii = 0; ii < ni; ++ii) {
      const Particle& p = out.particles[inside[ii]];
      const auto h = sensor.project(p.state);
      const double dx = z[0] - h[0];
      const double dy = z[1] - h[1];
      double g;
      if (sigma2 > 0.0) {
        g = norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma2));
      } else {
        // Degenerate noiseless likelihood: point mass at the projection.
        g = (dx == 0.0 && dy == 0.0) ? 1.0 : 0.0;
      }
      const double v = pd * g;
      psi[zi * ni + ii] = v;
      acc += v * p.weight;
    }
    eta[zi] = kappa + acc;
  }
  for (std::size_t ii = 0; ii < ni; ++ii) {
    double factor = 1.0 - pd;
    for (std::size_t zi = 0; zi < nz; ++zi) {
      if (eta[zi] > 0.0) factor += psi[zi * ni + ii] / eta[zi];
    }
    out.particles[inside[ii]].weight *= factor;
  }
  return out;
}

double expected_cardinality(const ParticlePhd& phd, const SensingAction* region) {
  if (!region) return phd.total_weight();
  double w = 0.0;
  for (const Particle& p : phd.particles)
    if (action_contains(*region, p.state)) w += p.weight;
  return w;
}

ParticlePhd resample(const ParticlePhd& phd, int particles_per_target,
                     RngStream& rng) {
  if (particles_per_target < 1)
    throw std::invalid_argument("resample: particles_per_target must be >= 1");
  const double total = phd.total_weight();
  if (total <= 0.0) return {};

  const long targets = std::max(1L, round_half_up(total));
  const std::size_t n = static_cast<std::size_t>(targets) *
                        static_cast<std::size_t>(particles_per_target);
  const double step = total / static_cast<double>(n);
  double pointer = rng.uniform01() * step;

  ParticlePhd out;
  out.particles.reserve(n);
  const double w_out = total / static_cast<double>(n);
  double cum = phd.particles.empty() ? 0.0 : phd.particles[0].weight;
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double u = pointer + static_cast<double>(m) * step;
    while (u > cum && i + 1 < phd.particles.size()) {
      ++i;
      cum += phd.particles[i].weight;
    }
    out.particles.push_back({w_out, phd.particles[i].state});
  }
  return out;
}

namespace {

void particle_arrays(const ParticlePhd& phd, std::vector<float>& xs,
                     std::vector<float>& ys, std::vector<float>& ws) {
  const std::size_t n = phd.particles.size();
  xs.resize(n);
  ys.resize(n);
  ws.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = static_cast<float>(phd.particles[i].state.px);
    ys[i] = static_cast<float>(phd.particles[i].state.py);
    ws[i] = static_cast<float>(phd.particles[i].weight);
  }
}

TargetSet cluster_states(const ParticlePhd& phd, const detail::KMeansResult& km) {
  const int k = static_cast<int>(km.cx.size());
  std::vector<double> sw(k, 0.0), svx(k, 0.0), svy(k, 0.0);
  for (std::size_t i = 0; i < phd.particles.size(); ++i) {
    const int j = km.assign[i];
    const Particle& p = phd.particles[i];
    sw[j] += p.weight;
    svx[j] += p.weight * p.state.vx;
    svy[j] += p.weight * p.state.vy;
  }
  TargetSet out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) {
    out.push_back({km.cx[j], km.cy[j], sw[j] > 0.0 ? svx[j] / sw[j] : 0.0,
                   sw[j] > 0.0 ? svy[j] / sw[j] : 0.0});
  }
  return out;
}

}  // namespace

TargetSet extract_targets(const ParticlePhd& phd, RngStream& rng) {
  const double total = phd.total_weight();
  const long n_hat = round_half_up(total);
  if (n_hat < 1 || phd.particles.empty()) return {};
  const int k = static_cast<int>(
      std::min<long>(n_hat, static_cast<long>(phd.particles.size())));

  std::vector<float> xs, ys, ws;
  particle_arrays(phd, xs, ys, ws);
  const auto km = detail::weighted_kmeans(xs, ys, ws, k, rng);
  return cluster_states(phd, km);
}

TargetSet extract_targets_warm(const ParticlePhd& phd, const TargetSet& init,
                               const MeasurementSet& extra_seeds,
                               RngStream& rng) {
  const double total = phd.total_weight();
  const long n_hat = round_half_up(total);
  if (n_hat < 1 || phd.particles.empty()) return {};
  const int k = static_cast<int>(
      std::min<long>(n_hat, static_cast<long>(phd.particles.size())));

  std::vector<double> cx, cy;
  cx.reserve(k);
  cy.reserve(k);
  for (const TargetState& s : init) {
    if (static_cast<int>(cx.size()) == k) break;
    cx.push_back(s.px);
    cy.push_back(s.py);
  }
  for (const auto& z : extra_seeds.points) {
    if (static_cast<int>(cx.size()) == k) break;
    cx.push_back(z[0]);
    cy.push_back(z[1]);
  }
  while (static_cast<int>(cx.size()) < k) {
    // Weight-proportional particle pick for any remaining seeds.
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    const Particle* pick = &phd.particles.back();
    for (const Particle& p : phd.particles) {
      acc += p.weight;
      if (acc >= u) {
        pick = &p;
        break;
      }
    }
    cx.push_back(pick->state.px);
    cy.push_back(pick->state.py);
  }

  std::vector<float> xs, ys, ws;
  particle_arrays(phd, xs, ys, ws);
  // Warm-started refinement: a handful of Lloyd sweeps is enough to settle
  // the centroids around the seeded estimate; this call sits on the rollout
  // hot path, so the iteration budget is deliberately small.
  const auto km = detail::lloyd_from(xs, ys, ws, std::move(cx), std::move(cy), 5);
  return cluster_states(phd, km);
}

}  // namespace decster
