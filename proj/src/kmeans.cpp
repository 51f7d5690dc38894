#include "decster/detail/kmeans.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace decster::detail {

namespace {

constexpr float kInf = std::numeric_limits<float>::max();

// One pass updating the nearest-centroid tables against centroid j.
void relax(const std::vector<float>& xs, const std::vector<float>& ys, float cx,
           float cy, int j, std::vector<float>& bestd2, std::vector<int>& besti) {
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const float dx = xs[i] - cx;
    const float dy = ys[i] - cy;
    const float d2 = dx * dx + dy * dy;
    if (d2 < bestd2[i]) {
      bestd2[i] = d2;
      besti[i] = j;
    }
  }
}

// Index with cumulative mass >= target; masses[i] >= 0.
std::size_t pick_by_mass(const std::vector<double>& masses, double total,
                         RngStream& rng) {
  const double target = rng.uniform01() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] <= 0.0) continue;
    acc += masses[i];
    last = i;
    if (acc >= target) return i;
  }
  return last;
}

struct Run {
  std::vector<double> cx, cy;
  std::vector<int> assign;
  std::vector<float> bestd2;
  double cost = 0.0;
};

Run lloyd(const std::vector<float>& xs, const std::vector<float>& ys,
          const std::vector<float>& ws, std::vector<double> cx,
          std::vector<double> cy, int max_iter) {
  const std::size_t n = xs.size();
  const int k = static_cast<int>(cx.size());
  Run run;
  run.assign.assign(n, -1);
  run.bestd2.assign(n, kInf);

  std::vector<double> sum_x(k), sum_y(k), sum_w(k);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::fill(run.bestd2.begin(), run.bestd2.end(), kInf);
    std::vector<int> next(n, 0);
    for (int j = 0; j < k; ++j)
      relax(xs, ys, static_cast<float>(cx[j]), static_cast<float>(cy[j]), j,
            run.bestd2, next);

    bool changed = (next != run.assign);
    run.assign.swap(next);
    if (!changed && iter > 0) break;

    std::fill(sum_x.begin(), sum_x.end(), 0.0);
    std::fill(sum_y.begin(), sum_y.end(), 0.0);
    std::fill(sum_w.begin(), sum_w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const int j = run.assign[i];
      const double w = ws[i];
      sum_x[j] += w * xs[i];
      sum_y[j] += w * ys[i];
      sum_w[j] += w;
    }
    for (int j = 0; j < k; ++j) {
      if (sum_w[j] > 0.0) {
        cx[j] = sum_x[j] / sum_w[j];
        cy[j] = sum_y[j] / sum_w[j];
      } else {
        // Empty cluster: move it onto the point with the largest weighted
        // residual.
        double worst = -1.0;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double r = static_cast<double>(ws[i]) * run.bestd2[i];
          if (r > worst) {
            worst = r;
            pick = i;
          }
        }
        cx[j] = xs[pick];
        cy[j] = ys[pick];
      }
    }
  }

  run.cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    run.cost += static_cast<double>(ws[i]) * run.bestd2[i];
  run.cx = std::move(cx);
  run.cy = std::move(cy);
  return run;
}

void seed_plus_plus(const std::vector<float>& xs, const std::vector<float>& ys,
                    const std::vector<float>& ws, int k, RngStream& rng,
                    std::vector<double>& cx, std::vector<double>& cy) {
  const std::size_t n = xs.size();
  std::vector<double> masses(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    masses[i] = ws[i];
    total += masses[i];
  }
  cx.clear();
  cy.clear();
  std::size_t first =
      total > 0.0 ? pick_by_mass(masses, total, rng) : rng.uniform_index(n);
  cx.push_back(xs[first]);
  cy.push_back(ys[first]);

  std::vector<float> bestd2(n, kInf);
  std::vector<int> besti(n, 0);
  for (int j = 1; j < k; ++j) {
    relax(xs, ys, static_cast<float>(cx.back()), static_cast<float>(cy.back()),
          j - 1, bestd2, besti);
    total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      masses[i] = static_cast<double>(ws[i]) * bestd2[i];
      total += masses[i];
    }
    std::size_t pick =
        total > 0.0 ? pick_by_mass(masses, total, rng) : rng.uniform_index(n);
    cx.push_back(xs[pick]);
    cy.push_back(ys[pick]);
  }
}

}  // namespace

KMeansResult weighted_kmeans(const std::vector<float>& xs,
                             const std::vector<float>& ys,
                             const std::vector<float>& ws, int k,
                             RngStream& rng, int restarts, int max_iter) {
  const std::size_t n = xs.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("weighted_kmeans: need 1 <= k <= n");

  Run best;
  best.cost = std::numeric_limits<double>::max();
  std::vector<double> cx, cy;
  for (int r = 0; r < restarts; ++r) {
    seed_plus_plus(xs, ys, ws, k, rng, cx, cy);
    Run run = lloyd(xs, ys, ws, cx, cy, max_iter);
    if (run.cost < best.cost) best = std::move(run);
  }
  return {std::move(best.cx), std::move(best.cy), std::move(best.assign),
          best.cost};
}

KMeansResult lloyd_from(const std::vector<float>& xs,
                        const std::vector<float>& ys,
                        const std::vector<float>& ws,
                        std::vector<double> init_cx, std::vector<double> init_cy,
                        int max_iter) {
  Run run = lloyd(xs, ys, ws, std::move(init_cx), std::move(init_cy), max_iter);
  return {std::move(run.cx), std::move(run.cy), std::move(run.assign), run.cost};
}

}  // namespace decster::detail
