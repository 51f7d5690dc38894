#pragma once

#include <vector>

#include "decster/rng.hpp"

namespace decster::detail {

// 2D weighted k-means. Positions are held as float arrays so the assignment
// loops vectorize; accumulation is in double.
struct KMeansResult {
  std::vector<double> cx, cy;  // k centroids
  std::vector<int> assign;     // per-point nearest centroid
  double cost = 0.0;           // sum of w_i * d^2(x_i, c_assign(i))
};

// k-means++-style weighted seeding followed by Lloyd iterations, best of
// `restarts` runs by weighted within-cluster cost. Requires 1 <= k <= n.
KMeansResult weighted_kmeans(const std::vector<float>& xs,
                             const std::vector<float>& ys,
                             const std::vector<float>& ws, int k,
                             RngStream& rng, int restarts = 3,
                             int max_iter = 50);

// Single Lloyd run from the given initial centroids (no seeding, no restarts).
KMeansResult lloyd_from(const std::vector<float>& xs,
                        const std::vector<float>& ys,
                        const std::vector<float>& ws,
                        std::vector<double> init_cx, std::vector<double> init_cy,
                        int max_iter = 50);

}  // namespace decster::detail
