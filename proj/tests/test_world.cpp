#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "decster/world.hpp"

using namespace decster;

TEST_CASE("init_targets ranges") {
  RngStream rng(1, 1);
  SearchSpace space{16.0, 16.0};
  TargetSet ts = init_targets(space, 200, 0.1, rng);
  REQUIRE(ts.size() == 200);
  for (const TargetState& t : ts) {
    CHECK(t.px >= 0.0);
    CHECK(t.px <= 16.0);
    CHECK(t.py >= 0.0);
    CHECK(t.py <= 16.0);
    CHECK(std::abs(t.vx) <= 0.1);
    CHECK(std::abs(t.vy) <= 0.1);
  }
}

TEST_CASE("noise-free motion is the linear map") {
  MotionModel m;
  m.process_noise_cov = Mat4{};  // zero noise
  RngStream rng(2, 2);
  TargetSet ts{{1.0, 2.0, 0.05, -0.02}};
  TargetSet next = step_targets(ts, m, {16.0, 16.0}, rng);
  REQUIRE(next.size() == 1);
  CHECK(next[0].px == doctest::Approx(1.05));
  CHECK(next[0].py == doctest::Approx(1.98));
  CHECK(next[0].vx == doctest::Approx(0.05));
  CHECK(next[0].vy == doctest::Approx(-0.02));
}

TEST_CASE("boundary reflection negates the velocity component") {
  MotionModel m;
  m.process_noise_cov = Mat4{};
  RngStream rng(3, 3);
  // x would reach 16.05; reflected to 15.95 with vx negated.
  TargetSet ts{{15.95, 1.0, 0.1, 0.0}};
  TargetSet next = step_targets(ts, m, {16.0, 16.0}, rng);
  CHECK(next[0].px == doctest::Approx(15.95));
  CHECK(next[0].py == doctest::Approx(1.0));
  CHECK(next[0].vx == doctest::Approx(-0.1));
  CHECK(next[0].vy == doctest::Approx(0.0));

  // Low edge.
  TargetSet ts2{{0.02, 1.0, -0.1, 0.0}};
  TargetSet next2 = step_targets(ts2, m, {16.0, 16.0}, rng);
  CHECK(next2[0].px == doctest::Approx(0.08));
  CHECK(next2[0].vx == doctest::Approx(0.1));
}

TEST_CASE("targets stay inside the space under noisy motion") {
  MotionModel m;
  RngStream rng(4, 4);
  SearchSpace space{16.0, 16.0};
  TargetSet ts = init_targets(space, 30, 0.1, rng);
  for (int step = 0; step < 300; ++step) {
    ts = step_targets(ts, m, space, rng);
    for (const TargetState& t : ts) {
      CHECK(t.px >= 0.0);
      CHECK(t.px <= 16.0);
      CHECK(t.py >= 0.0);
      CHECK(t.py <= 16.0);
    }
  }
}

TEST_CASE("detection statistics match p_d") {
  SensingAction region{0.0, 0.0, 8, 0.0, false, false};
  SensorModel sensor;  // p_d = 0.9
  RngStream rng(5, 5);
  TargetSet one{{4.0, 4.0, 0.0, 0.0}};
  int detections = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    detections += static_cast<int>(!sense(one, region, sensor, rng).points.empty());
  const double rate = static_cast<double>(detections) / n;
  // 3 sigma around 0.9 with n = 2e4.
  CHECK(std::abs(rate - 0.9) < 3.0 * std::sqrt(0.9 * 0.1 / n));
}

TEST_CASE("measurement noise has the configured spread") {
  SensingAction region{0.0, 0.0, 8, 0.0, false, false};
  SensorModel sensor;
  sensor.detection_prob = 1.0;
  RngStream rng(6, 6);
  TargetSet one{{4.0, 4.0, 0.0, 0.0}};
  double sx = 0.0, sxx = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    MeasurementSet z = sense(one, region, sensor, rng);
    REQUIRE(z.points.size() == 1);
    sx += z.points[0][0] - 4.0;
    sxx += (z.points[0][0] - 4.0) * (z.points[0][0] - 4.0);
  }
  CHECK(std::abs(sx / n) < 0.01);
  CHECK(std::sqrt(sxx / n) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("clutter count is Poisson with the region rate") {
  SensingAction region{0.0, 0.0, 8, 5.0, false, false};
  SensorModel sensor;
  RngStream rng(7, 7);
  TargetSet empty;
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    MeasurementSet z = sense(empty, region, sensor, rng);
    mean += static_cast<double>(z.points.size());
    for (const auto& p : z.points) {
      CHECK(p[0] >= 0.0);
      CHECK(p[0] <= 8.0);
      CHECK(p[1] >= 0.0);
      CHECK(p[1] <= 8.0);
    }
  }
  mean /= n;
  CHECK(mean == doctest::Approx(5.0).epsilon(0.03));
}

TEST_CASE("out-of-region targets are never sensed") {
  SensingAction region{0.0, 0.0, 2, 0.0, false, false};
  SensorModel sensor;
  sensor.detection_prob = 1.0;
  RngStream rng(8, 8);
  TargetSet far{{10.0, 10.0, 0.0, 0.0}};
  for (int i = 0; i < 100; ++i)
    CHECK(sense(far, region, sensor, rng).points.empty());
}

TEST_CASE("measurements are clamped into the region") {
  SensingAction region{0.0, 0.0, 1, 0.0, false, false};
  SensorModel sensor;
  sensor.detection_prob = 1.0;
  sensor.noise_std = 2.0;  // noise large enough to leave the tile
  RngStream rng(9, 9);
  TargetSet one{{0.5, 0.5, 0.0, 0.0}};
  for (int i = 0; i < 500; ++i) {
    MeasurementSet z = sense(one, region, sensor, rng);
    for (const auto& p : z.points) {
      CHECK(p[0] >= 0.0);
      CHECK(p[0] <= 1.0);
      CHECK(p[1] >= 0.0);
      CHECK(p[1] <= 1.0);
    }
  }
}

TEST_CASE("cholesky of the default process noise reproduces Q") {
  MotionModel m;
  Mat4 l = cholesky4(m.process_noise_cov);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += l[i][k] * l[j][k];
      CHECK(s == doctest::Approx(m.process_noise_cov[i][j]).epsilon(1e-12));
    }
  // Zero matrix is accepted.
  Mat4 z = cholesky4(Mat4{});
  for (auto& row : z)
    for (double v : row) CHECK(v == 0.0);
}

TEST_CASE("truth rows serialize one line per target") {
  std::ostringstream os;
  write_truth_rows(os, 3, TargetSet{{1.0, 2.0, 0.5, -0.5}});
  CHECK(os.str() == "3 0 1 2 0.5 -0.5\n");
}
