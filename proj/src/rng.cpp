#include "decster/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace decster {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

RngStream::RngStream(std::uint64_t key) : key_(key), engine_(splitmix64(key)) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : RngStream(mix64(seed, stream_id)) {}

RngStream RngStream::child(std::uint64_t a, std::uint64_t b) const {
  return RngStream(mix64(mix64(key_, a), b));
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform01() {
  // 53-bit mantissa, value in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double RngStream::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

int RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 500.0) {
    // Knuth's multiplication method; fine for the rates used here.
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }
  // Normal approximation for very large rates.
  const double draw = normal(mean, std::sqrt(mean));
  return draw < 0.0 ? 0 : static_cast<int>(std::floor(draw + 0.5));
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  std::size_t idx = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return idx >= n ? n - 1 : idx;
}

}  // namespace decster
