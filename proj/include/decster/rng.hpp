#pragma once

#include <cstdint>
#include <random>

namespace decster {

// Seedable deterministic random stream. All distributions are hand-rolled on
// top of mt19937_64 (whose output sequence is fixed by the standard), so that
// identical (seed, stream id, call sequence) reproduces the same draws on any
// platform. Streams are single-owner; derive independent child streams with
// child() instead of sharing one.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  // Derived stream keyed by (a, b). Does not consume this stream's state.
  RngStream child(std::uint64_t a, std::uint64_t b = 0) const;

  std::uint64_t next_u64();
  double uniform01();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();  // standard normal, Box-Muller with cached spare
  double normal(double mean, double stddev);
  int poisson(double mean);
  std::size_t uniform_index(std::size_t n);  // {0, ..., n-1}, n >= 1

  std::uint64_t key() const { return key_; }

 private:
  explicit RngStream(std::uint64_t key);

  std::uint64_t key_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64-style key mixing used to derive stream ids.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

}  // namespace decster
