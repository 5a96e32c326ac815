#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace comrisk {

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view s);

/// Deterministic random stream. Every consumer derives its own stream from
/// (seed, purpose name), so adding a consumer never perturbs another one.
///
/// Distributions are implemented here rather than with <random>'s
/// distribution classes, whose output is implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Knuth's multiplication method; fine for the small rates used here.
  int poisson(double rate);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace comrisk
