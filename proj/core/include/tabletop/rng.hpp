#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tabletop {

/// Seeded random source. The engine is std::mt19937_64 (fully specified by the
/// standard); the distributions are derived here from raw engine output rather
/// than via <random> distributions, whose algorithms are implementation-defined,
/// so a seed produces the same stream on every toolchain.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, no cached second value).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Deterministic child stream, e.g. one per file or per epoch.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

private:
  std::mt19937_64 engine_;
};

}  // namespace tabletop
