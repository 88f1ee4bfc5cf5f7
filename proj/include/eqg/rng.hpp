#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace eqg {

/// Seeded generator with explicitly implemented distributions, so that output
/// is byte-identical across standard libraries and platforms. All randomness
/// in the project flows from one root seed through named substreams.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  /// Derives an independent substream from (seed, name, index). FNV-1a over the
  /// name, finalized with a splitmix step.
  static Rng substream(uint64_t root, std::string_view name, uint64_t index = 0);

  uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cached pair member).
  double normal();

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  /// Uniform integer in [0, n), rejection-free modulo bias is negligible for
  /// the sizes used here but we reject anyway for exactness.
  int uniform_int(int n);

  template <class T>
  void shuffle(std::vector<T>& xs) {
    for (int i = static_cast<int>(xs.size()) - 1; i > 0; --i)
      std::swap(xs[i], xs[uniform_int(i + 1)]);
  }

 private:
  std::mt19937_64 eng_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace eqg
