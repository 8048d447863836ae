#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace graphtag {

// Seeded generator passed explicitly to every stochastic step (init, dropout,
// shuffling). Distributions are implemented here rather than with the
// <random> distribution classes, whose output is library-specific.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  // Fresh generator whose stream depends only on this one's next draw.
  Rng split() { return Rng(next()); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace graphtag
