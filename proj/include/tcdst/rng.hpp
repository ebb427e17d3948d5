#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tcdst {

// Deterministic RNG used wherever a seed appears. Distributions are
// hand-rolled so draws do not depend on the standard library
// implementation; identical seeds give identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller; two fresh uniforms per draw.
  double normal(double mean, double stddev) {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + stddev * z;
  }

  // Uniform in [0, n).
  std::size_t bounded(std::size_t n) { return n == 0 ? 0 : next_u64() % n; }

  bool coin(double p) { return uniform01() < p; }

  // Fisher-Yates, fixed iteration order.
  template <class V>
  void shuffle(V& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = bounded(i + 1);
      std::swap(v[i], v[j]);
    }
  }

  // Derives an independent stream seed (splitmix64 round).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace tcdst
