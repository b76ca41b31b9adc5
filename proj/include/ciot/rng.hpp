#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ciot {

// Derives well-separated stream seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// mt19937_64 with explicit sampling transforms. The standard distribution
// adapters are unspecified across library implementations; writing the
// transforms out keeps seeded traces identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n up to a few thousand here, so the modulo
  // bias (< 2^-50) is irrelevant.
  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

  // Inversion sampling; log1p keeps the argument away from log(0).
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  // Box-Muller, one value per call.
  double normal(double sigma) {
    constexpr double kTwoPi = 6.283185307179586476925287;
    const double u1 = uniform();
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(kTwoPi * u2);
  }

  // Partial Fisher-Yates: fills `out` with `k` distinct indices from [0, n).
  template <typename IndexVec>
  void sample_indices(int n, int k, IndexVec& out) {
    scratch_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) scratch_[static_cast<std::size_t>(i)] = i;
    out.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const int j = i + uniform_int(n - i);
      std::swap(scratch_[static_cast<std::size_t>(i)], scratch_[static_cast<std::size_t>(j)]);
      out[static_cast<std::size_t>(i)] = scratch_[static_cast<std::size_t>(i)];
    }
  }

 private:
  std::mt19937_64 gen_;
  std::vector<int> scratch_;
};

}  // namespace ciot
