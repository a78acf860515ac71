/**
 * Copyright (c) 2026 by Contributors
 * @file rng.hpp
 * @brief Deterministic random streams.
 *
 * All randomness in the engine flows through this class so that runs are
 * reproducible bit-for-bit from a root seed.  Distribution sampling is
 * implemented by hand (not via std:: distributions, whose output is
 * implementation-defined).
 */
#ifndef STGAT_RNG_HPP_
#define STGAT_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace stgat {

/// SplitMix64 mixing step; used to derive independent stream seeds.
uint64_t splitmix64(uint64_t x);

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(splitmix64(seed ^ 0x9e3779b97f4a7c15ULL)) {}

  /// Derives an independent stream from a root seed and a stream tag.
  static Rng stream(uint64_t root, uint64_t tag) {
    return Rng(splitmix64(root + 0x632be59bd9b4e019ULL * (tag + 1)));
  }

  uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cached second draw).
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Uniform integer in [0, n), n > 0.
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >>
                            64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<size_t>(i)],
                v[static_cast<size_t>(uniform_int(i + 1))]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace stgat

#endif  // STGAT_RNG_HPP_
