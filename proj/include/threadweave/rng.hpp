#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "threadweave/errors.hpp"

namespace tw {

// Deterministic xoshiro256** generator. We roll our own instead of using
// <random> distributions because their output is implementation-defined and
// every artifact here must be reproducible byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  // Independent child stream named by tag; same (seed, tag) -> same stream.
  Rng derive(std::string_view tag) const {
    std::uint64_t x = s_[0] ^ hash_string(tag);
    return Rng(splitmix64(x));
  }

  std::uint64_t u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is < 2^-53 for any n we use.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw NumericError("Rng::uniform_index: empty range");
    return static_cast<std::size_t>(u64() % n);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Geometric on {1, 2, ...} with mean `mean` (success prob 1/mean).
  int geometric(double mean) {
    if (mean < 1.0) mean = 1.0;
    const double p = 1.0 / mean;
    const double u = uniform();
    const double k = std::floor(std::log1p(-u) / std::log1p(-p));
    return 1 + static_cast<int>(k);
  }

  // Index sampled from unnormalized nonnegative weights.
  std::size_t discrete(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
};

}  // namespace tw
