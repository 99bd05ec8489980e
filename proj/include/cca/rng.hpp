#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace cca {

// Seeded pseudo-random stream built on SplitMix64 (Steele, Lea & Flood;
// constants from Vigna's reference implementation). The <random> engines are
// portable but the standard distributions are not, so uniform/normal draws
// are derived here by hand to keep sequences bit-exact across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 mantissa bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n); rejection sampling, n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t bound = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= bound);
    return x % n;
  }

  // Standard normal via Box-Muller; two uniforms consumed per draw.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Deterministic child stream: the child seed hashes (current state, index).
  RngStream split(std::uint64_t index = 0) {
    const std::uint64_t base = next_u64();
    return RngStream(mix(base + (index + 1) * 0x9e3779b97f4a7c15ull));
  }

  std::vector<RngStream> split_many(std::size_t k) {
    const std::uint64_t base = next_u64();
    std::vector<RngStream> children;
    children.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      children.emplace_back(mix(base + (i + 1) * 0x9e3779b97f4a7c15ull));
    }
    return children;
  }

  std::uint64_t state() const { return state_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace cca
