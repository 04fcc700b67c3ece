#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace apcsim {

// Derives an independent stream seed from a base seed and a stream tag.
// FNV-1a over the tag, xor-folded with the base, then finalized with the
// splitmix64 mixer so related bases do not produce related streams.
inline std::uint64_t derived_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = base ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic random stream. All distributions are implemented on top of
// the raw mt19937_64 output so sequences are identical across standard
// library implementations (std::normal_distribution etc. are unspecified).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Box-Muller; consumes exactly two uniforms per call.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  double exponential(double mean) {
    return -mean * std::log(1.0 - uniform());
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace apcsim
