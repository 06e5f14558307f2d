#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace grosslab {

// Deterministic stream RNG. Every randomized routine in the library draws
// from a stream keyed by (base seed, routine tag, trial index), so results
// are reproducible independently of evaluation order or thread count.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in (0, 1]
  double uniform() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal, Box-Muller
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::complex<double> cgaussian() {
    double re = gaussian();
    double im = gaussian();
    return {re, im};
  }

 private:
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One scramble so that nearby (seed, index) pairs map to distant states.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline SplitMix64 stream_rng(std::uint64_t base, std::string_view tag,
                             std::uint64_t index = 0) {
  return SplitMix64(mix64(base ^ fnv1a(tag)) +
                    index * 0x9e3779b97f4a7c15ULL);
}

}  // namespace grosslab
