#pragma once

#include <cmath>
#include <cstdint>

namespace cgfp {

// SplitMix64 (Steele, Lea, Flood 2014): a 64-bit counter-based generator with
// a fixed increment and an avalanching output mix.  Chosen because one seed
// value pins the whole stream, so problem construction is bit-reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1): the top 53 bits, with 0 mapped to the smallest step.
  double next_uniform() {
    double u = static_cast<double>(next_u64() >> 11) * 0x1p-53;
    return u > 0.0 ? u : 0x1p-53;
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cgfp
