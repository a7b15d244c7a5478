#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fdsk {

// Counter-based pseudorandom generator. Every draw is a pure function of
// (seed, stream, index), so any value in any stream can be regenerated in
// O(1) without storing generator state. The mixer is the splitmix64
// finalizer applied to a combination of the three words.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const {
    std::uint64_t x = seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x = mix(x) ^ mix(index + 0x632be59bd9b4e019ULL);
    return mix(x);
  }

  // Uniform on (0, 1]; never returns 0 so it is safe under log().
  double uniform(std::uint64_t stream, std::uint64_t index) const {
    return (static_cast<double>(bits(stream, index) >> 11) + 1.0) * 0x1p-53;
  }

  // Standard normal via Box-Muller; one value per index, two uniforms drawn
  // from sub-indices 2*index and 2*index+1.
  double gaussian(std::uint64_t stream, std::uint64_t index) const {
    double u1 = uniform(stream, 2 * index);
    double u2 = uniform(stream, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
};

// Stable 64-bit combiner for deriving per-cell seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return CounterRng::mix(a ^ (CounterRng::mix(b) + 0x9e3779b97f4a7c15ULL));
}

}  // namespace fdsk
