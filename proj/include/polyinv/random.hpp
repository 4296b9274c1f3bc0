#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace polyinv {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output (i = 1, 2, ...) is
/// mix64(seed + i * 0x9E3779B97F4A7C15). This is exactly SplitMix64, so any
/// language with 64-bit wrapping arithmetic reproduces the stream bit for bit.
///
/// Derived quantities:
///   uniform()  = (next() >> 11) * 2^-53, in [0, 1)
///   normal()   = Box-Muller on two uniforms, cosine branch only
///   below(m)   = floor(uniform() * m)
class RandomSource {
public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit RandomSource(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * kGamma);
  }

  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, m).
  std::uint64_t below(std::uint64_t m) noexcept {
    auto r = static_cast<std::uint64_t>(uniform() * static_cast<double>(m));
    return r < m ? r : m - 1;
  }

  /// Independent child stream: seed = mix64(parent_seed ^ mix64(stream + 1)).
  RandomSource child(std::uint64_t stream) const noexcept {
    return RandomSource(derive_seed(seed_, stream));
  }

  static std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
    return mix64(parent ^ mix64(stream + 1));
  }

private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace polyinv
