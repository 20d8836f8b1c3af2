#pragma once

// Reproducible random numbers.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++
// standard. Uniform doubles take the top 53 bits of one draw; normals use
// the Box-Muller transform. std::uniform_real_distribution and
// std::normal_distribution are avoided because their algorithms differ
// between standard libraries. Seeds for independent streams are derived with
// the SplitMix64 finalizer.

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace gcalc {

/// SplitMix64 output function (Steele, Lea & Flood).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Combines a master seed with any number of stream coordinates.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(master);
  for (const std::uint64_t c : coords) h = mix64(h ^ mix64(c));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gcalc
