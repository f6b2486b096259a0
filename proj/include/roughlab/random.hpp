#pragma once

#include <cstdint>
#include <string_view>

namespace roughlab {

/// splitmix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a, used to key random streams by a purpose label.
constexpr std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Maps the top 53 bits of a word to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Deterministic uniform in [0, 1) addressed by (seed, index) without state.
constexpr double hashed_uniform(std::uint64_t seed, std::int64_t index) noexcept {
  return to_unit(mix64(seed ^ mix64(static_cast<std::uint64_t>(index) + 0x9e3779b97f4a7c15ULL)));
}

class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  /// Independent stream for (seed, label); the label documents the purpose.
  static constexpr SplitMix64 stream(std::uint64_t seed, std::string_view label) noexcept {
    return SplitMix64(mix64(seed ^ label_hash(label)));
  }

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  constexpr double uniform() noexcept { return to_unit(next()); }
  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Continuous bounded noise: uniform knot values in [-A, A] every
/// `correlation_length`, linearly interpolated. Defined on all of R and
/// bounded by the amplitude.
class BoundedNoise {
 public:
  BoundedNoise(std::uint64_t seed, double amplitude, double correlation_length);

  double operator()(double x) const noexcept;
  double amplitude() const noexcept { return amplitude_; }
  double correlation_length() const noexcept { return length_; }

 private:
  double knot(std::int64_t k) const noexcept;

  std::uint64_t key_;
  double amplitude_;
  double length_;
};

}  // namespace roughlab
