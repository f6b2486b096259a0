#include "roughlab/random.hpp"

#include <cmath>

#include "roughlab/errors.hpp"

namespace roughlab {

BoundedNoise::BoundedNoise(std::uint64_t seed, double amplitude, double correlation_length)
    : key_(mix64(seed ^ label_hash("bounded-noise"))),
      amplitude_(amplitude),
      length_(correlation_length) {
  if (!(amplitude >= 0.0) || !(correlation_length > 0.0)) {
    throw DomainError("bounded noise needs amplitude >= 0 and correlation length > 0");
  }
}

double BoundedNoise::knot(std::int64_t k) const noexcept {
  return amplitude_ * (2.0 * hashed_uniform(key_, k) - 1.0);
}

double BoundedNoise::operator()(double x) const noexcept {
  const double s = x / length_;
  const double fl = std::floor(s);
  // Far-field probes beyond 2^62 knots are frozen at the last representable knot.
  const double clamped = std::fmax(-4.0e18, std::fmin(4.0e18, fl));
  const auto k = static_cast<std::int64_t>(clamped);
  const double frac = std::fmin(1.0, std::fmax(0.0, s - fl));
  return (1.0 - frac) * knot(k) + frac * knot(k + 1);
}

}  // namespace roughlab
