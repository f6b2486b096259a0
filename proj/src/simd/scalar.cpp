#include "roughlab/simd.hpp"

namespace roughlab::simd::scalar {

namespace {

inline double phi(double d, double pos, double neg) { return d > 0.0 ? pos * d : neg * d; }

}  // namespace

// Four interleaved accumulators, combined as (s0 + s1) + (s2 + s3), so the
// reference path rounds like the vector path up to the reduction order.
double paired_sum(const double* w, const double* up, const double* down, std::size_t n, double c) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    for (std::size_t q = 0; q < 4; ++q) {
      const std::size_t k = j + q;
      s[q] += w[k] * (0.5 * (up[k] + *(down - static_cast<std::ptrdiff_t>(k))) - c);
    }
  }
  for (; j < n; ++j) s[j & 3] += w[j] * (0.5 * (up[j] + *(down - static_cast<std::ptrdiff_t>(j))) - c);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double paired_sum_extremal(const double* w, const double* up, const double* down, std::size_t n, double c,
                           double pos, double neg) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    const double d = 0.5 * (up[j] + *(down - static_cast<std::ptrdiff_t>(j))) - c;
    s[j & 3] += w[j] * phi(d, pos, neg);
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double row_sum(const double* w, const double* e, std::size_t n, double c) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) s[k & 3] += w[k] * (e[k] - c);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double row_sum_extremal(const double* w, const double* e, std::size_t n, double c, double pos, double neg) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) s[k & 3] += w[k] * phi(e[k] - c, pos, neg);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

}  // namespace roughlab::simd::scalar
