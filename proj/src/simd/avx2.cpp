#include "roughlab/simd.hpp"

#if defined(ROUGHLAB_HAVE_AVX2)

#include <immintrin.h>

namespace roughlab::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

// down[-j-3 .. -j] loaded and reversed so lane q holds down[-(j+q)].
inline __m256d load_reversed(const double* down, std::size_t j) {
  const __m256d raw = _mm256_loadu_pd(down - static_cast<std::ptrdiff_t>(j) - 3);
  return _mm256_permute4x64_pd(raw, 0x1B);
}

inline __m256d phi(__m256d d, __m256d pos, __m256d neg) {
  const __m256d positive = _mm256_cmp_pd(d, _mm256_setzero_pd(), _CMP_GT_OQ);
  return _mm256_mul_pd(_mm256_blendv_pd(neg, pos, positive), d);
}

inline double tail_phi(double d, double pos, double neg) { return d > 0.0 ? pos * d : neg * d; }

}  // namespace

double paired_sum(const double* w, const double* up, const double* down, std::size_t n, double c) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d cv = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d a = _mm256_loadu_pd(up + j);
    const __m256d b = load_reversed(down, j);
    const __m256d d = _mm256_sub_pd(_mm256_mul_pd(half, _mm256_add_pd(a, b)), cv);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + j), d));
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; j < n; ++j) s[j & 3] += w[j] * (0.5 * (up[j] + *(down - static_cast<std::ptrdiff_t>(j))) - c);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double paired_sum_extremal(const double* w, const double* up, const double* down, std::size_t n, double c,
                           double pos, double neg) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d pv = _mm256_set1_pd(pos);
  const __m256d nv = _mm256_set1_pd(neg);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d a = _mm256_loadu_pd(up + j);
    const __m256d b = load_reversed(down, j);
    const __m256d d = _mm256_sub_pd(_mm256_mul_pd(half, _mm256_add_pd(a, b)), cv);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + j), phi(d, pv, nv)));
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; j < n; ++j) {
    const double d = 0.5 * (up[j] + *(down - static_cast<std::ptrdiff_t>(j))) - c;
    s[j & 3] += w[j] * tail_phi(d, pos, neg);
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double row_sum(const double* w, const double* e, std::size_t n, double c) {
  const __m256d cv = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(e + k), cv);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + k), d));
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; k < n; ++k) s[k & 3] += w[k] * (e[k] - c);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double row_sum_extremal(const double* w, const double* e, std::size_t n, double c, double pos, double neg) {
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d pv = _mm256_set1_pd(pos);
  const __m256d nv = _mm256_set1_pd(neg);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(e + k), cv);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + k), phi(d, pv, nv)));
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; k < n; ++k) s[k & 3] += w[k] * tail_phi(e[k] - c, pos, neg);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

}  // namespace roughlab::simd::avx2

#else

#include "roughlab/errors.hpp"

namespace roughlab::simd::avx2 {

namespace {
[[noreturn]] void unavailable() { throw DomainError("AVX2 path not compiled in"); }
}  // namespace

double paired_sum(const double*, const double*, const double*, std::size_t, double) { unavailable(); }
double paired_sum_extremal(const double*, const double*, const double*, std::size_t, double, double, double) {
  unavailable();
}
double row_sum(const double*, const double*, std::size_t, double) { unavailable(); }
double row_sum_extremal(const double*, const double*, std::size_t, double, double, double) { unavailable(); }

}  // namespace roughlab::simd::avx2

#endif
