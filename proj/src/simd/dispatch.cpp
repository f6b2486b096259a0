#include "roughlab/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "roughlab/errors.hpp"

namespace roughlab::simd {

namespace {

Isa detect() noexcept {
  const char* env = std::getenv("ROUGHLAB_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& forced() {
  static std::atomic<int> value{-1};
  return value;
}

}  // namespace

std::string to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() noexcept {
#if defined(ROUGHLAB_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") != 0;
  return ok;
#else
  return false;
#endif
}

Isa active_isa() noexcept {
  const int f = forced().load(std::memory_order_relaxed);
  if (f >= 0) return static_cast<Isa>(f);
  static const Isa detected = detect();
  return detected;
}

void force_isa(std::optional<Isa> isa) {
  if (isa && *isa == Isa::avx2 && !avx2_available()) throw DomainError("AVX2 is not available on this CPU");
  forced().store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

double paired_sum(const double* w, const double* up, const double* down, std::size_t n, double c) {
  if (active_isa() == Isa::avx2) return avx2::paired_sum(w, up, down, n, c);
  return scalar::paired_sum(w, up, down, n, c);
}

double paired_sum_extremal(const double* w, const double* up, const double* down, std::size_t n, double c,
                           double pos, double neg) {
  if (active_isa() == Isa::avx2) return avx2::paired_sum_extremal(w, up, down, n, c, pos, neg);
  return scalar::paired_sum_extremal(w, up, down, n, c, pos, neg);
}

double row_sum(const double* w, const double* e, std::size_t n, double c) {
  if (active_isa() == Isa::avx2) return avx2::row_sum(w, e, n, c);
  return scalar::row_sum(w, e, n, c);
}

double row_sum_extremal(const double* w, const double* e, std::size_t n, double c, double pos, double neg) {
  if (active_isa() == Isa::avx2) return avx2::row_sum_extremal(w, e, n, c, pos, neg);
  return scalar::row_sum_extremal(w, e, n, c, pos, neg);
}

}  // namespace roughlab::simd
