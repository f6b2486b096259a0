#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace roughlab::simd {

enum class Isa { scalar, avx2 };

std::string to_string(Isa isa);

/// True when the CPU reports AVX2 and the AVX2 path was compiled in.
bool avx2_available() noexcept;

/// ISA used by the dispatched entry points. Defaults to the best available
/// one; ROUGHLAB_SIMD=scalar in the environment pins the reference path.
Isa active_isa() noexcept;

/// Pins the dispatch (nullopt restores automatic selection). Forcing an
/// unavailable ISA throws DomainError.
void force_isa(std::optional<Isa> isa);

// Lattice sums. `up` points at u(x + dx) and walks forward, `down` points at
// u(x - dx) and walks backward (down[-j]); c is u(x).
//
//   paired_sum          = sum_j w[j] * (0.5 * (up[j] + down[-j]) - c)
//   paired_sum_extremal = sum_j w[j] * phi(0.5 * (up[j] + down[-j]) - c)
//   row_sum             = sum_k w[k] * (e[k] - c)
//   row_sum_extremal    = sum_k w[k] * phi(e[k] - c)
//
// with phi(d) = pos * d for d > 0 and neg * d otherwise.
double paired_sum(const double* w, const double* up, const double* down, std::size_t n, double c);
double paired_sum_extremal(const double* w, const double* up, const double* down, std::size_t n, double c,
                           double pos, double neg);
double row_sum(const double* w, const double* e, std::size_t n, double c);
double row_sum_extremal(const double* w, const double* e, std::size_t n, double c, double pos, double neg);

namespace scalar {
double paired_sum(const double* w, const double* up, const double* down, std::size_t n, double c);
double paired_sum_extremal(const double* w, const double* up, const double* down, std::size_t n, double c,
                           double pos, double neg);
double row_sum(const double* w, const double* e, std::size_t n, double c);
double row_sum_extremal(const double* w, const double* e, std::size_t n, double c, double pos, double neg);
}  // namespace scalar

namespace avx2 {
double paired_sum(const double* w, const double* up, const double* down, std::size_t n, double c);
double paired_sum_extremal(const double* w, const double* up, const double* down, std::size_t n, double c,
                           double pos, double neg);
double row_sum(const double* w, const double* e, std::size_t n, double c);
double row_sum_extremal(const double* w, const double* e, std::size_t n, double c, double pos, double neg);
}  // namespace avx2

}  // namespace roughlab::simd
