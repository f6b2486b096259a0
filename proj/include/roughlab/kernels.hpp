#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "roughlab/core.hpp"

namespace roughlab {

/// Radial profile a(|y|) of a kernel K(y) = a(y) (2 - sigma) / |y|^(1 + sigma).
///
/// Piecewise-constant profiles (constant, dyadic annuli) are integrated in
/// closed form against power weights. Callable profiles fall back to adaptive
/// Gauss-Kronrod quadrature.
class RadialProfile {
 public:
  static RadialProfile constant(double c);
  /// values[k] holds on [breaks[k], breaks[k+1]); `below` under breaks[0],
  /// `above` from breaks.back() on.
  static RadialProfile piecewise(std::vector<double> breaks, std::vector<double> values, double below,
                                 double above);
  /// a(y) for signed y; symmetry is assumed by discretization and probed by
  /// kernel_bounds_check.
  static RadialProfile callable(std::function<double(double)> a);

  double operator()(double y) const;
  bool is_piecewise() const noexcept { return !fn_; }
  /// Profile of y -> a(r y).
  RadialProfile scaled(double r) const;

  /// Integral over [lo, hi] (0 <= lo < hi) of a(y) * y^p dy, p != -1.
  double integrate_power(double lo, double hi, double p) const;

  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
  double below_ = 1.0;
  double above_ = 1.0;
  std::function<double(double)> fn_;
};

enum class KernelKind { power_constant, dyadic_rough, user_callable };

std::string to_string(KernelKind kind);

/// A member of the class L_0(sigma): symmetric kernel trapped between
/// lambda (2 - sigma)/|y|^(1+sigma) and Lambda (2 - sigma)/|y|^(1+sigma).
class Kernel {
 public:
  /// Constant profile a = c; throws DomainError if c is outside [lambda, Lambda].
  static Kernel power(const EllipticityParams& params, double c);
  static Kernel power(const EllipticityParams& params) { return power(params, params.lambda); }
  /// Profile constant on dyadic annuli 2^k <= |y| < 2^(k+1), k in [-20, 40],
  /// level values uniform in [lambda, Lambda] from splitmix64 on (seed, k);
  /// lambda outside that band.
  static Kernel dyadic_rough(const EllipticityParams& params, std::uint64_t seed);
  /// Arbitrary profile; not validated at construction.
  static Kernel callable(const EllipticityParams& params, std::function<double(double)> a);

  const EllipticityParams& params() const noexcept { return params_; }
  KernelKind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double constant() const noexcept { return constant_; }
  const RadialProfile& profile() const noexcept { return profile_; }

  double a(double y) const { return profile_(y); }
  /// K(y); zero at sigma = 2, where the class is second order.
  double operator()(double y) const;

  /// Kernel of the rescaled operator: profile y -> a(r y), same bounds.
  Kernel rescaled(double r) const;
  double scale() const noexcept { return scale_; }

 private:
  Kernel(EllipticityParams params, KernelKind kind, RadialProfile profile)
      : params_(params), kind_(kind), profile_(std::move(profile)) {}

  EllipticityParams params_;
  KernelKind kind_;
  RadialProfile profile_;
  std::uint64_t seed_ = 0;
  double constant_ = 0.0;
  double scale_ = 1.0;
};

struct BoundsReport {
  bool passed = true;
  std::size_t probes = 0;
  std::optional<double> first_violation;
  std::string reason;
};

/// Probes K at log-spaced |y| in [1e-6, 1e6] on both sides; checks the two
/// power-law bounds and K(y) = K(-y).
BoundsReport kernel_bounds_check(const Kernel& kernel, std::size_t n_probes);

/// Controls where the discrete kernel stops and how the exterior tail
/// (beyond the uniform lattice) is sampled.
struct TailSpec {
  /// Exterior data bound: |u| <= data_bound (1 + |x|)^growth.
  double data_bound = 1.0;
  double growth = 0.0;
  /// Truncate once Lambda (2 - sigma) * tail mass * data bound is below this.
  double cutoff_tol = 1e-8;
  /// Geometric cells are subdivided at resolve_spacing until the remaining
  /// tail bound falls under resolve_tol; single-node cells after that.
  double resolve_tol = 1e-3;
  double resolve_spacing = 0.5;
  std::size_t max_resolved_nodes = 4096;
  /// Uniform lattice reach in y; 0 means 2L (the whole grid from any node).
  double lattice_extent = 0.0;
};

/// Cell layout beyond the uniform lattice. Depends on the grid, sigma,
/// Lambda and the tail spec only, so every kernel of an operator family
/// shares it.
struct TailLayout {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> node;
  double cutoff = 0.0;
  double truncation_bound = 0.0;
};

TailLayout make_tail_layout(const EllipticityParams& params, const Grid& grid, const TailSpec& spec);

/// Quadrature weights of a kernel on a grid. All weights are two-sided: the
/// operator is sum_j cell[j-1] * delta(u; x, j dx) + w0 * D2 u(x)
/// + sum_k tail_weight[k] * delta(u; x, tail_node[k]).
struct DiscreteKernel {
  Grid grid;
  EllipticityParams params;
  std::vector<double> cell;          ///< j = 1..J, integral of K over both cells +-[(j-1/2)dx, (j+1/2)dx].
  double w0 = 0.0;                   ///< Near-origin coefficient on the centered second difference.
  double w0_exact = 0.0;             ///< Half the second moment of K over |y| <= dx/2.
  std::shared_ptr<const TailLayout> tail;
  std::vector<double> tail_weight;   ///< Integral of K over both tail cells.

  std::size_t lattice_size() const noexcept { return cell.size(); }
  /// Lattice weights with the near-origin term folded into j = 1.
  std::vector<double> stencil() const;
  /// Coefficient of u(x) in the operator: S = sum cell + 2 w0/dx^2 + sum tail.
  double total_mass() const;
};

/// Exact cell integrals for piecewise profiles, adaptive quadrature otherwise.
/// The near-origin coefficient is the exact second moment minus the second-
/// moment excess of the lattice cells, clamped into
/// [lambda, Lambda] times the unit-profile value so quadratics are
/// integrated exactly without leaving the ellipticity class.
DiscreteKernel discretize_kernel(const Kernel& kernel, const Grid& grid, const TailSpec& spec = {});
DiscreteKernel discretize_kernel(const Kernel& kernel, const Grid& grid, std::shared_ptr<const TailLayout> tail);

/// Integral of K over [lo, hi], 0 < lo < hi (one side).
double kernel_mass(const Kernel& kernel, double lo, double hi);

}  // namespace roughlab
