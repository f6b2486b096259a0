#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughlab/core.hpp"
#include "roughlab/kernels.hpp"

namespace roughlab {

/// delta(u; x, y) = (u(x+y) + u(x-y))/2 - u(x) on stored level m, reading
/// off-grid points through the field's interpolant and exterior.
double second_difference(const SpaceTimeField& u, std::size_t level, double x, double y);

/// Finite inf-sup family {L_ab, c_ab}; the constants are shifted at
/// construction so that inf_a sup_b c_ab = 0.
class IsaacsFamily {
 public:
  IsaacsFamily(std::size_t n_alpha, std::size_t n_beta, std::vector<Kernel> kernels, std::vector<double> constants);

  /// Dyadic rough kernels and constants uniform in [-constant_scale, constant_scale],
  /// all drawn from splitmix64 streams keyed by seed.
  static IsaacsFamily seeded(const EllipticityParams& params, std::uint64_t seed, std::size_t n_alpha,
                             std::size_t n_beta, double constant_scale = 1.0);

  std::size_t n_alpha() const noexcept { return n_alpha_; }
  std::size_t n_beta() const noexcept { return n_beta_; }
  std::size_t size() const noexcept { return kernels_.size(); }
  const Kernel& kernel(std::size_t a, std::size_t b) const { return kernels_[a * n_beta_ + b]; }
  double constant(std::size_t a, std::size_t b) const { return constants_[a * n_beta_ + b]; }
  const std::vector<Kernel>& kernels() const noexcept { return kernels_; }
  const std::vector<double>& constants() const noexcept { return constants_; }
  /// The value inf sup c of the raw constants that was subtracted.
  double shift() const noexcept { return shift_; }
  const EllipticityParams& params() const { return kernels_.front().params(); }

  /// Kernels y -> a(r y) and constants multiplied by `factor`.
  IsaacsFamily rescaled(double r, double factor) const;

 private:
  std::size_t n_alpha_;
  std::size_t n_beta_;
  std::vector<Kernel> kernels_;
  std::vector<double> constants_;
  double shift_ = 0.0;
};

enum class OperatorKind { linear, pucci_plus, pucci_minus, isaacs };

std::string to_string(OperatorKind kind);

/// Continuum operator: a single kernel, an extremal operator of the class,
/// or an Isaacs family.
class Operator {
 public:
  static Operator linear(Kernel kernel);
  static Operator pucci_plus(const EllipticityParams& params);
  static Operator pucci_minus(const EllipticityParams& params);
  static Operator isaacs(IsaacsFamily family);

  OperatorKind kind() const noexcept { return kind_; }
  const EllipticityParams& params() const noexcept { return params_; }
  const Kernel& kernel() const;
  const IsaacsFamily& family() const;

 private:
  OperatorKind kind_ = OperatorKind::linear;
  EllipticityParams params_;
  std::optional<Kernel> kernel_;
  std::optional<IsaacsFamily> family_;
};

/// l(x) = slope * x + offset.
struct Affine {
  double slope = 0.0;
  double offset = 0.0;
  double operator()(double x) const noexcept { return slope * x + offset; }
};

/// The operator J with J((w(x0 + r.) - l(x0 + r.))/c) = (r^sigma / c) (I w)(x0 + r.).
/// Kernels become a(r y); Isaacs constants are multiplied by r^sigma / c; the
/// extremal operators are unchanged. Throws DomainError for r <= 0 or c <= 0.
Operator rescale_operator(const Operator& op, double x0, double r, double c, const Affine& ell);

/// Values of a field on the evaluation lattice at one instant: grid values,
/// exterior values at lattice points beyond the grid, and for each row the
/// averaged exterior samples (g(x + y_k) + g(x - y_k))/2 at the tail nodes.
class LatticeField {
 public:
  LatticeField(const Grid& grid, std::size_t lattice, std::shared_ptr<const TailLayout> tail, ExteriorData exterior,
               std::ptrdiff_t row_lo, std::ptrdiff_t row_hi);

  /// Copies grid values; exterior samples are recomputed on the first load
  /// and whenever the exterior is time dependent and t changed.
  void load(std::span<const double> grid_values, double t);
  void set(std::ptrdiff_t i, double value) { padded_[offset(i)] = value; }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t lattice() const noexcept { return lattice_; }
  double time() const noexcept { return time_; }
  std::ptrdiff_t row_lo() const noexcept { return row_lo_; }
  std::ptrdiff_t row_hi() const noexcept { return row_hi_; }
  bool has_row(std::ptrdiff_t i) const noexcept { return i >= row_lo_ && i <= row_hi_; }

  /// Lattice value for any i in [-J, N + J].
  double operator[](std::ptrdiff_t i) const { return padded_[offset(i)]; }
  const double* data_at(std::ptrdiff_t i) const { return padded_.data() + offset(i); }
  const double* tail_row(std::ptrdiff_t i) const;
  std::size_t tail_size() const noexcept { return tail_->node.size(); }
  std::span<const double> grid_values() const;

  /// Range of every value an update can combine: lattice values and the
  /// averaged tail samples.
  double min_value() const;
  double max_value() const;

 private:
  std::size_t offset(std::ptrdiff_t i) const { return static_cast<std::size_t>(i + static_cast<std::ptrdiff_t>(lattice_)); }
  void refresh_exterior(double t);

  Grid grid_;
  std::size_t lattice_;
  std::shared_ptr<const TailLayout> tail_;
  ExteriorData exterior_;
  std::ptrdiff_t row_lo_;
  std::ptrdiff_t row_hi_;
  std::vector<double> padded_;
  std::vector<double> rows_;
  double time_ = 0.0;
  bool loaded_ = false;
  double ext_min_ = 0.0;
  double ext_max_ = 0.0;
};

/// An operator discretized on a grid: kernel weights folded into lattice
/// stencils, the shared tail layout, and the constants of an Isaacs family.
class DiscreteOperator {
 public:
  DiscreteOperator(const Operator& op, const Grid& grid, const TailSpec& spec = {});
  DiscreteOperator(const Operator& op, const Grid& grid, std::shared_ptr<const TailLayout> layout);

  OperatorKind kind() const noexcept { return kind_; }
  const Grid& grid() const noexcept { return grid_; }
  const EllipticityParams& params() const noexcept { return params_; }
  std::size_t lattice_size() const noexcept { return lattice_; }
  const std::shared_ptr<const TailLayout>& tail_layout() const noexcept { return layout_; }
  /// Linear: the kernel; extremal: the unit profile; Isaacs: row-major family.
  const std::vector<DiscreteKernel>& kernels() const noexcept { return kernels_; }

  /// Largest coefficient of u(x) over the members the operator can select.
  double total_mass() const noexcept { return mass_; }

  LatticeField make_field(ExteriorData exterior, std::ptrdiff_t row_lo, std::ptrdiff_t row_hi) const;

  /// Operator value at grid node i; needs 1 <= i <= N-1 and a tail row for i.
  double apply(const LatticeField& u, std::ptrdiff_t i) const;
  /// Value of member k of the discretized family (linear part only).
  double apply_member(const LatticeField& u, std::ptrdiff_t i, std::size_t k) const;

 private:
  void check_row(const LatticeField& u, std::ptrdiff_t i) const;

  OperatorKind kind_;
  Grid grid_;
  EllipticityParams params_;
  std::size_t lattice_ = 0;
  std::shared_ptr<const TailLayout> layout_;
  std::vector<DiscreteKernel> kernels_;
  std::vector<std::vector<double>> stencils_;
  std::vector<double> constants_;
  std::size_t n_alpha_ = 1;
  std::size_t n_beta_ = 1;
  double mass_ = 0.0;
};

/// Operator values at grid nodes [i_lo, i_hi] of stored level m.
std::vector<double> apply_on_level(const DiscreteOperator& op, const SpaceTimeField& u, std::size_t level,
                                   std::ptrdiff_t i_lo, std::ptrdiff_t i_hi);
/// Operator value at the grid node nearest to x on stored level m.
double apply_at(const DiscreteOperator& op, const SpaceTimeField& u, std::size_t level, double x);

/// v(x, t) = (u(x + h, t) - u(x, t)) / |h|^alpha on the same grid and levels.
/// h must be a nonzero lattice multiple; alpha in (0, 1].
SpaceTimeField increment_quotient(const SpaceTimeField& u, double h, double alpha);

/// v(x, t) = rho^(-beta) u(rho x, t_anchor + rho^sigma t) on `out_grid`
/// (default: half-width L / rho, same node count, so rho x lands on the
/// original nodes). Stored levels map to (t_m - t_anchor) / rho^sigma.
SpaceTimeField parabolic_rescale(const SpaceTimeField& u, double rho, double beta, double sigma,
                                 double t_anchor = 0.0, std::optional<Grid> out_grid = std::nullopt);

}  // namespace roughlab
