#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace roughlab {

/// Ellipticity data shared by every kernel and operator: order sigma, the
/// lower order bound sigma0, the bounds lambda <= Lambda on the kernel
/// profile and the second-order normalization c_n.
struct EllipticityParams {
  int n = 1;
  double sigma = 1.0;
  double sigma0 = 1.0;
  double lambda = 1.0;
  double Lambda = 1.0;
  double c_n = 1.0;

  /// Throws DomainError unless 0 < sigma0 <= sigma <= 2, sigma0 < 2,
  /// 0 < lambda <= Lambda, c_n > 0 and n is 1 or 2.
  void validate() const;
};

/// Uniform 1D space grid x_i = -L + i*dx, i = 0..N, dx = 2L/N, plus the time
/// interval of the run. n_steps = 0 lets the CFL bound choose the step count.
struct Grid {
  double half_width = 2.0;
  std::size_t n_points = 256;
  double t0 = -1.0;
  double t_end = 0.0;
  std::size_t n_steps = 0;

  void validate() const;

  double dx() const noexcept { return 2.0 * half_width / static_cast<double>(n_points); }
  std::size_t size() const noexcept { return n_points + 1; }
  /// Lattice coordinate; indices outside [0, N] continue the lattice.
  double node(std::ptrdiff_t i) const noexcept {
    return -half_width + static_cast<double>(i) * dx();
  }
  /// Nearest lattice index (not clamped to the grid).
  std::ptrdiff_t nearest_index(double x) const noexcept;
  bool on_grid(std::ptrdiff_t i) const noexcept {
    return i >= 0 && i <= static_cast<std::ptrdiff_t>(n_points);
  }
};

/// Declared growth of exterior data: |u(x,t)| <= C for the bounded class, or
/// |u(x,t)| <= C (1 + |x|)^beta for the growth class.
struct BoundClass {
  enum class Kind { bounded, growth };
  Kind kind = Kind::bounded;
  double C = 1.0;
  double beta = 0.0;

  static BoundClass bounded(double C) { return {Kind::bounded, C, 0.0}; }
  static BoundClass growth(double C, double beta) { return {Kind::growth, C, beta}; }

  double exponent() const noexcept { return kind == Kind::bounded ? 0.0 : beta; }
  double at(double x) const noexcept;
};

/// Data on all of R (used for |x| beyond the grid, and as lateral data).
struct ExteriorData {
  std::function<double(double, double)> fn;
  BoundClass bound = BoundClass::bounded(0.0);
  bool time_dependent = false;

  double operator()(double x, double t) const { return fn(x, t); }

  static ExteriorData zero();
  static ExteriorData constant(double c);
  /// Checks |fn| against the bound class at log-spaced probes on both sides.
  bool respects_bound(std::size_t probes, double t) const;
};

/// Samples u(x_i, t_m) on the grid nodes at stored time levels, backed by an
/// exterior callable for points beyond the grid. Immutable; copies share data.
class SpaceTimeField {
 public:
  SpaceTimeField(Grid grid, std::vector<double> times, std::vector<double> values,
                 ExteriorData exterior);

  /// Samples fn at every node and level; fn also serves as the exterior.
  static SpaceTimeField sample(const Grid& grid, std::vector<double> times,
                               const std::function<double(double, double)>& fn,
                               BoundClass bound, bool time_dependent = true);

  const Grid& grid() const noexcept { return grid_; }
  const ExteriorData& exterior() const noexcept { return exterior_; }
  std::size_t levels() const noexcept { return times_->size(); }
  double time(std::size_t m) const { return (*times_)[m]; }
  const std::vector<double>& times() const noexcept { return *times_; }
  std::span<const double> level(std::size_t m) const;

  /// Value at lattice index i of level m; off-grid indices use the exterior.
  double at(std::size_t m, std::ptrdiff_t i) const;
  /// Value anywhere: cubic in x on the grid, linear between stored levels.
  double value(double x, double t) const;
  /// Value at x on stored level m (cubic interpolation on the grid).
  double value_on_level(std::size_t m, double x) const;

  std::size_t nearest_level(double t) const;
  std::optional<std::size_t> find_level(double t, double tol = 1e-12) const;

  /// Max |u| over stored nodes.
  double sup_norm() const;

 private:
  Grid grid_;
  std::shared_ptr<const std::vector<double>> times_;
  std::shared_ptr<const std::vector<double>> values_;
  ExteriorData exterior_;
};

/// Parabolic cylinder {|x - center| <= r, t_center - r^sigma < t <= t_center}.
struct Cylinder {
  double center_x = 0.0;
  double center_t = 0.0;
  double radius = 1.0;
  double sigma = 1.0;

  double depth() const;
  double t_lo() const { return center_t - depth(); }
  bool contains(double x, double t) const;
};

/// Throws DomainError for r <= 0 or sigma outside (0, 2].
Cylinder cylinder(double center_x, double center_t, double r, double sigma);

/// (2 - sigma0) / (1 + |x|^(n + sigma0)).
double weight_omega(double x, double sigma0, int n = 1);

/// Integral of |u(., t_m)| against weight_omega over R: trapezoid on the grid,
/// geometric graded Gauss panels (ratio 1.25) for the exterior tail out to the
/// radius where the remaining tail bound drops under 1e-8.
double weighted_l1_norm(const SpaceTimeField& u, std::size_t level, double sigma0);

}  // namespace roughlab
