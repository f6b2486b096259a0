#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "roughlab/core.hpp"

namespace roughlab {

enum class FitMode { constant, affine };

std::string to_string(FitMode mode);

/// Grid nodes and stored levels covered by a cylinder after snapping: the
/// center goes to the nearest node and level, the spatial half-width to
/// floor(r / dx) nodes, and the levels to t_c - r^sigma < t_m <= t_c.
struct SnappedCylinder {
  std::ptrdiff_t center = 0;
  std::size_t center_level = 0;
  std::ptrdiff_t half_width = 0;
  std::size_t level_lo = 0;
  std::size_t level_hi = 0;
  double snap_radius = 0.0;

  std::size_t levels() const noexcept { return level_hi - level_lo + 1; }
  std::size_t nodes() const noexcept { return static_cast<std::size_t>(2 * half_width + 1); }
};

/// Throws ResolutionError with fewer than 4 nodes per spatial axis or fewer
/// than min(4, stored levels) time levels.
SnappedCylinder snap(const SpaceTimeField& u, const Cylinder& q);

/// l(x, t) = a (x - z') + b fitted on a cylinder, with D = sup |u - l| over
/// the cylinder nodes.
struct AffineFit {
  double a = 0.0;
  double b = 0.0;
  Cylinder cylinder;
  SnappedCylinder nodes;
  FitMode mode = FitMode::affine;
  double deviation = 0.0;

  double operator()(double offset) const noexcept { return a * offset + b; }
};

/// Affine mode: a = sum u (x - z') / sum (x - z')^2 and b = mean of u over
/// the cylinder nodes. Constant mode: a = 0, b = u(z).
AffineFit fit_plane(const SpaceTimeField& u, const Cylinder& q, FitMode mode);

struct MomentReport {
  bool passed = true;
  double mean = 0.0;          ///< mean of u - l over the nodes, relative to max(1, |u|).
  double first_moment = 0.0;  ///< mean of (u - l)(x - z') / r, same scaling.
  bool first_moment_asserted = true;
};

/// Both moment conditions below tol in affine mode; constant mode asserts
/// neither (the fit is anchored at the center, not a least-squares fit).
MomentReport residual_moments_check(const AffineFit& fit, const SpaceTimeField& u, double tol = 1e-9);

/// D(r, z) for each radius and center, its sup over centers, and helpers.
struct DeviationProfile {
  std::vector<double> radii;  ///< decreasing
  std::vector<std::pair<double, double>> centers;
  std::vector<std::vector<double>> per_center;  ///< [radius][center]
  std::vector<double> sup;                     ///< sup over centers, per radius
  FitMode mode = FitMode::affine;

  /// Theta(r) = sup over r' >= r of r'^(-beta) sup_z D(r', z), per radius.
  std::vector<double> theta(double beta) const;
};

/// Dyadic radii 2^-k within [r_min, r_max], decreasing.
std::vector<double> dyadic_radii(double r_min, double r_max);

/// D(r, z) on cylinders Q_r^sigma(z) for every (radius, center) pair.
/// Throws ResolutionError for a radius below 4 dx.
DeviationProfile deviation_profile(const SpaceTimeField& u, const std::vector<std::pair<double, double>>& centers,
                                   const std::vector<double>& radii, double sigma, FitMode mode);

inline constexpr double kExponentCap = 3.0;

struct ExponentFit {
  double exponent = 0.0;
  double constant = 0.0;  ///< max over used radii of r^(-exponent) D(r)
  double slope_error = 0.0;  ///< standard error of the regression slope
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool sentinel = false;  ///< every D(r) was at the noise floor
  bool used_small_half = false;
  std::vector<double> used_radii;
};

/// Least-squares slope of log D against log r over usable radii
/// (D > 10 eps scale, scale being the field's sup norm). When the smaller-radius half disagrees with
/// the full slope by more than 0.15 the half is used. Throws
/// EstimationError with fewer than two usable radii.
ExponentFit estimate_exponent(const std::vector<double>& radii, const std::vector<double>& deviations,
                              double scale);
ExponentFit estimate_space_exponent(const DeviationProfile& profile, double scale);

/// Time lags snapped to whole multiples of the stored level spacing and
/// D_t(lag) = sup |u(x, t) - u(x, t - lag)| over grid nodes |x| <= x_radius
/// and stored levels t in [t_lo, t_hi]. Assumes uniformly spaced levels.
struct LagProfile {
  std::vector<double> lags;
  std::vector<double> deviations;
};

LagProfile time_deviations(const SpaceTimeField& u, double x_radius, double t_lo, double t_hi,
                           const std::vector<double>& taus);

/// Fits D_t against the lag.
ExponentFit estimate_time_exponent(const SpaceTimeField& u, double x_radius, double t_lo, double t_hi,
                                   const std::vector<double>& taus);

/// beta <= 1: sup over node pairs in |x| <= radius of |u(x) - u(y)| / |x - y|^beta.
/// 1 < beta < 2: sup over centers and dyadic radii of r^(-beta) D(r, z) in
/// affine mode on that level.
double holder_seminorm_space(const SpaceTimeField& u, std::size_t level, double radius, double beta);
/// sup over stored level pairs in [t_lo, t_hi] of |u(x, t) - u(x, s)| / |t - s|^gamma at the node nearest x.
double holder_seminorm_time(const SpaceTimeField& u, double x, double t_lo, double t_hi, double gamma);

/// Largest radius for which every cylinder centered in Q_{1/2} stays in
/// B_1 x (-1, 0] and inside the grid.
double trusted_radius(const Grid& grid, double sigma);

}  // namespace roughlab
