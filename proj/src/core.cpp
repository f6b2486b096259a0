#include "roughlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "roughlab/errors.hpp"

namespace roughlab {

void EllipticityParams::validate() const {
  if (n != 1 && n != 2) throw DomainError("dimension must be 1 or 2");
  if (!(sigma0 > 0.0 && sigma0 < 2.0)) throw DomainError("sigma0 must lie in (0, 2)");
  if (!(sigma >= sigma0 && sigma <= 2.0)) throw DomainError("sigma must lie in [sigma0, 2]");
  if (!(lambda > 0.0 && Lambda >= lambda)) throw DomainError("need 0 < lambda <= Lambda");
  if (!(c_n > 0.0)) throw DomainError("c_n must be positive");
  if (!std::isfinite(Lambda) || !std::isfinite(c_n)) throw DomainError("non-finite ellipticity");
}

void Grid::validate() const {
  if (n_points < 8) throw DomainError("grid needs at least 8 intervals");
  if (!(half_width > 1.0)) throw DomainError("grid half-width must exceed 1 so that B_1 is interior");
  if (!(t_end > t0)) throw DomainError("grid time interval is empty");
}

std::ptrdiff_t Grid::nearest_index(double x) const noexcept {
  return static_cast<std::ptrdiff_t>(std::llround((x + half_width) / dx()));
}

double BoundClass::at(double x) const noexcept {
  if (kind == Kind::bounded) return C;
  return C * std::pow(1.0 + std::fabs(x), beta);
}

ExteriorData ExteriorData::zero() {
  return {[](double, double) { return 0.0; }, BoundClass::bounded(0.0), false};
}

ExteriorData ExteriorData::constant(double c) {
  return {[c](double, double) { return c; }, BoundClass::bounded(std::fabs(c)), false};
}

bool ExteriorData::respects_bound(std::size_t probes, double t) const {
  const std::size_t n = std::max<std::size_t>(probes, 2);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = std::pow(10.0, -3.0 + 9.0 * static_cast<double>(k) / static_cast<double>(n - 1));
    for (double x : {r, -r}) {
      const double v = fn(x, t);
      if (!std::isfinite(v) || std::fabs(v) > bound.at(x) * (1.0 + 1e-12) + 1e-300) return false;
    }
  }
  return true;
}

SpaceTimeField::SpaceTimeField(Grid grid, std::vector<double> times, std::vector<double> values,
                               ExteriorData exterior)
    : grid_(grid), exterior_(std::move(exterior)) {
  grid_.validate();
  if (times.empty()) throw DomainError("field needs at least one time level");
  if (values.size() != times.size() * grid_.size()) {
    throw DomainError("field values do not match grid size times level count");
  }
  for (std::size_t m = 1; m < times.size(); ++m) {
    if (!(times[m] > times[m - 1])) throw DomainError("time levels must increase");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("field values must be finite");
  }
  if (!exterior_.fn) throw DomainError("field needs an exterior callable");
  times_ = std::make_shared<const std::vector<double>>(std::move(times));
  values_ = std::make_shared<const std::vector<double>>(std::move(values));
}

SpaceTimeField SpaceTimeField::sample(const Grid& grid, std::vector<double> times,
                                      const std::function<double(double, double)>& fn,
                                      BoundClass bound, bool time_dependent) {
  std::vector<double> values;
  values.reserve(times.size() * grid.size());
  for (double t : times) {
    for (std::size_t i = 0; i < grid.size(); ++i) values.push_back(fn(grid.node(static_cast<std::ptrdiff_t>(i)), t));
  }
  return SpaceTimeField(grid, std::move(times), std::move(values), ExteriorData{fn, bound, time_dependent});
}

std::span<const double> SpaceTimeField::level(std::size_t m) const {
  return std::span<const double>(values_->data() + m * grid_.size(), grid_.size());
}

double SpaceTimeField::at(std::size_t m, std::ptrdiff_t i) const {
  if (grid_.on_grid(i)) return (*values_)[m * grid_.size() + static_cast<std::size_t>(i)];
  return exterior_(grid_.node(i), time(m));
}

double SpaceTimeField::value_on_level(std::size_t m, double x) const {
  if (std::fabs(x) > grid_.half_width) return exterior_(x, time(m));
  const double s = (x + grid_.half_width) / grid_.dx();
  const double fl = std::floor(s);
  const double f = s - fl;
  const auto i = static_cast<std::ptrdiff_t>(fl);
  // Points within rounding of a node read the node itself.
  if (f < 1e-10) return at(m, i);
  if (f > 1.0 - 1e-10) return at(m, i + 1);
  // Four-point Lagrange cubic through i-1 .. i+2.
  const double p0 = at(m, i - 1), p1 = at(m, i), p2 = at(m, i + 1), p3 = at(m, i + 2);
  const double c0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
  const double c1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  const double c2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
  const double c3 = (f + 1.0) * f * (f - 1.0) / 6.0;
  return c0 * p0 + c1 * p1 + c2 * p2 + c3 * p3;
}

double SpaceTimeField::value(double x, double t) const {
  if (std::fabs(x) > grid_.half_width) return exterior_(x, t);
  const auto& ts = *times_;
  const double tol = 1e-12 * std::max(1.0, std::fabs(t));
  if (t < ts.front() - tol || t > ts.back() + tol) {
    throw DomainError("time " + std::to_string(t) + " is outside the stored levels");
  }
  auto it = std::lower_bound(ts.begin(), ts.end(), t - tol);
  const auto hi = static_cast<std::size_t>(it - ts.begin());
  if (hi >= ts.size() || std::fabs(ts[hi] - t) <= tol) return value_on_level(std::min(hi, ts.size() - 1), x);
  if (hi == 0) return value_on_level(0, x);
  const std::size_t lo = hi - 1;
  const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return (1.0 - w) * value_on_level(lo, x) + w * value_on_level(hi, x);
}

std::size_t SpaceTimeField::nearest_level(double t) const {
  const auto& ts = *times_;
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.begin()) return 0;
  if (it == ts.end()) return ts.size() - 1;
  const auto hi = static_cast<std::size_t>(it - ts.begin());
  return (ts[hi] - t) < (t - ts[hi - 1]) ? hi : hi - 1;
}

std::optional<std::size_t> SpaceTimeField::find_level(double t, double tol) const {
  const std::size_t m = nearest_level(t);
  if (std::fabs(time(m) - t) <= tol * std::max(1.0, std::fabs(t))) return m;
  return std::nullopt;
}

double SpaceTimeField::sup_norm() const {
  double s = 0.0;
  for (double v : *values_) s = std::max(s, std::fabs(v));
  return s;
}

double Cylinder::depth() const { return std::pow(radius, sigma); }

bool Cylinder::contains(double x, double t) const {
  return std::fabs(x - center_x) <= radius && t > t_lo() && t <= center_t;
}

Cylinder cylinder(double center_x, double center_t, double r, double sigma) {
  if (!(r > 0.0)) throw DomainError("cylinder radius must be positive");
  if (!(sigma > 0.0 && sigma <= 2.0)) throw DomainError("cylinder order must lie in (0, 2]");
  return Cylinder{center_x, center_t, r, sigma};
}

double weight_omega(double x, double sigma0, int n) {
  return (2.0 - sigma0) / (1.0 + std::pow(std::fabs(x), n + sigma0));
}

namespace {

// Bound on the two-sided tail of |u| * omega beyond radius R (R >= 1).
double tail_bound(const BoundClass& b, double sigma0, double R) {
  const double beta = b.exponent();
  return 2.0 * b.C * std::pow(2.0, beta) * (2.0 - sigma0) * std::pow(R, beta - sigma0) / (sigma0 - beta);
}

}  // namespace

double weighted_l1_norm(const SpaceTimeField& u, std::size_t level, double sigma0) {
  if (!(sigma0 > 0.0 && sigma0 < 2.0)) throw DomainError("sigma0 must lie in (0, 2)");
  const Grid& g = u.grid();
  const BoundClass& bound = u.exterior().bound;
  if (bound.exponent() >= sigma0) {
    throw DivergenceError("exterior growth exponent must be below sigma0 for the weighted norm");
  }
  const auto vals = u.level(level);
  const double dx = g.dx();
  double inner = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double w = (i == 0 || i + 1 == vals.size()) ? 0.5 : 1.0;
    inner += w * std::fabs(vals[i]) * weight_omega(g.node(static_cast<std::ptrdiff_t>(i)), sigma0);
  }
  inner *= dx;

  const double t = u.time(level);
  constexpr double kTol = 1e-8;
  double outer = 0.0;
  if (bound.C > 0.0) {
    using Gauss = boost::math::quadrature::gauss<double, 10>;
    double a = g.half_width;
    for (int panel = 0; panel < 100000; ++panel) {
      if (a >= 1.0 && tail_bound(bound, sigma0, a) < kTol) break;
      const double b = 1.25 * a;
      auto integrand = [&](double x) {
        return (std::fabs(u.exterior()(x, t)) + std::fabs(u.exterior()(-x, t))) * weight_omega(x, sigma0);
      };
      outer += Gauss::integrate(integrand, a, b);
      a = b;
    }
  }
  return inner + outer;
}

}  // namespace roughlab
