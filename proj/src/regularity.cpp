#include "roughlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roughlab/errors.hpp"
#include "roughlab/parallel.hpp"

namespace roughlab {

std::string to_string(FitMode mode) { return mode == FitMode::affine ? "affine" : "constant"; }

SnappedCylinder snap(const SpaceTimeField& u, const Cylinder& q) {
  const Grid& g = u.grid();
  const double dx = g.dx();
  SnappedCylinder s;
  s.center = g.nearest_index(q.center_x);
  if (!g.on_grid(s.center)) throw DomainError("cylinder center is off the grid");
  s.center_level = u.nearest_level(q.center_t);
  s.half_width = static_cast<std::ptrdiff_t>(std::floor(q.radius / dx + 1e-9));
  s.snap_radius = static_cast<double>(s.half_width) * dx;
  if (s.nodes() < 4) throw ResolutionError("cylinder radius " + std::to_string(q.radius) + " spans fewer than 4 nodes");
  if (!g.on_grid(s.center - s.half_width) || !g.on_grid(s.center + s.half_width)) {
    throw DomainError("cylinder leaves the grid");
  }
  const double t_c = u.time(s.center_level);
  const double lower = t_c - q.depth();
  const double tol = 1e-12 * std::max(1.0, std::fabs(t_c));
  std::size_t lo = s.center_level;
  while (lo > 0 && u.time(lo - 1) > lower + tol) --lo;
  s.level_lo = lo;
  s.level_hi = s.center_level;
  if (s.levels() < std::min<std::size_t>(4, u.levels())) {
    throw ResolutionError("cylinder depth covers fewer than 4 stored time levels");
  }
  return s;
}

AffineFit fit_plane(const SpaceTimeField& u, const Cylinder& q, FitMode mode) {
  AffineFit fit;
  fit.cylinder = q;
  fit.mode = mode;
  fit.nodes = snap(u, q);
  const auto& s = fit.nodes;
  const double dx = u.grid().dx();
  if (mode == FitMode::affine) {
    double su = 0.0, suo = 0.0, soo = 0.0;
    for (std::size_t m = s.level_lo; m <= s.level_hi; ++m) {
      const auto lev = u.level(m);
      for (std::ptrdiff_t k = -s.half_width; k <= s.half_width; ++k) {
        const double v = lev[static_cast<std::size_t>(s.center + k)];
        const double o = static_cast<double>(k) * dx;
        su += v;
        suo += v * o;
        soo += o * o;
      }
    }
    const double count = static_cast<double>(s.levels() * s.nodes());
    fit.a = suo / soo;
    fit.b = su / count;
  } else {
    fit.a = 0.0;
    fit.b = u.level(s.center_level)[static_cast<std::size_t>(s.center)];
  }
  double dev = 0.0;
  for (std::size_t m = s.level_lo; m <= s.level_hi; ++m) {
    const auto lev = u.level(m);
    for (std::ptrdiff_t k = -s.half_width; k <= s.half_width; ++k) {
      const double v = lev[static_cast<std::size_t>(s.center + k)];
      dev = std::max(dev, std::fabs(v - fit(static_cast<double>(k) * dx)));
    }
  }
  fit.deviation = dev;
  return fit;
}

MomentReport residual_moments_check(const AffineFit& fit, const SpaceTimeField& u, double tol) {
  MomentReport report;
  const auto& s = fit.nodes;
  const double dx = u.grid().dx();
  double sum = 0.0, first = 0.0, scale = 1.0;
  for (std::size_t m = s.level_lo; m <= s.level_hi; ++m) {
    const auto lev = u.level(m);
    for (std::ptrdiff_t k = -s.half_width; k <= s.half_width; ++k) {
      const double v = lev[static_cast<std::size_t>(s.center + k)];
      const double o = static_cast<double>(k) * dx;
      const double r = v - fit(o);
      scale = std::max(scale, std::fabs(v));
      sum += r;
      first += r * o;
    }
  }
  const double count = static_cast<double>(s.levels() * s.nodes());
  report.mean = sum / count / scale;
  report.first_moment = first / count / s.snap_radius / scale;
  if (fit.mode == FitMode::constant) {
    report.first_moment_asserted = false;
    return report;
  }
  report.passed = std::fabs(report.mean) <= tol && std::fabs(report.first_moment) <= tol;
  return report;
}

std::vector<double> DeviationProfile::theta(double beta) const {
  std::vector<double> out(radii.size());
  double running = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    running = std::max(running, std::pow(radii[k], -beta) * sup[k]);
    out[k] = running;
  }
  return out;
}

std::vector<double> dyadic_radii(double r_min, double r_max) {
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw DomainError("radius window must satisfy 0 < r_min <= r_max");
  std::vector<double> radii;
  int k = static_cast<int>(std::floor(std::log2(r_max) + 1e-9));
  for (double r = std::ldexp(1.0, k); r >= r_min * (1.0 - 1e-12); r = std::ldexp(1.0, --k)) {
    if (r <= r_max * (1.0 + 1e-12)) radii.push_back(r);
  }
  return radii;
}

DeviationProfile deviation_profile(const SpaceTimeField& u, const std::vector<std::pair<double, double>>& centers,
                                   const std::vector<double>& radii, double sigma, FitMode mode) {
  if (centers.empty() || radii.empty()) throw DomainError("deviation profile needs centers and radii");
  const double floor_radius = 4.0 * u.grid().dx() * (1.0 - 1e-9);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (radii[k] < floor_radius) throw ResolutionError("radius below 4 dx");
    if (k > 0 && !(radii[k] < radii[k - 1])) throw DomainError("radii must decrease");
  }
  DeviationProfile p;
  p.radii = radii;
  p.centers = centers;
  p.mode = mode;
  p.per_center.assign(radii.size(), std::vector<double>(centers.size(), 0.0));
  const std::size_t cells = radii.size() * centers.size();
  parallel_for(0, cells, [&](std::size_t idx) {
    const std::size_t r = idx / centers.size();
    const std::size_t c = idx % centers.size();
    const Cylinder q = cylinder(centers[c].first, centers[c].second, radii[r], sigma);
    p.per_center[r][c] = fit_plane(u, q, mode).deviation;
  });
  p.sup.resize(radii.size());
  for (std::size_t r = 0; r < radii.size(); ++r) {
    p.sup[r] = *std::max_element(p.per_center[r].begin(), p.per_center[r].end());
  }
  return p;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double sse = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double e = y[k] - f.intercept - f.slope * x[k];
      sse += e * e;
    }
    f.slope_error = std::sqrt(sse / (n - 2.0) / sxx);
  }
  return f;
}

}  // namespace

ExponentFit estimate_exponent(const std::vector<double>& radii, const std::vector<double>& deviations,
                              double scale) {
  if (radii.size() != deviations.size()) throw DomainError("radii and deviations differ in length");
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::fabs(scale);
  std::vector<std::pair<double, double>> usable;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (deviations[k] > floor && radii[k] > 0.0) usable.emplace_back(radii[k], deviations[k]);
  }
  ExponentFit fit;
  if (usable.empty()) {
    fit.exponent = kExponentCap;
    fit.band_lo = kExponentCap;
    fit.band_hi = kExponentCap;
    fit.sentinel = true;
    return fit;
  }
  if (usable.size() < 2) throw EstimationError("fewer than two radii above the noise floor");
  std::sort(usable.begin(), usable.end());  // increasing radius
  auto fit_range = [&](std::size_t count) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < count; ++k) {
      lx.push_back(std::log(usable[k].first));
      ly.push_back(std::log(usable[k].second));
    }
    return least_squares(lx, ly);
  };
  std::size_t used = usable.size();
  LineFit line = fit_range(used);
  if (usable.size() >= 4) {
    const std::size_t half = (usable.size() + 1) / 2;
    const LineFit small = fit_range(half);
    if (std::fabs(small.slope - line.slope) > 0.15) {
      line = small;
      used = half;
      fit.used_small_half = true;
    }
  }
  fit.exponent = std::min(line.slope, kExponentCap);
  fit.slope_error = line.slope_error;
  fit.band_lo = fit.exponent - 2.0 * line.slope_error;
  fit.band_hi = fit.exponent + 2.0 * line.slope_error;
  for (std::size_t k = 0; k < used; ++k) {
    fit.used_radii.push_back(usable[k].first);
    fit.constant = std::max(fit.constant, std::pow(usable[k].first, -fit.exponent) * usable[k].second);
  }
  return fit;
}

ExponentFit estimate_space_exponent(const DeviationProfile& profile, double scale) {
  return estimate_exponent(profile.radii, profile.sup, scale);
}

LagProfile time_deviations(const SpaceTimeField& u, double x_radius, double t_lo, double t_hi,
                           const std::vector<double>& taus) {
  if (u.levels() < 2) throw ResolutionError("time deviations need at least two stored levels");
  const double spacing = (u.time(u.levels() - 1) - u.time(0)) / static_cast<double>(u.levels() - 1);
  const Grid& g = u.grid();
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::fabs(g.node(static_cast<std::ptrdiff_t>(i))) <= x_radius + 1e-12) nodes.push_back(i);
  }
  const double tol = 1e-9 * spacing;
  LagProfile out;
  for (double tau : taus) {
    const auto q = static_cast<std::size_t>(std::max(1.0, std::round(tau / spacing)));
    double d = 0.0;
    bool any = false;
    for (std::size_t m = q; m < u.levels(); ++m) {
      if (u.time(m) < t_lo - tol || u.time(m) > t_hi + tol) continue;
      any = true;
      const auto a = u.level(m);
      const auto b = u.level(m - q);
      for (std::size_t i : nodes) d = std::max(d, std::fabs(a[i] - b[i]));
    }
    if (!any) throw ResolutionError("time lag " + std::to_string(tau) + " reaches before the stored levels");
    out.lags.push_back(static_cast<double>(q) * spacing);
    out.deviations.push_back(d);
  }
  return out;
}

ExponentFit estimate_time_exponent(const SpaceTimeField& u, double x_radius, double t_lo, double t_hi,
                                   const std::vector<double>& taus) {
  const LagProfile lp = time_deviations(u, x_radius, t_lo, t_hi, taus);
  return estimate_exponent(lp.lags, lp.deviations, u.sup_norm());
}

double holder_seminorm_space(const SpaceTimeField& u, std::size_t level, double radius, double beta) {
  if (!(beta > 0.0 && beta < 2.0)) throw DomainError("space exponent must lie in (0, 2)");
  const Grid& g = u.grid();
  const auto lev = u.level(level);
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::fabs(g.node(static_cast<std::ptrdiff_t>(i))) <= radius + 1e-12) nodes.push_back(i);
  }
  if (nodes.size() < 2) throw ResolutionError("ball holds fewer than two nodes");
  if (beta <= 1.0) {
    double s = 0.0;
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      for (std::size_t q = p + 1; q < nodes.size(); ++q) {
        const double h = static_cast<double>(nodes[q] - nodes[p]) * g.dx();
        s = std::max(s, std::fabs(lev[nodes[q]] - lev[nodes[p]]) / std::pow(h, beta));
      }
    }
    return s;
  }
  const SpaceTimeField one(g, {u.time(level)}, std::vector<double>(lev.begin(), lev.end()), u.exterior());
  const double r_max = std::min(radius, 0.5 * (g.half_width - radius));
  const std::vector<double> radii = dyadic_radii(4.0 * g.dx(), r_max);
  if (radii.empty()) throw ResolutionError("no dyadic radius fits the ball");
  std::vector<std::pair<double, double>> centers;
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 32);
  for (std::size_t k = 0; k < nodes.size(); k += stride) {
    centers.emplace_back(g.node(static_cast<std::ptrdiff_t>(nodes[k])), u.time(level));
  }
  const DeviationProfile p = deviation_profile(one, centers, radii, 1.0, FitMode::affine);
  double s = 0.0;
  for (std::size_t r = 0; r < radii.size(); ++r) s = std::max(s, std::pow(radii[r], -beta) * p.sup[r]);
  return s;
}

double holder_seminorm_time(const SpaceTimeField& u, double x, double t_lo, double t_hi, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("time exponent must lie in (0, 1]");
  const std::ptrdiff_t i = u.grid().nearest_index(x);
  if (!u.grid().on_grid(i)) throw DomainError("point is off the grid");
  std::vector<std::size_t> levels;
  for (std::size_t m = 0; m < u.levels(); ++m) {
    if (u.time(m) >= t_lo - 1e-12 && u.time(m) <= t_hi + 1e-12) levels.push_back(m);
  }
  double s = 0.0;
  for (std::size_t p = 0; p < levels.size(); ++p) {
    for (std::size_t q = p + 1; q < levels.size(); ++q) {
      const double dt = u.time(levels[q]) - u.time(levels[p]);
      s = std::max(s, std::fabs(u.at(levels[q], i) - u.at(levels[p], i)) / std::pow(dt, gamma));
    }
  }
  return s;
}

double trusted_radius(const Grid& grid, double sigma) {
  return std::min({0.5, std::pow(0.5, 1.0 / sigma), 0.5 * (grid.half_width - 0.5)});
}

}  // namespace roughlab
