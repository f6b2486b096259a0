#include "roughlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "roughlab/errors.hpp"
#include "roughlab/random.hpp"

namespace roughlab {

namespace {

// Integral of y^p over [u, v], 0 <= u < v, written to avoid cancellation
// when v/u is close to one.
double power_integral(double u, double v, double p) {
  const double q = p + 1.0;
  if (u == 0.0) {
    if (!(q > 0.0)) throw QuadratureError("power weight is not integrable at the origin");
    return std::pow(v, q) / q;
  }
  const double log_ratio = std::log1p((v - u) / u);
  if (std::fabs(q) < 1e-300) return log_ratio;
  return std::pow(u, q) * std::expm1(q * log_ratio) / q;
}

double adaptive(const std::function<double(double)>& f, double lo, double hi) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 20, 1e-13, &error);
  if (!std::isfinite(value) || !(error <= 1e-8 * std::max(1.0, std::fabs(value)))) {
    throw QuadratureError("adaptive quadrature failed on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return value;
}

constexpr int kDyadicLow = -20;
constexpr int kDyadicHigh = 40;

}  // namespace

RadialProfile RadialProfile::constant(double c) {
  RadialProfile p;
  p.below_ = c;
  p.above_ = c;
  return p;
}

RadialProfile RadialProfile::piecewise(std::vector<double> breaks, std::vector<double> values, double below,
                                       double above) {
  if (breaks.size() < 2 || values.size() + 1 != breaks.size()) {
    throw DomainError("piecewise profile needs one value per interval between breaks");
  }
  for (std::size_t k = 1; k < breaks.size(); ++k) {
    if (!(breaks[k] > breaks[k - 1]) || !(breaks[0] > 0.0)) throw DomainError("profile breaks must increase");
  }
  RadialProfile p;
  p.breaks_ = std::move(breaks);
  p.values_ = std::move(values);
  p.below_ = below;
  p.above_ = above;
  return p;
}

RadialProfile RadialProfile::callable(std::function<double(double)> a) {
  if (!a) throw DomainError("callable profile is empty");
  RadialProfile p;
  p.fn_ = std::move(a);
  return p;
}

double RadialProfile::operator()(double y) const {
  if (fn_) return fn_(y);
  const double r = std::fabs(y);
  if (breaks_.empty()) return below_;
  if (r < breaks_.front()) return below_;
  if (r >= breaks_.back()) return above_;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

RadialProfile RadialProfile::scaled(double r) const {
  if (!(r > 0.0)) throw DomainError("profile scale must be positive");
  if (fn_) {
    auto f = fn_;
    return callable([f, r](double y) { return f(r * y); });
  }
  RadialProfile p = *this;
  for (double& b : p.breaks_) b /= r;
  return p;
}

double RadialProfile::integrate_power(double lo, double hi, double p) const {
  if (!(hi > lo) || lo < 0.0) return 0.0;
  if (fn_) {
    auto sym = [this](double y) { return 0.5 * (fn_(y) + fn_(-y)); };
    if (lo == 0.0) {
      // s = y^(p+1) removes the integrable singularity at the origin.
      const double q = p + 1.0;
      if (!(q > 0.0)) throw QuadratureError("power weight is not integrable at the origin");
      return adaptive([&](double s) { return sym(std::pow(s, 1.0 / q)); }, 0.0, std::pow(hi, q)) / q;
    }
    return adaptive([&](double y) { return sym(y) * std::pow(y, p); }, lo, hi);
  }
  if (breaks_.empty()) return below_ * power_integral(lo, hi, p);
  double total = 0.0;
  double a = lo;
  if (a < breaks_.front()) {
    const double b = std::min(hi, breaks_.front());
    total += below_ * power_integral(a, b, p);
    a = b;
  }
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a);
  std::size_t k = static_cast<std::size_t>(it - breaks_.begin());  // a < breaks_[k]
  while (a < hi && k < breaks_.size()) {
    const double b = std::min(hi, breaks_[k]);
    if (b > a) total += values_[k - 1] * power_integral(a, b, p);
    a = b;
    ++k;
  }
  if (a < hi) total += above_ * power_integral(a, hi, p);
  return total;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::power_constant: return "power";
    case KernelKind::dyadic_rough: return "dyadic_rough";
    case KernelKind::user_callable: return "callable";
  }
  return "unknown";
}

Kernel Kernel::power(const EllipticityParams& params, double c) {
  params.validate();
  if (!(c >= params.lambda && c <= params.Lambda)) {
    throw DomainError("constant profile " + std::to_string(c) + " is outside [lambda, Lambda]");
  }
  Kernel k(params, KernelKind::power_constant, RadialProfile::constant(c));
  k.constant_ = c;
  return k;
}

Kernel Kernel::dyadic_rough(const EllipticityParams& params, std::uint64_t seed) {
  params.validate();
  const std::uint64_t key = mix64(seed ^ label_hash("dyadic-rough"));
  std::vector<double> breaks;
  std::vector<double> values;
  for (int k = kDyadicLow; k <= kDyadicHigh + 1; ++k) breaks.push_back(std::ldexp(1.0, k));
  for (int k = kDyadicLow; k <= kDyadicHigh; ++k) {
    values.push_back(params.lambda + (params.Lambda - params.lambda) * hashed_uniform(key, k));
  }
  Kernel out(params, KernelKind::dyadic_rough,
             RadialProfile::piecewise(std::move(breaks), std::move(values), params.lambda, params.lambda));
  out.seed_ = seed;
  return out;
}

Kernel Kernel::callable(const EllipticityParams& params, std::function<double(double)> a) {
  params.validate();
  return Kernel(params, KernelKind::user_callable, RadialProfile::callable(std::move(a)));
}

double Kernel::operator()(double y) const {
  if (params_.sigma >= 2.0) return 0.0;
  return profile_(y) * (2.0 - params_.sigma) / std::pow(std::fabs(y), 1.0 + params_.sigma);
}

Kernel Kernel::rescaled(double r) const {
  Kernel out = *this;
  out.profile_ = profile_.scaled(r);
  out.scale_ = scale_ * r;
  return out;
}

BoundsReport kernel_bounds_check(const Kernel& kernel, std::size_t n_probes) {
  BoundsReport report;
  if (n_probes == 0) throw DomainError("need at least one probe");
  const auto& p = kernel.params();
  const double sigma = p.sigma;
  for (std::size_t k = 0; k < n_probes; ++k) {
    const double expo = n_probes == 1 ? 0.0 : -6.0 + 12.0 * static_cast<double>(k) / static_cast<double>(n_probes - 1);
    const double r = std::pow(10.0, expo);
    ++report.probes;
    const double kp = kernel(r);
    const double km = kernel(-r);
    double lower, upper, value_p, value_m;
    if (sigma >= 2.0) {
      // Second-order class: the profile itself carries the bounds.
      lower = p.lambda;
      upper = p.Lambda;
      value_p = kernel.a(r);
      value_m = kernel.a(-r);
    } else {
      const double env = (2.0 - sigma) / std::pow(r, 1.0 + sigma);
      lower = p.lambda * env;
      upper = p.Lambda * env;
      value_p = kp;
      value_m = km;
    }
    const double slack = 1e-12 * upper;
    const bool ok = std::isfinite(value_p) && value_p > 0.0 && value_p >= lower - slack &&
                    value_p <= upper + slack && value_m == value_p;
    if (!ok) {
      report.passed = false;
      report.first_violation = r;
      if (value_m != value_p) report.reason = "asymmetric kernel";
      else if (value_p > upper + slack) report.reason = "above Lambda envelope";
      else report.reason = "below lambda envelope";
      return report;
    }
  }
  return report;
}

TailLayout make_tail_layout(const EllipticityParams& params, const Grid& grid, const TailSpec& spec) {
  params.validate();
  grid.validate();
  TailLayout layout;
  const double dx = grid.dx();
  const double extent = spec.lattice_extent > 0.0 ? spec.lattice_extent : 2.0 * grid.half_width;
  const auto lattice = static_cast<std::size_t>(std::ceil(extent / dx - 1e-9));
  const double start = (static_cast<double>(lattice) + 0.5) * dx;
  layout.cutoff = start;
  const double sigma = params.sigma;
  if (sigma >= 2.0) return layout;
  const double beta = spec.growth;
  if (beta >= sigma) throw DivergenceError("exterior growth must stay below sigma for the operator tail");
  if (!(spec.cutoff_tol > 0.0) || !(spec.resolve_tol > 0.0) || !(spec.resolve_spacing > 0.0)) {
    throw DomainError("tail tolerances and spacing must be positive");
  }
  // Bound on the tail contribution of |delta| K beyond radius Y:
  // 4 Lambda C 2^beta (2 - sigma) Y^(beta - sigma) / (sigma - beta).
  const double data = std::max(spec.data_bound, 1.0);
  const double coef = 4.0 * params.Lambda * data * std::pow(2.0, beta) * (2.0 - sigma) / (sigma - beta);
  auto bound = [&](double y) { return coef * std::pow(y, beta - sigma); };
  const double floor_radius = beta > 0.0 ? 1.0 + grid.half_width : 0.0;
  const double y_resolve = std::pow(coef / spec.resolve_tol, 1.0 / (sigma - beta));

  constexpr double kRatio = 1.25;
  constexpr std::size_t kMaxCells = 4000;
  double a = start;
  std::size_t resolved = 0;
  for (std::size_t cell = 0; cell < kMaxCells; ++cell) {
    if (a >= floor_radius && bound(a) < spec.cutoff_tol) break;
    const double b = kRatio * a;
    if (!std::isfinite(b)) break;
    std::size_t pieces = 1;
    if (a < y_resolve && resolved < spec.max_resolved_nodes) {
      pieces = static_cast<std::size_t>(std::ceil((b - a) / spec.resolve_spacing));
      pieces = std::clamp<std::size_t>(pieces, 1, spec.max_resolved_nodes - resolved);
      resolved += pieces;
    }
    for (std::size_t q = 0; q < pieces; ++q) {
      const double lo = a + (b - a) * static_cast<double>(q) / static_cast<double>(pieces);
      const double hi = q + 1 == pieces ? b : a + (b - a) * static_cast<double>(q + 1) / static_cast<double>(pieces);
      layout.lo.push_back(lo);
      layout.hi.push_back(hi);
      layout.node.push_back(0.5 * (lo + hi));
    }
    a = b;
  }
  layout.cutoff = a;
  layout.truncation_bound = bound(a);
  if (!(layout.truncation_bound < spec.cutoff_tol)) {
    throw DivergenceError("operator tail does not reach the truncation tolerance; growth too close to sigma");
  }
  return layout;
}

double kernel_mass(const Kernel& kernel, double lo, double hi) {
  const double sigma = kernel.params().sigma;
  if (sigma >= 2.0) return 0.0;
  return (2.0 - sigma) * kernel.profile().integrate_power(lo, hi, -1.0 - sigma);
}

std::vector<double> DiscreteKernel::stencil() const {
  std::vector<double> s = cell;
  if (!s.empty()) {
    const double dx = grid.dx();
    s[0] += 2.0 * w0 / (dx * dx);
  }
  return s;
}

double DiscreteKernel::total_mass() const {
  double s = 0.0;
  for (double w : cell) s += w;
  for (double w : tail_weight) s += w;
  const double dx = grid.dx();
  return s + 2.0 * w0 / (dx * dx);
}

namespace {

struct NearOrigin {
  double exact = 0.0;
  double excess = 0.0;
};

NearOrigin near_origin(const RadialProfile& profile, double sigma, const std::vector<double>& cell, double dx) {
  NearOrigin out;
  const double h = 0.5 * dx;
  out.exact = (2.0 - sigma) * profile.integrate_power(0.0, h, 1.0 - sigma);
  for (std::size_t j = 1; j <= cell.size(); ++j) {
    const double y = static_cast<double>(j) * dx;
    const double lo = (static_cast<double>(j) - 0.5) * dx;
    const double hi = lo + dx;
    const double second_moment = 2.0 * (2.0 - sigma) * profile.integrate_power(lo, hi, 1.0 - sigma);
    out.excess += 0.5 * (y * y * cell[j - 1] - second_moment);
  }
  return out;
}

}  // namespace

DiscreteKernel discretize_kernel(const Kernel& kernel, const Grid& grid, std::shared_ptr<const TailLayout> tail) {
  const auto& params = kernel.params();
  params.validate();
  grid.validate();
  if (params.n != 1) throw DomainError("discretization is implemented for n = 1 only");
  DiscreteKernel out;
  out.grid = grid;
  out.params = params;
  out.tail = std::move(tail);
  const double dx = grid.dx();
  const double lattice_end = out.tail->lo.empty() ? out.tail->cutoff : out.tail->lo.front();
  const auto lattice = static_cast<std::size_t>(std::llround(lattice_end / dx - 0.5));
  out.cell.assign(lattice, 0.0);
  out.tail_weight.assign(out.tail->lo.size(), 0.0);
  const double sigma = params.sigma;
  if (sigma >= 2.0) {
    out.w0_exact = params.c_n * kernel.a(std::numeric_limits<double>::min());
    out.w0 = out.w0_exact;
    return out;
  }
  for (std::size_t j = 1; j <= lattice; ++j) {
    const double lo = (static_cast<double>(j) - 0.5) * dx;
    out.cell[j - 1] = 2.0 * kernel_mass(kernel, lo, lo + dx);
    if (!std::isfinite(out.cell[j - 1]) || out.cell[j - 1] < 0.0) {
      throw QuadratureError("non-finite or negative cell weight at j = " + std::to_string(j));
    }
  }
  for (std::size_t k = 0; k < out.tail_weight.size(); ++k) {
    out.tail_weight[k] = 2.0 * kernel_mass(kernel, out.tail->lo[k], out.tail->hi[k]);
    if (!std::isfinite(out.tail_weight[k]) || out.tail_weight[k] < 0.0) {
      throw QuadratureError("non-finite or negative tail weight");
    }
  }
  const NearOrigin own = near_origin(kernel.profile(), sigma, out.cell, dx);
  std::vector<double> unit_cell(lattice);
  const RadialProfile unit = RadialProfile::constant(1.0);
  for (std::size_t j = 1; j <= lattice; ++j) {
    const double lo = (static_cast<double>(j) - 0.5) * dx;
    unit_cell[j - 1] = 2.0 * (2.0 - sigma) * unit.integrate_power(lo, lo + dx, -1.0 - sigma);
  }
  const NearOrigin ref = near_origin(unit, sigma, unit_cell, dx);
  const double unit_w0 = std::max(0.0, ref.exact - ref.excess);
  out.w0_exact = own.exact;
  out.w0 = std::clamp(own.exact - own.excess, params.lambda * unit_w0, params.Lambda * unit_w0);
  return out;
}

DiscreteKernel discretize_kernel(const Kernel& kernel, const Grid& grid, const TailSpec& spec) {
  return discretize_kernel(kernel, grid, std::make_shared<const TailLayout>(make_tail_layout(kernel.params(), grid, spec)));
}

}  // namespace roughlab
