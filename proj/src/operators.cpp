#include "roughlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roughlab/errors.hpp"
#include "roughlab/parallel.hpp"
#include "roughlab/random.hpp"
#include "roughlab/simd.hpp"

namespace roughlab {

double second_difference(const SpaceTimeField& u, std::size_t level, double x, double y) {
  return 0.5 * (u.value_on_level(level, x + y) + u.value_on_level(level, x - y)) - u.value_on_level(level, x);
}

namespace {

bool same_params(const EllipticityParams& a, const EllipticityParams& b) {
  return a.n == b.n && a.sigma == b.sigma && a.sigma0 == b.sigma0 && a.lambda == b.lambda &&
         a.Lambda == b.Lambda && a.c_n == b.c_n;
}

std::size_t lattice_from_layout(const TailLayout& layout, const Grid& grid) {
  const double end = layout.lo.empty() ? layout.cutoff : layout.lo.front();
  return static_cast<std::size_t>(std::llround(end / grid.dx() - 0.5));
}

}  // namespace

IsaacsFamily::IsaacsFamily(std::size_t n_alpha, std::size_t n_beta, std::vector<Kernel> kernels,
                           std::vector<double> constants)
    : n_alpha_(n_alpha), n_beta_(n_beta), kernels_(std::move(kernels)), constants_(std::move(constants)) {
  if (n_alpha == 0 || n_beta == 0) throw DomainError("Isaacs family needs at least one member");
  if (kernels_.size() != n_alpha * n_beta || constants_.size() != kernels_.size()) {
    throw DomainError("Isaacs family arrays must be n_alpha x n_beta");
  }
  for (const auto& k : kernels_) {
    if (!same_params(k.params(), kernels_.front().params())) {
      throw DomainError("all kernels of an Isaacs family must share ellipticity parameters");
    }
  }
  double inf_sup = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n_alpha_; ++a) {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n_beta_; ++b) sup = std::max(sup, constants_[a * n_beta_ + b]);
    inf_sup = std::min(inf_sup, sup);
  }
  shift_ = inf_sup;
  for (double& c : constants_) c -= shift_;
}

IsaacsFamily IsaacsFamily::seeded(const EllipticityParams& params, std::uint64_t seed, std::size_t n_alpha,
                                  std::size_t n_beta, double constant_scale) {
  auto rng = SplitMix64::stream(seed, "isaacs-family");
  std::vector<Kernel> kernels;
  std::vector<double> constants;
  for (std::size_t k = 0; k < n_alpha * n_beta; ++k) {
    kernels.push_back(Kernel::dyadic_rough(params, rng.next()));
    constants.push_back(rng.uniform(-constant_scale, constant_scale));
  }
  return IsaacsFamily(n_alpha, n_beta, std::move(kernels), std::move(constants));
}

IsaacsFamily IsaacsFamily::rescaled(double r, double factor) const {
  std::vector<Kernel> kernels;
  std::vector<double> constants;
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    kernels.push_back(kernels_[k].rescaled(r));
    constants.push_back(factor * constants_[k]);
  }
  return IsaacsFamily(n_alpha_, n_beta_, std::move(kernels), std::move(constants));
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::linear: return "linear";
    case OperatorKind::pucci_plus: return "pucci_plus";
    case OperatorKind::pucci_minus: return "pucci_minus";
    case OperatorKind::isaacs: return "isaacs";
  }
  return "unknown";
}

Operator Operator::linear(Kernel kernel) {
  Operator op;
  op.kind_ = OperatorKind::linear;
  op.params_ = kernel.params();
  op.kernel_ = std::move(kernel);
  return op;
}

Operator Operator::pucci_plus(const EllipticityParams& params) {
  params.validate();
  Operator op;
  op.kind_ = OperatorKind::pucci_plus;
  op.params_ = params;
  return op;
}

Operator Operator::pucci_minus(const EllipticityParams& params) {
  Operator op = pucci_plus(params);
  op.kind_ = OperatorKind::pucci_minus;
  return op;
}

Operator Operator::isaacs(IsaacsFamily family) {
  Operator op;
  op.kind_ = OperatorKind::isaacs;
  op.params_ = family.params();
  op.family_ = std::move(family);
  return op;
}

const Kernel& Operator::kernel() const {
  if (!kernel_) throw DomainError("operator has no single kernel");
  return *kernel_;
}

const IsaacsFamily& Operator::family() const {
  if (!family_) throw DomainError("operator is not an Isaacs operator");
  return *family_;
}

Operator rescale_operator(const Operator& op, double x0, double r, double c, const Affine& ell) {
  if (!(r > 0.0) || !(c > 0.0)) throw DomainError("rescaling needs r > 0 and c > 0");
  if (!std::isfinite(x0) || !std::isfinite(ell.slope) || !std::isfinite(ell.offset)) {
    throw DomainError("rescaling center and affine part must be finite");
  }
  // Translation invariance removes x0 and second differences remove l.
  const double factor = std::pow(r, op.params().sigma) / c;
  switch (op.kind()) {
    case OperatorKind::linear: return Operator::linear(op.kernel().rescaled(r));
    case OperatorKind::pucci_plus:
    case OperatorKind::pucci_minus: return op;
    case OperatorKind::isaacs: return Operator::isaacs(op.family().rescaled(r, factor));
  }
  return op;
}

LatticeField::LatticeField(const Grid& grid, std::size_t lattice, std::shared_ptr<const TailLayout> tail,
                           ExteriorData exterior, std::ptrdiff_t row_lo, std::ptrdiff_t row_hi)
    : grid_(grid), lattice_(lattice), tail_(std::move(tail)), exterior_(std::move(exterior)) {
  if (!exterior_.fn) throw DomainError("lattice field needs exterior data");
  if (!tail_) throw DomainError("lattice field needs a tail layout");
  const auto n = static_cast<std::ptrdiff_t>(grid_.n_points);
  row_lo_ = std::max<std::ptrdiff_t>(row_lo, 0);
  row_hi_ = std::min<std::ptrdiff_t>(row_hi, n);
  padded_.assign(grid_.size() + 2 * lattice_, 0.0);
  const std::size_t rows = row_hi_ >= row_lo_ ? static_cast<std::size_t>(row_hi_ - row_lo_ + 1) : 0;
  rows_.assign(rows * tail_->node.size(), 0.0);
}

void LatticeField::load(std::span<const double> grid_values, double t) {
  if (grid_values.size() != grid_.size()) throw DomainError("grid values do not match the lattice field");
  std::copy(grid_values.begin(), grid_values.end(), padded_.begin() + static_cast<std::ptrdiff_t>(lattice_));
  if (!loaded_ || (exterior_.time_dependent && t != time_)) refresh_exterior(t);
  time_ = t;
  loaded_ = true;
}

void LatticeField::refresh_exterior(double t) {
  const auto n = static_cast<std::ptrdiff_t>(grid_.n_points);
  const auto j = static_cast<std::ptrdiff_t>(lattice_);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto note = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (std::ptrdiff_t i = -j; i < 0; ++i) note(padded_[offset(i)] = exterior_(grid_.node(i), t));
  for (std::ptrdiff_t i = n + 1; i <= n + j; ++i) note(padded_[offset(i)] = exterior_(grid_.node(i), t));
  const std::size_t k_count = tail_->node.size();
  if (k_count > 0) {
    for (std::ptrdiff_t r = row_lo_; r <= row_hi_; ++r) {
      const double x = grid_.node(r);
      double* row = rows_.data() + static_cast<std::size_t>(r - row_lo_) * k_count;
      for (std::size_t k = 0; k < k_count; ++k) {
        const double y = tail_->node[k];
        row[k] = 0.5 * (exterior_(x + y, t) + exterior_(x - y, t));
        note(row[k]);
      }
    }
  }
  ext_min_ = lo;
  ext_max_ = hi;
}

const double* LatticeField::tail_row(std::ptrdiff_t i) const {
  if (!has_row(i)) throw DomainError("no tail row prepared for node " + std::to_string(i));
  return rows_.data() + static_cast<std::size_t>(i - row_lo_) * tail_->node.size();
}

std::span<const double> LatticeField::grid_values() const {
  return std::span<const double>(padded_.data() + lattice_, grid_.size());
}

double LatticeField::min_value() const {
  const auto g = grid_values();
  return std::min(ext_min_, *std::min_element(g.begin(), g.end()));
}

double LatticeField::max_value() const {
  const auto g = grid_values();
  return std::max(ext_max_, *std::max_element(g.begin(), g.end()));
}

DiscreteOperator::DiscreteOperator(const Operator& op, const Grid& grid, const TailSpec& spec)
    : DiscreteOperator(op, grid, std::make_shared<const TailLayout>(make_tail_layout(op.params(), grid, spec))) {}

DiscreteOperator::DiscreteOperator(const Operator& op, const Grid& grid, std::shared_ptr<const TailLayout> layout)
    : kind_(op.kind()), grid_(grid), params_(op.params()), layout_(std::move(layout)) {
  grid_.validate();
  params_.validate();
  lattice_ = lattice_from_layout(*layout_, grid_);
  switch (kind_) {
    case OperatorKind::linear:
      kernels_.push_back(discretize_kernel(op.kernel(), grid_, layout_));
      break;
    case OperatorKind::pucci_plus:
    case OperatorKind::pucci_minus: {
      EllipticityParams unit = params_;
      unit.lambda = 1.0;
      unit.Lambda = 1.0;
      kernels_.push_back(discretize_kernel(Kernel::power(unit, 1.0), grid_, layout_));
      break;
    }
    case OperatorKind::isaacs: {
      const auto& family = op.family();
      n_alpha_ = family.n_alpha();
      n_beta_ = family.n_beta();
      constants_ = family.constants();
      for (const auto& k : family.kernels()) kernels_.push_back(discretize_kernel(k, grid_, layout_));
      break;
    }
  }
  for (const auto& k : kernels_) {
    stencils_.push_back(k.stencil());
    mass_ = std::max(mass_, k.total_mass());
  }
  if (kind_ == OperatorKind::pucci_plus || kind_ == OperatorKind::pucci_minus) mass_ *= params_.Lambda;
}

LatticeField DiscreteOperator::make_field(ExteriorData exterior, std::ptrdiff_t row_lo, std::ptrdiff_t row_hi) const {
  return LatticeField(grid_, lattice_, layout_, std::move(exterior), row_lo, row_hi);
}

void DiscreteOperator::check_row(const LatticeField& u, std::ptrdiff_t i) const {
  if (i < 1 || i >= static_cast<std::ptrdiff_t>(grid_.n_points)) {
    throw DomainError("operator evaluated outside the interior stencil region");
  }
  if (u.lattice() != lattice_ || u.grid().n_points != grid_.n_points || u.tail_size() != layout_->node.size()) {
    throw DomainError("lattice field does not match the discretized operator");
  }
  if (!u.has_row(i)) throw DomainError("lattice field has no tail row for this node");
}

double DiscreteOperator::apply_member(const LatticeField& u, std::ptrdiff_t i, std::size_t k) const {
  check_row(u, i);
  const double c = u[i];
  const auto& kd = kernels_[k];
  return simd::paired_sum(stencils_[k].data(), u.data_at(i + 1), u.data_at(i - 1), lattice_, c) +
         simd::row_sum(kd.tail_weight.data(), u.tail_row(i), kd.tail_weight.size(), c);
}

double DiscreteOperator::apply(const LatticeField& u, std::ptrdiff_t i) const {
  switch (kind_) {
    case OperatorKind::linear: return apply_member(u, i, 0);
    case OperatorKind::pucci_plus:
    case OperatorKind::pucci_minus: {
      check_row(u, i);
      const bool plus = kind_ == OperatorKind::pucci_plus;
      const double pos = plus ? params_.Lambda : params_.lambda;
      const double neg = plus ? params_.lambda : params_.Lambda;
      const double c = u[i];
      const auto& kd = kernels_.front();
      return simd::paired_sum_extremal(stencils_.front().data(), u.data_at(i + 1), u.data_at(i - 1), lattice_, c,
                                       pos, neg) +
             simd::row_sum_extremal(kd.tail_weight.data(), u.tail_row(i), kd.tail_weight.size(), c, pos, neg);
    }
    case OperatorKind::isaacs: {
      double inf = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < n_alpha_; ++a) {
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < n_beta_; ++b) {
          const std::size_t k = a * n_beta_ + b;
          sup = std::max(sup, apply_member(u, i, k) + constants_[k]);
        }
        inf = std::min(inf, sup);
      }
      return inf;
    }
  }
  return 0.0;
}

std::vector<double> apply_on_level(const DiscreteOperator& op, const SpaceTimeField& u, std::size_t level,
                                   std::ptrdiff_t i_lo, std::ptrdiff_t i_hi) {
  if (u.grid().n_points != op.grid().n_points || u.grid().half_width != op.grid().half_width) {
    throw DomainError("field grid does not match the operator grid");
  }
  if (i_hi < i_lo) return {};
  LatticeField field = op.make_field(u.exterior(), i_lo, i_hi);
  field.load(u.level(level), u.time(level));
  std::vector<double> out(static_cast<std::size_t>(i_hi - i_lo + 1));
  parallel_for(0, out.size(), [&](std::size_t k) { out[k] = op.apply(field, i_lo + static_cast<std::ptrdiff_t>(k)); });
  return out;
}

double apply_at(const DiscreteOperator& op, const SpaceTimeField& u, std::size_t level, double x) {
  const std::ptrdiff_t i = u.grid().nearest_index(x);
  return apply_on_level(op, u, level, i, i).front();
}

SpaceTimeField increment_quotient(const SpaceTimeField& u, double h, double alpha) {
  if (h == 0.0 || !std::isfinite(h)) throw DomainError("increment must be nonzero");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("increment exponent must lie in (0, 1]");
  const Grid& g = u.grid();
  const double steps = h / g.dx();
  const double k_real = std::round(steps);
  if (std::fabs(steps - k_real) > 1e-9 * std::max(1.0, std::fabs(steps))) {
    throw DomainError("increment must be a multiple of the grid spacing");
  }
  const auto k = static_cast<std::ptrdiff_t>(k_real);
  const double scale = std::pow(std::fabs(h), alpha);
  std::vector<double> values;
  values.reserve(u.levels() * g.size());
  for (std::size_t m = 0; m < u.levels(); ++m) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      values.push_back((u.at(m, ii + k) - u.at(m, ii)) / scale);
    }
  }
  const ExteriorData& ext = u.exterior();
  auto fn = ext.fn;
  BoundClass bound = ext.bound;
  if (bound.kind == BoundClass::Kind::bounded) {
    bound.C = 2.0 * bound.C / scale;
  } else {
    bound.C = bound.C * (std::pow(1.0 + std::fabs(h), bound.beta) + 1.0) / scale;
  }
  ExteriorData out{[fn, h, scale](double x, double t) { return (fn(x + h, t) - fn(x, t)) / scale; }, bound,
                   ext.time_dependent};
  return SpaceTimeField(g, u.times(), std::move(values), std::move(out));
}

SpaceTimeField parabolic_rescale(const SpaceTimeField& u, double rho, double beta, double sigma, double t_anchor,
                                 std::optional<Grid> out_grid) {
  if (!(rho >= 1.0) || !std::isfinite(rho)) throw DomainError("rescaling factor must be >= 1");
  if (!(sigma > 0.0 && sigma <= 2.0)) throw DomainError("order must lie in (0, 2]");
  const double depth = std::pow(rho, sigma);
  const double amp = std::pow(rho, -beta);
  const Grid& src = u.grid();
  Grid g = out_grid ? *out_grid
                    : Grid{src.half_width / rho, src.n_points, (src.t0 - t_anchor) / depth,
                           (src.t_end - t_anchor) / depth, 0};
  g.validate();
  std::vector<double> times;
  std::vector<double> values;
  times.reserve(u.levels());
  values.reserve(u.levels() * g.size());
  for (std::size_t m = 0; m < u.levels(); ++m) {
    times.push_back((u.time(m) - t_anchor) / depth);
    for (std::size_t i = 0; i < g.size(); ++i) {
      values.push_back(amp * u.value_on_level(m, rho * g.node(static_cast<std::ptrdiff_t>(i))));
    }
  }
  const ExteriorData& ext = u.exterior();
  auto fn = ext.fn;
  BoundClass bound = ext.bound;
  bound.C *= bound.kind == BoundClass::Kind::bounded ? amp : amp * std::pow(rho, bound.beta);
  ExteriorData out{[fn, amp, rho, depth, t_anchor](double x, double t) { return amp * fn(rho * x, t_anchor + depth * t); },
                   bound, ext.time_dependent};
  return SpaceTimeField(g, std::move(times), std::move(values), std::move(out));
}

}  // namespace roughlab
