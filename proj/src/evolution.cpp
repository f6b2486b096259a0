#include "roughlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughlab/errors.hpp"
#include "roughlab/parallel.hpp"

namespace roughlab {

TailSpec tail_for(const ParabolicProblem& problem) {
  TailSpec spec = problem.tail;
  spec.data_bound = std::max(spec.data_bound, problem.data.bound.C);
  spec.growth = std::max(spec.growth, problem.data.bound.exponent());
  return spec;
}

double cfl_timestep(const DiscreteOperator& op, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw DomainError("CFL safety factor must lie in (0, 1]");
  const double mass = op.total_mass();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("degenerate operator: total mass is not positive");
  return safety / mass;
}

namespace {

std::ptrdiff_t first_active(const Grid& g, double radius) {
  const double bound = radius - g.dx();
  for (std::ptrdiff_t i = 1; i < static_cast<std::ptrdiff_t>(g.n_points); ++i) {
    if (std::fabs(g.node(i)) < bound) return i;
  }
  return static_cast<std::ptrdiff_t>(g.n_points);
}

}  // namespace

Stepper::Stepper(const ParabolicProblem& problem)
    : problem_(problem),
      op_(problem.op, problem.grid, tail_for(problem)),
      field_(op_.make_field(problem.data, 0, -1)) {
  if (!problem_.data.fn) throw DomainError("problem needs exterior data");
  if (!(problem_.active_radius > 0.0)) throw DomainError("active radius must be positive");
  const Grid& g = problem_.grid;
  active_lo_ = first_active(g, problem_.active_radius);
  active_hi_ = static_cast<std::ptrdiff_t>(g.n_points) - active_lo_;
  if (active_hi_ < active_lo_) throw ResolutionError("no grid node lies inside the active region");
  field_ = op_.make_field(problem_.data, active_lo_, active_hi_);
}

std::vector<double> Stepper::initial_state() const {
  const Grid& g = problem_.grid;
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double x = g.node(ii);
    u[i] = (active(ii) && problem_.initial) ? problem_.initial(x) : problem_.data(x, g.t0);
  }
  return u;
}

std::vector<double> Stepper::step(const std::vector<double>& u, double t, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (dt * op_.total_mass() > 1.0 + 1e-12) {
    throw CflViolation("time step " + std::to_string(dt) + " exceeds the monotonicity bound " +
                       std::to_string(max_dt()));
  }
  const Grid& g = problem_.grid;
  field_.load(u, t);
  const double lo = field_.min_value();
  const double hi = field_.max_value();
  std::vector<double> next(u.size());
  parallel_for(0, u.size(), [&](std::size_t i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double x = g.node(ii);
    if (!active(ii)) {
      next[i] = problem_.data(x, t + dt);
      return;
    }
    const double f = problem_.rhs ? problem_.rhs(x, t) : 0.0;
    const double v = u[i] + dt * (op_.apply(field_, ii) + f);
    if (!std::isfinite(v)) throw NumericalAbort("non-finite value during time stepping", x, t);
    next[i] = std::clamp(v, lo + dt * f, hi + dt * f);
  });
  for (std::size_t i = 0; i < next.size(); ++i) {
    if (!std::isfinite(next[i])) throw NumericalAbort("non-finite exterior data", g.node(static_cast<std::ptrdiff_t>(i)), t + dt);
  }
  return next;
}

Trajectory evolve(const ParabolicProblem& problem) {
  problem.grid.validate();
  Stepper stepper(problem);
  const Grid& g = problem.grid;
  const double span = g.t_end - g.t0;
  const double dt_cfl = cfl_timestep(stepper.op(), problem.safety);
  std::size_t steps = g.n_steps;
  if (steps == 0) steps = static_cast<std::size_t>(std::ceil(span / dt_cfl * (1.0 - 1e-12)));
  steps = std::max<std::size_t>(steps, 1);
  const double dt = span / static_cast<double>(steps);
  if (dt > stepper.max_dt() * (1.0 + 1e-12)) {
    throw CflViolation("requested step count gives dt above the monotonicity bound");
  }
  std::size_t every = std::max<std::size_t>(problem.store_every, 1);
  if (problem.store_dt > 0.0) every = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(problem.store_dt / dt)));

  std::vector<double> u = stepper.initial_state();
  std::vector<double> times{g.t0};
  std::vector<double> values(u);
  std::vector<double> residual;
  residual.reserve(steps);
  for (std::size_t m = 0; m < steps; ++m) {
    const double t = g.t0 + static_cast<double>(m) * dt;
    std::vector<double> next = stepper.step(u, t, dt);
    double res = 0.0;
    for (std::ptrdiff_t i = stepper.active_lo(); i <= stepper.active_hi(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      res = std::max(res, std::fabs(next[k] - u[k]) / dt);
    }
    residual.push_back(res);
    u = std::move(next);
    if ((m + 1) % every == 0 || m + 1 == steps) {
      times.push_back(m + 1 == steps ? g.t_end : g.t0 + static_cast<double>(m + 1) * dt);
      values.insert(values.end(), u.begin(), u.end());
    }
  }
  Trajectory out{SpaceTimeField(g, std::move(times), std::move(values), problem.data),
                 CflRecord{dt, stepper.op().total_mass(), problem.safety, steps}, std::move(residual)};
  return out;
}

}  // namespace roughlab
