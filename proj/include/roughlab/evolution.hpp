#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "roughlab/core.hpp"
#include "roughlab/operators.hpp"

namespace roughlab {

/// u_t = I u + f on the active nodes |x| < active_radius - dx over
/// [grid.t0, grid.t_end], with u = data outside them and beyond the grid.
struct ParabolicProblem {
  Operator op;
  Grid grid;
  ExteriorData data;
  /// u(., t0) on the active nodes; empty means data(., t0).
  std::function<double(double)> initial{};
  /// Right-hand side; empty means f = 0.
  std::function<double(double, double)> rhs{};
  double active_radius = 1.0;
  double safety = 0.9;
  std::size_t store_every = 1;
  /// When positive, overrides store_every with floor(store_dt / dt) steps.
  double store_dt = 0.0;
  TailSpec tail{};
};

struct CflRecord {
  double dt = 0.0;
  double mass = 0.0;
  double safety = 0.0;
  std::size_t steps = 0;
};

struct Trajectory {
  SpaceTimeField field;
  CflRecord cfl;
  /// max over active nodes of |u^{m+1} - u^m| / dt, one entry per step.
  std::vector<double> residual;
};

/// theta / S with S the operator's total mass; throws DomainError when S = 0
/// or theta is outside (0, 1].
double cfl_timestep(const DiscreteOperator& op, double safety);

/// Explicit monotone stepping for one problem; owns the discretized operator.
class Stepper {
 public:
  explicit Stepper(const ParabolicProblem& problem);

  const DiscreteOperator& op() const noexcept { return op_; }
  const ParabolicProblem& problem() const noexcept { return problem_; }
  /// Largest admissible step, 1 / S.
  double max_dt() const noexcept { return 1.0 / op_.total_mass(); }
  bool active(std::ptrdiff_t i) const noexcept { return i >= active_lo_ && i <= active_hi_; }
  std::ptrdiff_t active_lo() const noexcept { return active_lo_; }
  std::ptrdiff_t active_hi() const noexcept { return active_hi_; }

  /// Grid values at t0: initial data on active nodes, data elsewhere.
  std::vector<double> initial_state() const;

  /// One forward Euler step from (u, t) to t + dt. Active nodes are clamped
  /// into [min + dt f, max + dt f] over the values the update combines;
  /// other nodes take data(x, t + dt). Throws CflViolation if dt > 1 / S
  /// and NumericalAbort on a non-finite value.
  std::vector<double> step(const std::vector<double>& u, double t, double dt);

 private:
  ParabolicProblem problem_;
  DiscreteOperator op_;
  LatticeField field_;
  std::ptrdiff_t active_lo_ = 0;
  std::ptrdiff_t active_hi_ = -1;
};

/// Steps from t0 to t_end. grid.n_steps = 0 picks the smallest step count
/// with dt <= cfl_timestep; an explicit count must respect the bound.
Trajectory evolve(const ParabolicProblem& problem);

/// Tail spec with the data bound taken from the problem's exterior class.
TailSpec tail_for(const ParabolicProblem& problem);

}  // namespace roughlab
