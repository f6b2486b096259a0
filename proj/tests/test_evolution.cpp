#include <doctest.h>

#include <cmath>
#include <limits>

#include "roughlab/errors.hpp"
#include "roughlab/evolution.hpp"
#include "roughlab/lab/scenarios.hpp"
#include "roughlab/parallel.hpp"
#include "roughlab/random.hpp"
#include "support.hpp"

using namespace roughlab;

namespace {

const EllipticityParams kParams{1, 1.5, 1.5, 1.0, 2.0, 1.0};

ParabolicProblem small_problem(Operator op, std::function<double(double)> f, double C) {
  ParabolicProblem p{.op = std::move(op), .grid = Grid{2.0, 64, -0.25, 0.0, 0},
                     .data = {[f](double x, double) { return f(x); }, BoundClass::bounded(C), false}};
  p.active_radius = 1.0;
  return p;
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("CFL step is the safety factor over the total mass") {
    const Grid g{2.0, 64, -1.0, 0.0, 0};
    const DiscreteOperator op(Operator::pucci_plus(kParams), g);
    CHECK(cfl_timestep(op, 0.9) == doctest::Approx(0.9 / op.total_mass()));
    CHECK(op.total_mass() == doctest::Approx(kParams.Lambda * op.kernels().front().total_mass()));
    CHECK_THROWS_AS(cfl_timestep(op, 0.0), DomainError);
    CHECK_THROWS_AS(cfl_timestep(op, 1.5), DomainError);
  }

  TEST_CASE("explicit step counts above the bound are rejected") {
    auto p = small_problem(Operator::pucci_plus(kParams), [](double x) { return std::sin(x); }, 1.0);
    p.grid.n_steps = 2;
    CHECK_THROWS_AS(evolve(p), CflViolation);
    Stepper s(p);
    const auto u = s.initial_state();
    CHECK_THROWS_AS(s.step(u, -0.25, 2.0 * s.max_dt()), CflViolation);
    CHECK_NOTHROW(s.step(u, -0.25, s.max_dt()));
  }

  TEST_CASE("active nodes lie strictly inside the active radius") {
    auto p = small_problem(Operator::pucci_plus(kParams), [](double) { return 0.0; }, 0.0);
    const Stepper s(p);
    const Grid& g = p.grid;
    for (std::ptrdiff_t i = 0; i <= 64; ++i) {
      CHECK(s.active(i) == (std::fabs(g.node(i)) < 1.0 - g.dx()));
    }
  }

  TEST_CASE("constants and affine data are stationary") {
    const auto op = Operator::isaacs(IsaacsFamily::seeded(kParams, 4, 2, 2));
    auto c = small_problem(op, [](double) { return 0.75; }, 0.75);
    const auto tc = evolve(c);
    for (std::size_t m = 0; m < tc.field.levels(); ++m) {
      for (std::ptrdiff_t i = 0; i <= 64; ++i) CHECK(tc.field.at(m, i) == 0.75);
    }
    ParabolicProblem a{.op = op, .grid = Grid{2.0, 64, -0.25, 0.0, 0},
                       .data = {[](double x, double) { return 0.5 * x - 0.25; }, BoundClass::growth(0.75, 1.0), false}};
    const auto ta = evolve(a);
    for (std::ptrdiff_t i = 0; i <= 64; ++i) {
      CHECK(ta.field.at(ta.field.levels() - 1, i) == doctest::Approx(0.5 * a.grid.node(i) - 0.25).epsilon(1e-10));
    }
  }

  TEST_CASE("a constant source drives a linear ramp") {
    // u = c t solves u_t = I u + c for every operator annihilating constants.
    const double c = 1.5;
    ParabolicProblem p{.op = Operator::pucci_minus(kParams), .grid = Grid{2.0, 64, -0.5, 0.0, 0},
                       .data = {[c](double, double t) { return c * t; }, BoundClass::bounded(0.75), true}};
    p.rhs = [c](double, double) { return c; };
    const auto tr = evolve(p);
    for (std::size_t m = 0; m < tr.field.levels(); ++m) {
      for (std::ptrdiff_t i = 0; i <= 64; ++i) {
        CHECK(tr.field.at(m, i) == doctest::Approx(c * tr.field.time(m)).epsilon(1e-12).scale(1.0));
      }
    }
  }

  TEST_CASE("linear flow of a cosine decays at the symbol rate") {
    const EllipticityParams unit{1, 1.0, 1.0, 1.0, 1.0, 1.0};
    const double rate = testing::cos_symbol(1.0);
    ParabolicProblem p{.op = Operator::linear(Kernel::power(unit, 1.0)), .grid = Grid{2.0, 128, -0.125, 0.0, 0},
                       .data = {[rate](double x, double t) { return std::exp(-rate * (t + 0.125)) * std::cos(x); },
                                BoundClass::bounded(1.0), true}};
    p.tail.resolve_spacing = 0.2;
    p.tail.resolve_tol = 1e-4;
    p.tail.max_resolved_nodes = 100000;
    const auto tr = evolve(p);
    const std::size_t last = tr.field.levels() - 1;
    double worst = 0.0;
    for (std::ptrdiff_t i = 0; i <= 128; ++i) {
      const double exact = std::exp(-rate * 0.125) * std::cos(p.grid.node(i));
      worst = std::max(worst, std::fabs(tr.field.at(last, i) - exact));
    }
    CHECK(worst <= 5e-3);
  }

  TEST_CASE("maximum principle and comparison on seeded pairs") {
    const auto op = Operator::isaacs(IsaacsFamily::seeded(kParams, 8, 2, 2));
    auto rng = SplitMix64::stream(31, "comparison");
    for (int k = 0; k < 5; ++k) {
      const auto f = lab::seeded_field(rng.next());
      const double margin = rng.uniform(0.01, 0.2);
      auto a = small_problem(op, f, 2.0);
      auto b = small_problem(op, [f, margin](double x) { return f(x) + margin; }, 2.0 + margin);
      const auto ta = evolve(a);
      const auto tb = evolve(b);
      REQUIRE(ta.field.levels() == tb.field.levels());
      for (std::size_t m = 0; m < ta.field.levels(); ++m) {
        for (std::ptrdiff_t i = 0; i <= 64; ++i) {
          CHECK(std::fabs(ta.field.at(m, i)) <= 2.0);
          CHECK(ta.field.at(m, i) < tb.field.at(m, i));
        }
      }
    }
  }

  TEST_CASE("non-finite data aborts") {
    ParabolicProblem p{.op = Operator::pucci_plus(kParams), .grid = Grid{2.0, 64, -0.1, 0.0, 0},
                       .data = {[](double, double t) { return t > -0.05 ? std::numeric_limits<double>::quiet_NaN() : 0.0; },
                                BoundClass::bounded(1.0), true}};
    CHECK_THROWS_AS(evolve(p), NumericalAbort);
    auto q = small_problem(Operator::pucci_plus(kParams), [](double) { return 0.0; }, 0.0);
    q.active_radius = 0.0;
    CHECK_THROWS_AS(evolve(q), DomainError);
  }

  TEST_CASE("stored levels follow store_dt") {
    auto p = small_problem(Operator::pucci_plus(kParams), [](double x) { return std::cos(x); }, 1.0);
    p.store_dt = 1.0 / 16.0;
    const auto tr = evolve(p);
    CHECK(tr.field.time(0) == -0.25);
    CHECK(tr.field.time(tr.field.levels() - 1) == 0.0);
    for (std::size_t m = 1; m + 1 < tr.field.levels(); ++m) {
      CHECK(tr.field.time(m) - tr.field.time(m - 1) <= 1.0 / 16.0 + 1e-12);
      CHECK(tr.field.time(m) - tr.field.time(m - 1) >= 1.0 / 16.0 - tr.cfl.dt - 1e-12);
    }
    CHECK(tr.residual.size() == tr.cfl.steps);
    CHECK(tr.cfl.dt * tr.cfl.mass <= 0.9 + 1e-12);
  }

  TEST_CASE("trajectories do not depend on the thread count") {
    auto p = small_problem(Operator::isaacs(IsaacsFamily::seeded(kParams, 6, 2, 2)), lab::seeded_field(3), 2.0);
    p.grid.n_points = 256;
    set_thread_count(1);
    const auto a = evolve(p);
    set_thread_count(4);
    const auto b = evolve(p);
    set_thread_count(0);
    REQUIRE(a.field.levels() == b.field.levels());
    for (std::size_t m = 0; m < a.field.levels(); ++m) {
      const auto x = a.field.level(m);
      const auto y = b.field.level(m);
      CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
  }
}
