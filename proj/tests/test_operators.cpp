#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "roughlab/errors.hpp"
#include "roughlab/lab/scenarios.hpp"
#include "roughlab/operators.hpp"
#include "roughlab/random.hpp"
#include "support.hpp"

using namespace roughlab;

namespace {

EllipticityParams params(double sigma, double lambda = 1.0, double Lambda = 2.0) {
  return {1, sigma, std::min(sigma, 1.5), lambda, Lambda, 1.0};
}

std::vector<double> interior(const DiscreteOperator& op, const SpaceTimeField& u) {
  return apply_on_level(op, u, 0, 1, static_cast<std::ptrdiff_t>(op.grid().n_points) - 1);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// 2 int_0^inf delta(f; x, y) a (2 - s) y^(-1-s) dy by direct quadrature.
// The piece below eps uses delta ~ f''(x) y^2 / 2.
double linear_oracle(const std::function<double(double)>& f, double f2, double x, double s, double a) {
  const double eps = 1e-5;
  auto integrand = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double d = 0.5 * (f(x + y) + f(x - y)) - f(x);
    return d * a * (2.0 - s) * std::pow(y, -1.0 - s);
  };
  double acc = 0.5 * f2 * a * std::pow(eps, 2.0 - s) + testing::integrate_singular(integrand, eps, 1.0);
  for (double lo = 1.0; lo < 64.0; lo *= 2.0) acc += testing::integrate(integrand, lo, 2.0 * lo);
  // Beyond 64 the data has decayed: delta = -f(x).
  acc += -f(x) * a * (2.0 - s) * std::pow(64.0, -s) / s;
  return 2.0 * acc;
}

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("second difference of a quadratic") {
    const Grid g{2.0, 64, -1.0, 0.0, 0};
    const auto u = testing::frozen(g, [](double x) { return 3.0 * x * x - x + 1.0; }, BoundClass::growth(5.0, 2.0));
    for (double y : {0.0625, 0.25, 0.5, 3.0}) CHECK(second_difference(u, 0, 0.5, y) == doctest::Approx(3.0 * y * y));
  }

  TEST_CASE("linear operator on cosine matches the symbol") {
    const double s = 1.0;
    const Grid g{2.0, 512, -1.0, 0.0, 0};
    TailSpec spec;
    spec.resolve_spacing = 0.1;
    spec.resolve_tol = 1e-6;
    spec.max_resolved_nodes = 400000;
    const DiscreteOperator op(Operator::linear(Kernel::power(params(s, 1.0, 1.0), 1.0)), g, spec);
    const auto u = testing::frozen(g, [](double x) { return std::cos(x); }, BoundClass::bounded(1.0));
    const double symbol = testing::cos_symbol(s);
    CHECK(symbol == doctest::Approx(M_PI).epsilon(1e-9));
    for (double x : {-1.0, -0.5, 0.0, 0.25, 1.0}) {
      CHECK(apply_at(op, u, 0, x) == doctest::Approx(-symbol * std::cos(x)).epsilon(1e-3));
    }
  }

  TEST_CASE("linear rough operator matches direct quadrature") {
    const double s = 1.4;
    const double a = 1.7;
    const Grid g{2.0, 1024, -1.0, 0.0, 0};
    auto f = [](double x) { return std::exp(-x * x); };
    const DiscreteOperator op(Operator::linear(Kernel::power(params(s, 1.0, 2.0), a)), g);
    const auto u = testing::frozen(g, f, BoundClass::bounded(1.0));
    for (double x : {-0.5, 0.0, 0.75}) {
      const double oracle = linear_oracle(f, (4.0 * x * x - 2.0) * f(x), x, s, a);
      CHECK(std::fabs(apply_at(op, u, 0, x) - oracle) <= 2e-3 * std::fabs(oracle));
    }
  }

  TEST_CASE("affine functions are annihilated") {
    const Grid g{2.0, 128, -1.0, 0.0, 0};
    const auto p = params(1.5);
    auto rng = SplitMix64::stream(21, "affine");
    for (int k = 0; k < 10; ++k) {
      const Affine ell{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      const BoundClass growth = BoundClass::growth(std::fabs(ell.slope) + std::fabs(ell.offset), 1.0);
      TailSpec spec;
      spec.data_bound = growth.C;
      spec.growth = 1.0;
      const auto u = testing::frozen(g, ell, growth);
      const DiscreteOperator lin(Operator::linear(Kernel::dyadic_rough(p, rng.next())), g, spec);
      const DiscreteOperator plus(Operator::pucci_plus(p), g, lin.tail_layout());
      const DiscreteOperator minus(Operator::pucci_minus(p), g, lin.tail_layout());
      const DiscreteOperator isaacs(Operator::isaacs(IsaacsFamily::seeded(p, rng.next(), 2, 3)), g, lin.tail_layout());
      CHECK(max_abs(interior(lin, u)) <= 1e-10);
      CHECK(max_abs(interior(plus, u)) <= 1e-10);
      CHECK(max_abs(interior(minus, u)) <= 1e-10);
      CHECK(max_abs(interior(isaacs, u)) <= 1e-10);
    }
  }

  TEST_CASE("extremal operators are dual") {
    const Grid g{2.0, 128, -1.0, 0.0, 0};
    const auto p = params(1.2, 0.5, 3.0);
    const DiscreteOperator plus(Operator::pucci_plus(p), g);
    const DiscreteOperator minus(Operator::pucci_minus(p), g, plus.tail_layout());
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto f = lab::seeded_field(seed);
      const auto a = interior(plus, testing::frozen(g, [f](double x) { return -f(x); }, BoundClass::bounded(2.0)));
      const auto b = interior(minus, testing::frozen(g, f, BoundClass::bounded(2.0)));
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(-b[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("linear members lie between the extremal operators") {
    const Grid g{2.0, 128, -1.0, 0.0, 0};
    const auto p = params(1.5, 0.5, 2.5);
    const DiscreteOperator plus(Operator::pucci_plus(p), g);
    const DiscreteOperator minus(Operator::pucci_minus(p), g, plus.tail_layout());
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const DiscreteOperator lin(Operator::linear(Kernel::dyadic_rough(p, seed)), g, plus.tail_layout());
      const auto u = testing::frozen(g, lab::seeded_field(100 + seed), BoundClass::bounded(2.0));
      const auto l = interior(lin, u);
      const auto hi = interior(plus, u);
      const auto lo = interior(minus, u);
      for (std::size_t i = 0; i < l.size(); ++i) {
        CHECK(l[i] <= hi[i] + 1e-12);
        CHECK(l[i] >= lo[i] - 1e-12);
      }
    }
  }

  TEST_CASE("Isaacs differences are sandwiched") {
    const Grid g{2.0, 128, -1.0, 0.0, 0};
    const auto p = params(1.5);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto op = Operator::isaacs(IsaacsFamily::seeded(p, seed, 3, 2));
      CHECK(lab::sandwich_slack(op, g, lab::seeded_field(2 * seed), lab::seeded_field(2 * seed + 1),
                                BoundClass::bounded(2.0)) >= -1e-9);
    }
  }

  TEST_CASE("Isaacs constants are normalized") {
    const auto p = params(1.5);
    std::vector<Kernel> ks(4, Kernel::power(p, 1.0));
    const IsaacsFamily fam(2, 2, ks, {1.0, 3.0, -2.0, 2.5});
    CHECK(fam.shift() == 2.5);
    CHECK(fam.constant(0, 0) == -1.5);
    CHECK(fam.constant(1, 1) == 0.0);
    const IsaacsFamily scaled = fam.rescaled(2.0, 4.0);
    CHECK(scaled.shift() == 0.0);
    CHECK(scaled.constant(0, 1) == 4.0 * fam.constant(0, 1));
    CHECK_THROWS_AS(IsaacsFamily(2, 2, ks, {1.0}), DomainError);
    CHECK_THROWS_AS(IsaacsFamily(0, 2, {}, {}), DomainError);
    std::vector<Kernel> mixed{Kernel::power(p, 1.0), Kernel::power(params(1.2), 1.0)};
    CHECK_THROWS_AS(IsaacsFamily(1, 2, mixed, {0.0, 0.0}), DomainError);
  }

  TEST_CASE("single-member Isaacs operator is linear") {
    const Grid g{2.0, 128, -1.0, 0.0, 0};
    const auto p = params(1.5);
    const Kernel k = Kernel::dyadic_rough(p, 9);
    const DiscreteOperator lin(Operator::linear(k), g);
    const DiscreteOperator isa(Operator::isaacs(IsaacsFamily(1, 1, {k}, {0.7})), g, lin.tail_layout());
    const auto u = testing::frozen(g, lab::seeded_field(4), BoundClass::bounded(2.0));
    const auto a = interior(lin, u);
    const auto b = interior(isa, u);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }

  TEST_CASE("contact from above orders the operator values") {
    const Grid g{2.0, 128, -1.0, 0.0, 0};
    const auto p = params(1.5);
    const DiscreteOperator isa(Operator::isaacs(IsaacsFamily::seeded(p, 3, 2, 2)), g);
    const DiscreteOperator plus(Operator::pucci_plus(p), g, isa.tail_layout());
    auto rng = SplitMix64::stream(4, "contact");
    for (int k = 0; k < 20; ++k) {
      const auto f = lab::seeded_field(rng.next());
      const auto i = static_cast<std::ptrdiff_t>(1 + rng.next() % (g.n_points - 1));
      const double xi = g.node(i);
      const double bump = rng.uniform(0.01, 1.0);
      const auto u = testing::frozen(g, f, BoundClass::bounded(2.0));
      const auto v = testing::frozen(
          g, [f, xi, bump](double x) { return f(x) + bump * (1.0 - std::exp(-(x - xi) * (x - xi))); },
          BoundClass::bounded(2.0 + bump));
      for (const DiscreteOperator* op : {&isa, &plus}) {
        CHECK(apply_on_level(*op, u, 0, i, i)[0] <= apply_on_level(*op, v, 0, i, i)[0]);
      }
    }
  }

  TEST_CASE("lattice translation commutes with the operator") {
    const Grid g{2.0, 128, -1.0, 0.0, 0};
    const auto p = params(1.5);
    const DiscreteOperator op(Operator::isaacs(IsaacsFamily::seeded(p, 5, 2, 2)), g);
    const auto f = lab::seeded_field(77);
    const double h = 8.0 * g.dx();
    const auto u = testing::frozen(g, f, BoundClass::bounded(2.0));
    const auto v = testing::frozen(g, [f, h](double x) { return f(x - h); }, BoundClass::bounded(2.0));
    for (std::ptrdiff_t i = 1; i + 8 < 128; i += 5) {
      const double a = apply_on_level(op, u, 0, i, i)[0];
      const double b = apply_on_level(op, v, 0, i + 8, i + 8)[0];
      CHECK(b == doctest::Approx(a).epsilon(1e-10).scale(1.0));
    }
  }

  TEST_CASE("scaling relation holds for every operator kind") {
    const Grid g{2.0, 256, -1.0, 0.0, 0};
    const auto p = params(1.5);
    const Affine ell{2.0, 1.0};
    const auto w = lab::seeded_field(5);
    const std::vector<Operator> ops{Operator::linear(Kernel::dyadic_rough(p, 1)), Operator::pucci_plus(p),
                                    Operator::pucci_minus(p), Operator::isaacs(IsaacsFamily::seeded(p, 2, 2, 2))};
    for (const auto& op : ops) {
      const auto res = lab::scaling_relation(op, g, 0.0, 2.0, 3.0, ell, w, BoundClass::bounded(2.0));
      CHECK(res.nodes > 0);
      CHECK(res.max_error <= 1e-6);
    }
    CHECK_THROWS_AS(rescale_operator(ops[0], 0.0, 0.0, 1.0, ell), DomainError);
    CHECK_THROWS_AS(rescale_operator(ops[0], 0.0, 2.0, -1.0, ell), DomainError);
  }

  TEST_CASE("evaluation outside the interior is rejected") {
    const Grid g{2.0, 64, -1.0, 0.0, 0};
    const DiscreteOperator op(Operator::pucci_plus(params(1.5)), g);
    const auto u = testing::frozen(g, [](double x) { return x; }, BoundClass::growth(1.0, 1.0));
    CHECK_THROWS_AS(apply_on_level(op, u, 0, 0, 3), DomainError);
    CHECK_THROWS_AS(apply_on_level(op, u, 0, 60, 64), DomainError);
    const Grid other{2.0, 128, -1.0, 0.0, 0};
    CHECK_THROWS_AS(apply_on_level(op, testing::frozen(other, [](double) { return 0.0; }, BoundClass::bounded(0.0)), 0,
                                   5, 5),
                    DomainError);
  }

  TEST_CASE("increment quotient") {
    const Grid g{2.0, 64, -1.0, 0.0, 0};
    const auto u = testing::frozen(g, [](double x) { return x * x; }, BoundClass::growth(1.0, 2.0));
    const double h = 2.0 * g.dx();
    const auto v = increment_quotient(u, h, 1.0);
    for (std::ptrdiff_t i = 0; i <= 64; i += 4) {
      const double x = g.node(i);
      CHECK(v.at(0, i) == doctest::Approx(2.0 * x + h));
    }
    const auto half = increment_quotient(u, -h, 0.5);
    CHECK(half.at(0, 40) == doctest::Approx((std::pow(g.node(38), 2) - std::pow(g.node(40), 2)) / std::sqrt(h)));
    CHECK_THROWS_AS(increment_quotient(u, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(increment_quotient(u, 0.3 * g.dx(), 1.0), DomainError);
    CHECK_THROWS_AS(increment_quotient(u, h, 1.5), DomainError);
  }

  TEST_CASE("parabolic rescale") {
    const Grid g{4.0, 64, -1.0, 0.0, 0};
    std::vector<double> times{-1.0, -0.5, 0.0};
    const auto u = SpaceTimeField::sample(g, times, [](double x, double t) { return x * x + t; },
                                          BoundClass::growth(2.0, 2.0), true);
    const double rho = 2.0;
    const double sigma = 1.5;
    const auto v = parabolic_rescale(u, rho, 2.0, sigma, 0.0);
    CHECK(v.grid().half_width == 2.0);
    const double depth = std::pow(rho, sigma);
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(v.time(m) == doctest::Approx(times[m] / depth));
      for (std::ptrdiff_t i = 0; i <= 64; i += 8) {
        const double x = v.grid().node(i);
        CHECK(v.at(m, i) == doctest::Approx(x * x + times[m] / 4.0));
      }
    }
    CHECK(v.exterior()(3.0, -0.1) == doctest::Approx(9.0 - 0.1 * depth / 4.0));
    CHECK(v.exterior().bound.C == doctest::Approx(2.0));
    CHECK_THROWS_AS(parabolic_rescale(u, 0.5, 1.0, sigma), DomainError);
  }
}
