#include <doctest.h>

#include <cmath>

#include "roughlab/errors.hpp"
#include "roughlab/kernels.hpp"
#include "roughlab/operators.hpp"
#include "roughlab/random.hpp"
#include "support.hpp"

using namespace roughlab;

namespace {

EllipticityParams params(double sigma, double lambda = 1.0, double Lambda = 2.0) {
  return {1, sigma, std::min(sigma, 1.5), lambda, Lambda, 1.0};
}

// (2 - s) int_lo^hi y^(-1-s) dy in closed form.
double unit_mass(double s, double lo, double hi) { return (2.0 - s) * (std::pow(lo, -s) - std::pow(hi, -s)) / s; }

// Piecewise oracle for a dyadic kernel: Gauss-Kronrod between breaks.
double rough_mass(const Kernel& k, double lo, double hi) {
  const double s = k.params().sigma;
  double acc = 0.0;
  double a = lo;
  while (a < hi) {
    double b = std::min(hi, std::exp2(std::floor(std::log2(a)) + 1.0));
    if (b <= a) b = std::min(hi, a * 2.0);
    const double level = k.a(0.5 * (a + b));
    acc += testing::integrate([s, level](double y) { return level * (2.0 - s) * std::pow(y, -1.0 - s); }, a, b);
    a = b;
  }
  return acc;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("power kernel") {
    const Kernel k = Kernel::power(params(1.5, 1.0, 1.0), 1.0);
    for (double y : {1e-5, 0.3, 1.0, 7.0, 1e4}) CHECK(k.a(y) == 1.0);
    CHECK(kernel_bounds_check(Kernel::power(params(1.5), 2.0), 500).passed);
    CHECK_THROWS_AS(Kernel::power(params(1.5), 3.0), DomainError);
    CHECK_THROWS_AS(Kernel::power(params(1.5), 0.5), DomainError);
  }

  TEST_CASE("dyadic rough kernel is piecewise constant, bounded and reproducible") {
    const auto p = params(1.2, 0.5, 3.0);
    const Kernel a = Kernel::dyadic_rough(p, 99);
    const Kernel b = Kernel::dyadic_rough(p, 99);
    const Kernel c = Kernel::dyadic_rough(p, 100);
    bool differs = false;
    for (int k = -20; k <= 40; ++k) {
      const double lo = std::exp2(k);
      const double v = a.a(lo);
      CHECK(v >= 0.5);
      CHECK(v <= 3.0);
      CHECK(a.a(lo * 1.5) == v);
      CHECK(a.a(lo * 1.999) == v);
      CHECK(a.a(-lo * 1.3) == v);
      CHECK(b.a(lo * 1.25) == v);
      differs = differs || c.a(lo) != v;
    }
    CHECK(differs);
    CHECK(a.a(std::exp2(-25)) == 0.5);
    CHECK(a.a(std::exp2(45)) == 0.5);
    CHECK(kernel_bounds_check(a, 10000).passed);
  }

  TEST_CASE("equal bounds collapse the rough kernel") {
    const Kernel k = Kernel::dyadic_rough(params(1.5, 1.7, 1.7), 3);
    for (int j = -20; j <= 40; ++j) CHECK(k.a(std::exp2(j) * 1.1) == 1.7);
  }

  TEST_CASE("bounds check reports the first violation") {
    const auto p = params(1.5);
    const Kernel bad = Kernel::callable(p, [](double) { return 2.1; });
    const BoundsReport r = kernel_bounds_check(bad, 100);
    CHECK_FALSE(r.passed);
    REQUIRE(r.first_violation.has_value());
    CHECK(*r.first_violation == doctest::Approx(1e-6));
    CHECK_THROWS_AS(kernel_bounds_check(bad, 0), DomainError);

    const Kernel asym = Kernel::callable(p, [](double y) { return y > 0 ? 1.0 : 2.0; });
    CHECK_FALSE(kernel_bounds_check(asym, 100).passed);
  }

  TEST_CASE("generated kernels pass the bounds check") {
    auto rng = SplitMix64::stream(11, "kernels");
    for (int k = 0; k < 20; ++k) {
      const double lambda = rng.uniform(0.1, 2.0);
      const auto p = params(rng.uniform(0.2, 1.99), lambda, lambda + rng.uniform(0.0, 3.0));
      CHECK(kernel_bounds_check(Kernel::dyadic_rough(p, rng.next()), 10000).passed);
      CHECK(kernel_bounds_check(Kernel::power(p, p.lambda), 1000).passed);
    }
  }

  TEST_CASE("weights at sigma 1 are positive and decreasing") {
    const Grid g{2.5, 50, -1.0, 0.0, 0};
    REQUIRE(g.dx() == doctest::Approx(0.1));
    const DiscreteKernel d = discretize_kernel(Kernel::power(params(1.0, 1.0, 1.0), 1.0), g);
    for (std::size_t j = 0; j < d.cell.size(); ++j) {
      CHECK(d.cell[j] > 0.0);
      if (j > 0) CHECK(d.cell[j] < d.cell[j - 1]);
    }
    CHECK(d.w0 > 0.0);
    CHECK(std::isfinite(d.total_mass()));
  }

  TEST_CASE("unit profile cell weights match the closed form") {
    for (double s : {0.3, 1.0, 1.5, 1.9}) {
      const Grid g{2.0, 128, -1.0, 0.0, 0};
      const DiscreteKernel d = discretize_kernel(Kernel::power(params(s, 1.0, 1.0), 1.0), g);
      const double dx = g.dx();
      for (std::size_t j = 1; j <= d.cell.size(); ++j) {
        const double exact = 2.0 * unit_mass(s, (j - 0.5) * dx, (j + 0.5) * dx);
        CHECK(d.cell[j - 1] == doctest::Approx(exact).epsilon(1e-12));
      }
      for (std::size_t k = 0; k < d.tail_weight.size(); ++k) {
        CHECK(d.tail_weight[k] == doctest::Approx(2.0 * unit_mass(s, d.tail->lo[k], d.tail->hi[k])).epsilon(1e-12));
      }
      // Half the second moment over |y| <= dx/2 is (dx/2)^(2 - s).
      CHECK(d.w0_exact == doctest::Approx(std::pow(0.5 * dx, 2.0 - s)).epsilon(1e-12));
    }
  }

  TEST_CASE("rough cell weights match a piecewise quadrature oracle") {
    const auto p = params(1.3, 0.5, 2.5);
    const Kernel k = Kernel::dyadic_rough(p, 2024);
    const Grid g{2.0, 64, -1.0, 0.0, 0};
    const DiscreteKernel d = discretize_kernel(k, g);
    const double dx = g.dx();
    for (std::size_t j = 1; j <= d.cell.size(); ++j) {
      CHECK(d.cell[j - 1] == doctest::Approx(2.0 * rough_mass(k, (j - 0.5) * dx, (j + 0.5) * dx)).epsilon(1e-10));
    }
    for (std::size_t q = 0; q < d.tail_weight.size(); q += 7) {
      CHECK(d.tail_weight[q] == doctest::Approx(2.0 * rough_mass(k, d.tail->lo[q], d.tail->hi[q])).epsilon(1e-10));
    }
  }

  TEST_CASE("callable profiles use adaptive quadrature") {
    const auto p = params(1.5);
    const Kernel k = Kernel::callable(p, [](double y) { return 1.5 + 0.5 * std::sin(1.0 / (0.1 + std::fabs(y))); });
    const double oracle =
        testing::integrate([&k](double y) { return k(y); }, 0.3, 0.7);
    CHECK(kernel_mass(k, 0.3, 0.7) == doctest::Approx(oracle).epsilon(1e-9));
  }

  TEST_CASE("weights are nonnegative for rough kernels") {
    auto rng = SplitMix64::stream(12, "weights");
    for (int k = 0; k < 10; ++k) {
      const auto p = params(rng.uniform(0.3, 1.95), 1.0, rng.uniform(1.0, 4.0));
      const Grid g{2.0, 64, -1.0, 0.0, 0};
      const DiscreteKernel d = discretize_kernel(Kernel::dyadic_rough(p, rng.next()), g);
      for (double w : d.cell) CHECK(w >= 0.0);
      for (double w : d.tail_weight) CHECK(w >= 0.0);
      CHECK(d.w0 >= 0.0);
    }
  }

  TEST_CASE("second derivative coefficient tends to one") {
    // Coefficient of u'' in the scheme applied to a quadratic, restricted to |y| <= 1.
    double prev = 1e9;
    for (double s : {1.9, 1.99, 1.999}) {
      const Grid g{2.0, 2048, -1.0, 0.0, 0};
      const DiscreteKernel d = discretize_kernel(Kernel::power(params(s, 1.0, 1.0), 1.0), g);
      const double dx = g.dx();
      double coef = d.w0;
      for (std::size_t j = 1; j <= d.cell.size() && j * dx <= 1.0 + 1e-12; ++j) {
        coef += 0.5 * d.cell[j - 1] * (j * dx) * (j * dx);
      }
      const double err = std::fabs(coef - 1.0);
      CHECK(err < prev);
      prev = err;
      if (s == 1.999) CHECK(err <= 1e-3);
    }
  }

  TEST_CASE("tail layout reaches the truncation tolerance") {
    const auto p = params(1.5);
    const Grid g{2.0, 64, -1.0, 0.0, 0};
    TailSpec spec;
    spec.data_bound = 3.0;
    const TailLayout t = make_tail_layout(p, g, spec);
    REQUIRE_FALSE(t.lo.empty());
    CHECK(t.lo.front() == doctest::Approx((64 + 0.5) * g.dx()));
    CHECK(t.truncation_bound < spec.cutoff_tol);
    for (std::size_t k = 1; k < t.lo.size(); ++k) CHECK(t.lo[k] == t.hi[k - 1]);
    spec.growth = 1.6;
    CHECK_THROWS_AS(make_tail_layout(p, g, spec), DivergenceError);
    spec.growth = 1.499;
    CHECK_THROWS_AS(make_tail_layout(p, g, spec), DivergenceError);
  }

  TEST_CASE("sigma two carries only the second derivative") {
    EllipticityParams p{1, 2.0, 1.5, 1.0, 1.0, 1.0};
    const Grid g{2.0, 64, -1.0, 0.0, 0};
    const DiscreteKernel d = discretize_kernel(Kernel::power(p, 1.0), g);
    CHECK(d.w0 == 1.0);
    for (double w : d.cell) CHECK(w == 0.0);
  }

  TEST_CASE("discrete operator on cosine converges under refinement") {
    const double s = 1.5;
    const double target = -testing::cos_symbol(s);
    double prev = 1e9;
    for (std::size_t n : {32, 64, 128}) {
      const Grid g{2.0, n, -1.0, 0.0, 0};
      TailSpec spec;
      spec.resolve_spacing = 0.05;
      spec.resolve_tol = 1e-9;
      spec.max_resolved_nodes = 400000;
      const DiscreteOperator op(Operator::linear(Kernel::power(params(s, 1.0, 1.0), 1.0)), g, spec);
      const auto u = testing::frozen(g, [](double x) { return std::cos(x); }, BoundClass::bounded(1.0));
      const double err = std::fabs(apply_at(op, u, 0, 0.0) - target);
      CHECK(err < 0.55 * prev);
      prev = err;
    }
  }
}
