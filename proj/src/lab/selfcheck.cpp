#include <algorithm>
#include <cmath>
#include <limits>

#include "roughlab/errors.hpp"
#include "roughlab/lab/io.hpp"
#include "roughlab/lab/scenarios.hpp"
#include "roughlab/random.hpp"
#include "roughlab/regularity.hpp"
#include "roughlab/simd.hpp"

namespace roughlab::lab {

namespace {

SpaceTimeField frozen(const Grid& g, const std::function<double(double)>& fn, BoundClass bound) {
  return SpaceTimeField::sample(g, {0.0}, [fn](double x, double) { return fn(x); }, bound, false);
}

std::vector<double> interior(const DiscreteOperator& op, const SpaceTimeField& u) {
  return apply_on_level(op, u, 0, 1, static_cast<std::ptrdiff_t>(op.grid().n_points) - 1);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

class ScopedIsa {
 public:
  explicit ScopedIsa(simd::Isa isa) { simd::force_isa(isa); }
  ~ScopedIsa() { simd::force_isa(std::nullopt); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;
};

}  // namespace

Report run_selfcheck(std::uint64_t seed, const std::filesystem::path& out) {
  Report report;
  report.scenario = "selfcheck";
  report.doc["version"] = kVersion;
  report.doc["scenario"] = "selfcheck";
  report.doc["seed"] = seed;
  report.doc["assertions"] = nlohmann::json::array();
  auto rng = SplitMix64::stream(seed, "selfcheck");

  const EllipticityParams params{1, 1.5, 1.5, 1.0, 2.0, 1.0};
  const Grid grid{2.0, 128, -0.05, 0.0, 0};
  const BoundClass bounded = BoundClass::bounded(2.0);

  {
    bool ok = kernel_bounds_check(Kernel::power(params, 2.0), 200).passed;
    for (int k = 0; k < 5; ++k) ok = ok && kernel_bounds_check(Kernel::dyadic_rough(params, rng.next()), 200).passed;
    report.check("kernel_bounds", ok, 0.0, 0.0);
  }

  const IsaacsFamily family = IsaacsFamily::seeded(params, rng.next(), 2, 2, 0.5);
  const DiscreteOperator isaacs(Operator::isaacs(family), grid);
  const DiscreteOperator plus(Operator::pucci_plus(params), grid, isaacs.tail_layout());
  const DiscreteOperator minus(Operator::pucci_minus(params), grid, isaacs.tail_layout());

  {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& k : isaacs.kernels()) {
      for (double w : k.cell) worst = std::min(worst, w);
      for (double w : k.tail_weight) worst = std::min(worst, w);
      worst = std::min(worst, k.w0);
    }
    report.check("nonnegative_weights", worst >= 0.0, worst, 0.0);
  }

  {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Affine ell{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
      const BoundClass growth = BoundClass::growth(std::fabs(ell.slope) + std::fabs(ell.offset), 1.0);
      TailSpec spec;
      spec.data_bound = growth.C;
      spec.growth = 1.0;
      const DiscreteOperator p(Operator::pucci_plus(params), grid, spec);
      const DiscreteOperator m(Operator::pucci_minus(params), grid, p.tail_layout());
      const auto u = frozen(grid, ell, growth);
      worst = std::max({worst, max_abs(interior(p, u)), max_abs(interior(m, u))});
    }
    report.check("affine_annihilation", worst <= 1e-10, worst, 1e-10);
  }

  {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto f = seeded_field(rng.next());
      const auto a = interior(plus, frozen(grid, [&f](double x) { return -f(x); }, bounded));
      const auto b = interior(minus, frozen(grid, f, bounded));
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] + b[i]));
    }
    report.check("duality", worst <= 1e-12, worst, 1e-12);
  }

  {
    EllipticityParams flat = params;
    flat.lambda = 1.5;
    flat.Lambda = 1.5;
    const DiscreteOperator lin(Operator::linear(Kernel::power(flat, 1.5)), grid);
    const DiscreteOperator p(Operator::pucci_plus(flat), grid, lin.tail_layout());
    const DiscreteOperator m(Operator::pucci_minus(flat), grid, lin.tail_layout());
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto u = frozen(grid, seeded_field(rng.next()), bounded);
      const auto a = interior(lin, u);
      const auto b = interior(p, u);
      const auto c = interior(m, u);
      const double scale = std::max(1.0, max_abs(a));
      for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max({worst, std::fabs(a[i] - b[i]) / scale, std::fabs(a[i] - c[i]) / scale});
      }
    }
    report.check("equal_bounds_collapse", worst <= 1e-10, worst, 1e-10);
  }

  {
    double slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 5; ++k) {
      slack = std::min(slack, sandwich_slack(Operator::isaacs(family), grid, seeded_field(rng.next()),
                                             seeded_field(rng.next()), bounded));
    }
    report.check("sandwich", slack >= -1e-9, slack, -1e-9);
  }

  {
    // u <= v with contact at node i forces I u(i) <= I v(i).
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k) {
      const auto f = seeded_field(rng.next());
      const auto i = static_cast<std::ptrdiff_t>(1 + rng.next() % (grid.n_points - 1));
      const double xi = grid.node(i);
      auto g = [&f, xi](double x) { return f(x) + (x - xi) * (x - xi) / (1.0 + (x - xi) * (x - xi)); };
      const auto u = frozen(grid, f, bounded);
      const auto v = frozen(grid, g, BoundClass::bounded(3.0));
      for (const DiscreteOperator* op : {&isaacs, &plus, &minus}) {
        worst = std::max(worst, apply_on_level(*op, u, 0, i, i)[0] - apply_on_level(*op, v, 0, i, i)[0]);
      }
    }
    report.check("monotone_dominance", worst <= 0.0, worst, 0.0);
  }

  {
    std::size_t violations = 0;
    for (int k = 0; k < 3; ++k) {
      const auto f = seeded_field(rng.next());
      const ExteriorData data{[f](double x, double) { return f(x); }, bounded, false};
      ParabolicProblem a{.op = Operator::isaacs(family), .grid = grid, .data = data};
      a.active_radius = 1.0;
      ParabolicProblem b = a;
      b.data = {[f](double x, double) { return f(x) + 0.05; }, BoundClass::bounded(2.05), false};
      const Trajectory ta = evolve(a);
      const Trajectory tb = evolve(b);
      for (std::size_t m = 0; m < ta.field.levels(); ++m) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const double ua = ta.field.at(m, static_cast<std::ptrdiff_t>(i));
          const double ub = tb.field.at(m, static_cast<std::ptrdiff_t>(i));
          if (!(std::fabs(ua) <= bounded.C)) ++violations;
          if (!(ua <= ub)) ++violations;
        }
      }
    }
    report.check("maximum_principle_comparison", violations == 0, static_cast<double>(violations), 0.0);
  }

  {
    const Grid fine{2.0, 256, -0.25, 0.0, 0};
    std::vector<double> times;
    for (int m = 0; m <= 64; ++m) times.push_back(-0.25 + 0.25 * m / 64.0);
    bool ok = true;
    double worst = 0.0;
    bool monotone = true;
    for (int k = 0; k < 5; ++k) {
      const auto f = seeded_field(rng.next());
      const double speed = rng.uniform(-1.0, 1.0);
      const auto u = SpaceTimeField::sample(
          fine, times, [&f, speed](double x, double t) { return f(x + speed * t); }, bounded, true);
      const Cylinder q = cylinder(rng.uniform(-0.5, 0.5), 0.0, 0.25, 1.5);
      const MomentReport mr = residual_moments_check(fit_plane(u, q, FitMode::affine), u);
      ok = ok && mr.passed;
      worst = std::max({worst, std::fabs(mr.mean), std::fabs(mr.first_moment)});
      const auto radii = dyadic_radii(8.0 * fine.dx(), 0.5);
      const auto prof = deviation_profile(u, {{0.0, 0.0}, {0.25, 0.0}}, radii, 1.5, FitMode::affine);
      for (double beta : {0.5, 1.0, 1.5}) {
        const auto th = prof.theta(beta);
        for (std::size_t r = 1; r < th.size(); ++r) monotone = monotone && th[r] >= th[r - 1];
      }
    }
    report.check("residual_moments", ok, worst, 1e-9);
    report.check("theta_monotone", monotone, 0.0, 0.0);
  }

  {
    bool same = true;
    if (simd::avx2_available()) {
      const auto u = frozen(grid, seeded_field(rng.next()), bounded);
      for (const DiscreteOperator* op : {&isaacs, &plus, &minus}) {
        std::vector<double> a;
        std::vector<double> b;
        {
          ScopedIsa s(simd::Isa::scalar);
          a = interior(*op, u);
        }
        {
          ScopedIsa s(simd::Isa::avx2);
          b = interior(*op, u);
        }
        same = same && a == b;
      }
    }
    report.doc["simd"] = simd::to_string(simd::active_isa());
    report.check("simd_equivalence", same, 0.0, 0.0);
  }

  report.doc["passed"] = report.passed();
  write_json(out / "report.json", report.doc);
  return report;
}

}  // namespace roughlab::lab
