#include "roughlab/lab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roughlab/errors.hpp"
#include "roughlab/lab/io.hpp"
#include "roughlab/random.hpp"
#include "roughlab/regularity.hpp"
#include "roughlab/simd.hpp"

namespace roughlab::lab {

namespace {

std::uint64_t derive(std::uint64_t seed, std::string_view label) { return mix64(seed ^ label_hash(label)); }

nlohmann::json header(const std::string& scenario) {
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["scenario"] = scenario;
  doc["config"] = nlohmann::json::object();
  doc["assertions"] = nlohmann::json::array();
  return doc;
}

// Embeds the resolved configuration last, after every lookup has happened.
void finish(Report& report, const Config& cfg, const std::filesystem::path& out) {
  cfg.require_all_used();
  nlohmann::json resolved = nlohmann::json::object();
  for (const auto& [k, v] : cfg.resolved()) resolved[k] = v;
  report.doc["config"] = resolved;
  report.doc["passed"] = report.passed();
  write_json(out / "report.json", report.doc);
}

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json numbers(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

nlohmann::json exponent_json(const ExponentFit& f) {
  return {{"exponent", f.exponent},       {"constant", number(f.constant)},
          {"slope_error", f.slope_error}, {"band", {f.band_lo, f.band_hi}},
          {"sentinel", f.sentinel},       {"used_small_half", f.used_small_half},
          {"used_radii", numbers(f.used_radii)}};
}

std::size_t output_stride(const Config& cfg, const SpaceTimeField& u) {
  const auto levels = static_cast<std::size_t>(std::max<std::int64_t>(2, cfg.integer("output.trajectory_levels", 11)));
  return std::max<std::size_t>(1, (u.levels() - 1 + levels - 2) / (levels - 1));
}

TailSpec tail_from(const Config& cfg) {
  TailSpec spec;
  spec.cutoff_tol = cfg.number("tail.cutoff_tol", spec.cutoff_tol);
  spec.resolve_tol = cfg.number("tail.resolve_tol", spec.resolve_tol);
  spec.resolve_spacing = cfg.number("tail.resolve_spacing", spec.resolve_spacing);
  spec.max_resolved_nodes =
      static_cast<std::size_t>(cfg.integer("tail.max_resolved_nodes", static_cast<std::int64_t>(spec.max_resolved_nodes)));
  return spec;
}

nlohmann::json cfl_json(const CflRecord& c) {
  return {{"dt", c.dt}, {"mass", c.mass}, {"safety", c.safety}, {"steps", c.steps}};
}

}  // namespace

std::function<double(double)> seeded_field(std::uint64_t seed) {
  auto rng = SplitMix64::stream(seed, "test-field");
  const BoundedNoise noise(rng.next(), rng.uniform(0.2, 1.0), rng.uniform(0.1, 0.5));
  const double a = rng.uniform(-1.0, 1.0);
  const double k = rng.uniform(0.5, 3.0);
  const double phase = rng.uniform(0.0, 6.283185307179586);
  return [noise, a, k, phase](double x) { return noise(x) + a * std::sin(k * x + phase); };
}

bool Report::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

void Report::check(const std::string& name, bool ok, double value, double threshold) {
  assertions.push_back({name, ok, value, threshold});
  doc["assertions"].push_back({{"name", name}, {"passed", ok}, {"value", number(value)}, {"threshold", number(threshold)}});
}

ExteriorData data_from(const Config& cfg, const std::string& prefix, std::uint64_t seed) {
  const std::string type = cfg.text(prefix + ".type", "zero");
  if (type == "zero") return ExteriorData::zero();
  if (type == "constant") return ExteriorData::constant(cfg.number(prefix + ".value", 0.0));
  if (type == "cosine") {
    const double amp = cfg.number(prefix + ".amplitude", 1.0);
    const double k = cfg.number(prefix + ".frequency", 1.0);
    return {[amp, k](double x, double) { return amp * std::cos(k * x); }, BoundClass::bounded(std::fabs(amp)), false};
  }
  if (type == "affine") {
    const double a = cfg.number(prefix + ".slope", 1.0);
    const double b = cfg.number(prefix + ".offset", 0.0);
    return {[a, b](double x, double) { return a * x + b; }, BoundClass::growth(std::fabs(a) + std::fabs(b), 1.0), false};
  }
  if (type == "power") {
    const double s = cfg.number(prefix + ".exponent", 0.5);
    const double amp = cfg.number(prefix + ".amplitude", 1.0);
    if (!(s > 0.0)) throw ConfigError(prefix + ".exponent must be positive");
    return {[s, amp](double x, double) { return amp * std::pow(std::fabs(x), s); }, BoundClass::growth(std::fabs(amp), s),
            false};
  }
  if (type == "gaussian") {
    const double amp = cfg.number(prefix + ".amplitude", 1.0);
    const double w = cfg.number(prefix + ".width", 1.0);
    if (!(w > 0.0)) throw ConfigError(prefix + ".width must be positive");
    return {[amp, w](double x, double) { return amp * std::exp(-(x * x) / (w * w)); }, BoundClass::bounded(std::fabs(amp)),
            false};
  }
  if (type == "bounded_noise") {
    const double amp = cfg.number(prefix + ".amplitude", 1.0);
    const double len = cfg.number(prefix + ".correlation_length", 0.25);
    const std::uint64_t s = cfg.seed(prefix + ".seed", derive(seed, prefix));
    try {
      const BoundedNoise noise(s, amp, len);
      return {[noise](double x, double) { return noise(x); }, BoundClass::bounded(amp), false};
    } catch (const DomainError& e) {
      throw ConfigError(prefix + ": " + e.what());
    }
  }
  throw ConfigError("unknown " + prefix + ".type '" + type + "'");
}

EllipticityParams params_from(const Config& cfg, double default_sigma) {
  EllipticityParams p;
  p.n = static_cast<int>(cfg.integer("params.n", 1));
  p.sigma = cfg.number("params.sigma", default_sigma);
  p.sigma0 = cfg.number("params.sigma0", std::min(p.sigma, 1.999));
  p.lambda = cfg.number("params.lambda", 1.0);
  p.Lambda = cfg.number("params.Lambda", 2.0);
  p.c_n = cfg.number("params.c_n", 1.0);
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  if (p.n != 1) throw ConfigError("params.n: only n = 1 is implemented");
  return p;
}

Grid grid_from(const Config& cfg, const Grid& defaults) {
  Grid g;
  g.half_width = cfg.number("grid.half_width", defaults.half_width);
  g.n_points = static_cast<std::size_t>(cfg.integer("grid.n_points", static_cast<std::int64_t>(defaults.n_points)));
  g.t0 = cfg.number("grid.t0", defaults.t0);
  g.t_end = cfg.number("grid.t_end", defaults.t_end);
  g.n_steps = static_cast<std::size_t>(cfg.integer("grid.n_steps", static_cast<std::int64_t>(defaults.n_steps)));
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return g;
}

namespace {

Kernel kernel_from(const Config& cfg, const EllipticityParams& params, std::uint64_t seed) {
  const std::string type = cfg.text("kernel.type", "dyadic_rough");
  if (type == "power") {
    const double c = cfg.number("kernel.constant", params.lambda);
    try {
      return Kernel::power(params, c);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("kernel: ") + e.what());
    }
  }
  if (type == "dyadic_rough") return Kernel::dyadic_rough(params, cfg.seed("kernel.seed", derive(seed, "kernel")));
  throw ConfigError("unknown kernel.type '" + type + "'");
}

}  // namespace

Operator operator_from(const Config& cfg, const EllipticityParams& params, std::uint64_t seed) {
  const std::string type = cfg.text("operator.type", "isaacs");
  if (type == "linear") return Operator::linear(kernel_from(cfg, params, seed));
  if (type == "pucci_plus") return Operator::pucci_plus(params);
  if (type == "pucci_minus") return Operator::pucci_minus(params);
  if (type == "isaacs") {
    const auto na = cfg.integer("isaacs.n_alpha", 2);
    const auto nb = cfg.integer("isaacs.n_beta", 2);
    if (na < 1 || nb < 1) throw ConfigError("isaacs family sizes must be positive");
    return Operator::isaacs(IsaacsFamily::seeded(params, cfg.seed("isaacs.seed", derive(seed, "isaacs")),
                                                 static_cast<std::size_t>(na), static_cast<std::size_t>(nb),
                                                 cfg.number("isaacs.constant_scale", 0.5)));
  }
  throw ConfigError("unknown operator.type '" + type + "'");
}

ParabolicProblem problem_from(const Config& cfg, const Grid& default_grid, double default_active_radius) {
  const std::uint64_t seed = cfg.seed("seed", 1);
  const EllipticityParams params = params_from(cfg);
  ParabolicProblem problem{
      .op = operator_from(cfg, params, seed), .grid = grid_from(cfg, default_grid), .data = data_from(cfg, "exterior", seed)};
  const std::string init = cfg.text("initial.type", "exterior");
  if (init != "exterior") {
    const ExteriorData d = data_from(cfg, "initial", seed);
    const double t0 = problem.grid.t0;
    problem.initial = [d, t0](double x) { return d(x, t0); };
  }
  const double f = cfg.number("rhs.value", 0.0);
  if (f != 0.0) problem.rhs = [f](double, double) { return f; };
  problem.active_radius = cfg.number("evolution.active_radius", default_active_radius);
  problem.safety = cfg.number("evolution.safety", 0.9);
  problem.store_every = static_cast<std::size_t>(std::max<std::int64_t>(1, cfg.integer("evolution.store_every", 1)));
  problem.tail = tail_from(cfg);
  if (problem.data.bound.exponent() >= params.sigma0) {
    throw DivergenceError("exterior growth exponent must stay below sigma0");
  }
  return problem;
}

Report analyze_field(const Config& cfg, const SpaceTimeField& u, double rhs_bound, const std::filesystem::path& out) {
  Report report;
  const EllipticityParams params = params_from(cfg);
  const double sigma = params.sigma;
  const Grid& g = u.grid();
  const std::string mode_name = cfg.text("analysis.mode", "auto");
  FitMode mode = sigma > 1.0 ? FitMode::affine : FitMode::constant;
  if (mode_name == "affine") mode = FitMode::affine;
  else if (mode_name == "constant") mode = FitMode::constant;
  else if (mode_name != "auto") throw ConfigError("analysis.mode must be auto, affine or constant");

  const double r_min = cfg.number("analysis.r_min", 4.0 * g.dx());
  const double r_max = cfg.number("analysis.r_max", trusted_radius(g, sigma));
  const std::vector<double> radii = dyadic_radii(r_min, r_max);
  if (radii.size() < 2) throw ConfigError("analysis window holds fewer than two dyadic radii");
  const auto cx = cfg.numbers("analysis.centers_x", {-0.5, -0.25, 0.0, 0.25, 0.5});
  const auto ct = cfg.numbers("analysis.centers_t", {0.0, -0.125, -0.25, -0.375});
  std::vector<std::pair<double, double>> centers;
  for (double t : ct) {
    for (double x : cx) centers.emplace_back(x, t);
  }
  const double scale = u.sup_norm();
  const DeviationProfile profile = deviation_profile(u, centers, radii, sigma, mode);
  write_deviation_csv(out / "deviation.csv", profile);
  const ExponentFit space = estimate_space_exponent(profile, scale);
  const DeviationProfile holder =
      mode == FitMode::constant ? profile : deviation_profile(u, centers, radii, sigma, FitMode::constant);
  const ExponentFit alpha = estimate_space_exponent(holder, scale);
  const double alpha_hat = std::min(1.0, alpha.exponent);

  const double power = cfg.number("analysis.deviation_power", 1.0);
  double c_power = 0.0;
  for (std::size_t r = 0; r < radii.size(); ++r) c_power = std::max(c_power, std::pow(radii[r], -power) * profile.sup[r]);
  const std::vector<double> theta = profile.theta(std::min(space.exponent, kExponentCap));
  bool monotone = true;
  for (std::size_t k = 1; k < theta.size(); ++k) monotone = monotone && theta[k] >= theta[k - 1];

  std::vector<double> taus;
  for (double r : radii) taus.push_back(std::pow(r, sigma));
  const double t_hi = cfg.number("analysis.time_hi", 0.0);
  const double t_lo = cfg.number("analysis.time_lo", -0.5);
  const double x_radius = cfg.number("analysis.time_x_radius", 0.5);
  const LagProfile lags = time_deviations(u, x_radius, t_lo, t_hi, taus);
  const ExponentFit time = estimate_exponent(lags.lags, lags.deviations, scale);

  const std::size_t last = u.levels() - 1;
  const double beta_s = space.sentinel ? 1.0 : std::clamp(space.exponent, 0.05, 1.95);
  const double gamma_s = std::clamp(beta_s / sigma, 0.05, 1.0);
  const double space_seminorm = holder_seminorm_space(u, last, 0.5, beta_s);
  const double time_seminorm = holder_seminorm_time(u, 0.0, t_lo, t_hi, gamma_s);
  const double epsilon = cfg.number("target.epsilon", 0.05);
  const double c0 = std::max(scale, u.exterior().bound.C) + rhs_bound;

  auto& doc = report.doc;
  doc["mode"] = to_string(mode);
  doc["window"] = {{"r_min", r_min}, {"r_max", r_max}};
  doc["radii"] = numbers(radii);
  doc["deviation_sup"] = numbers(profile.sup);
  doc["theta"] = numbers(theta);
  doc["space_exponent"] = exponent_json(space);
  doc["holder_exponent"] = exponent_json(alpha);
  doc["time_lags"] = numbers(lags.lags);
  doc["time_deviation"] = numbers(lags.deviations);
  doc["time_exponent"] = exponent_json(time);
  doc["ratio_time_sigma_over_space"] = number(time.exponent * sigma / space.exponent);
  doc["deviation_power"] = power;
  doc["deviation_constant"] = number(c_power);
  doc["seminorm_space"] = {{"beta", beta_s}, {"value", number(space_seminorm)}};
  doc["seminorm_time"] = {{"gamma", gamma_s}, {"value", number(time_seminorm)}};
  doc["target"] = {{"epsilon", epsilon},
                   {"space", std::min(sigma, 1.0 + alpha_hat) - epsilon},
                   {"time", space.exponent / sigma}};
  doc["C0"] = c0;

  report.check("theta_monotone", monotone, theta.empty() ? 0.0 : theta.back(), 0.0);
  if (cfg.has("assert.space_exponent_min")) {
    const double v = cfg.number("assert.space_exponent_min");
    report.check("space_exponent_min", space.exponent >= v, space.exponent, v);
  }
  if (cfg.has("assert.space_exponent_sigma_fraction")) {
    const double v = cfg.number("assert.space_exponent_sigma_fraction");
    report.check("space_exponent_sigma_fraction", space.exponent >= v * sigma, space.exponent, v * sigma);
  }
  if (cfg.has("assert.time_consistency")) {
    const double v = cfg.number("assert.time_consistency");
    const double gap = std::fabs(time.exponent * sigma - space.exponent);
    report.check("time_consistency", gap <= v * space.exponent, gap, v * space.exponent);
  }
  if (cfg.flag("assert.deviation_constant_finite", false)) {
    report.check("deviation_constant_finite", std::isfinite(c_power), c_power, 0.0);
  }
  if (cfg.has("assert.alpha_min")) {
    const double v = cfg.number("assert.alpha_min");
    report.check("alpha_min", alpha.exponent >= v, alpha.exponent, v);
  }
  return report;
}

namespace {

struct EvolutionRun {
  Report report;
  ParabolicProblem problem;
  Trajectory trajectory;
};

EvolutionRun run_evolution(const Config& cfg, const std::filesystem::path& out, const std::string& scenario) {
  ParabolicProblem problem = problem_from(cfg, Grid{2.0, 256, -1.0, 0.0, 0}, 1.0);
  const double sigma = problem.op.params().sigma;
  problem.store_dt = cfg.number("evolution.store_dt", std::pow(4.0 * problem.grid.dx(), sigma) / 5.0);
  Trajectory traj = evolve(problem);
  write_trajectory_csv(out / "trajectory.csv", traj.field, output_stride(cfg, traj.field));
  const double rhs_bound = std::fabs(cfg.number("rhs.value", 0.0));
  Report report = analyze_field(cfg, traj.field, rhs_bound, out);
  report.scenario = scenario;
  nlohmann::json doc = header(scenario);
  doc.update(report.doc);
  doc["operator"] = to_string(problem.op.kind());
  doc["cfl"] = cfl_json(traj.cfl);
  doc["levels"] = traj.field.levels();
  doc["sup_norm"] = traj.field.sup_norm();
  doc["final_residual"] = traj.residual.empty() ? 0.0 : traj.residual.back();
  report.doc = std::move(doc);
  return {std::move(report), std::move(problem), std::move(traj)};
}

// Sup of |u| over grid nodes |x| <= radius and stored levels t in [t_lo, t_hi].
double local_sup(const SpaceTimeField& u, double radius, double t_lo, double t_hi) {
  const Grid& g = u.grid();
  double s = 0.0;
  for (std::size_t m = 0; m < u.levels(); ++m) {
    if (u.time(m) < t_lo - 1e-12 || u.time(m) > t_hi + 1e-12) continue;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::fabs(g.node(static_cast<std::ptrdiff_t>(i))) <= radius + 1e-12) {
        s = std::max(s, std::fabs(u.at(m, static_cast<std::ptrdiff_t>(i))));
      }
    }
  }
  return s;
}

std::pair<double, double> local_range(const SpaceTimeField& u, double radius, double t_lo, double t_hi) {
  const Grid& g = u.grid();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t m = 0; m < u.levels(); ++m) {
    const double t = u.time(m);
    if (t <= t_lo + 1e-12 || t > t_hi + 1e-12) continue;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::fabs(g.node(static_cast<std::ptrdiff_t>(i))) <= radius + 1e-12) {
        const double v = u.at(m, static_cast<std::ptrdiff_t>(i));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (lo > hi) throw ResolutionError("no stored nodes in the oscillation window");
  return {lo, hi};
}

}  // namespace

Report run_main_estimate(const Config& cfg, const std::filesystem::path& out) {
  EvolutionRun run = run_evolution(cfg, out, "main_estimate");
  finish(run.report, cfg, out);
  return std::move(run.report);
}

Report run_calpha_check(const Config& cfg_in, const std::filesystem::path& out) {
  Config cfg = cfg_in;
  if (!cfg.has("analysis.mode")) cfg.set("analysis.mode", "constant");
  EvolutionRun run = run_evolution(cfg, out, "calpha_check");
  const SpaceTimeField& u = run.trajectory.field;
  const double sigma0 = run.problem.op.params().sigma0;
  const double t0 = u.grid().t0;
  const double t_end = u.grid().t_end;

  // Right-hand side grouped as in the interior estimate: sup over B_1 in
  // time, sup in time of the weighted L1 norm, and C0.
  const double sup_b1 = local_sup(u, 1.0, t0, t_end);
  const std::size_t stride = output_stride(cfg, u);
  double l1 = 0.0;
  for (std::size_t m = 0; m < u.levels(); m += stride) l1 = std::max(l1, weighted_l1_norm(u, m, sigma0));
  l1 = std::max(l1, weighted_l1_norm(u, u.levels() - 1, sigma0));
  const double c0 = std::fabs(cfg.number("rhs.value", 0.0));
  const double rhs = sup_b1 + l1 + c0;

  auto& doc = run.report.doc;
  const ExponentFit alpha_fit = [&] {
    ExponentFit f;
    f.exponent = doc["space_exponent"]["exponent"].get<double>();
    f.sentinel = doc["space_exponent"]["sentinel"].get<bool>();
    return f;
  }();
  const double alpha = std::clamp(alpha_fit.exponent, 0.05, 1.0);
  double lhs = 0.0;
  for (std::size_t m = 0; m < u.levels(); m += stride) {
    if (u.time(m) >= -0.5 - 1e-12) lhs = std::max(lhs, holder_seminorm_space(u, m, 0.5, alpha));
  }
  lhs = std::max(lhs, holder_seminorm_space(u, u.levels() - 1, 0.5, alpha));
  doc["alpha_hat"] = alpha_fit.exponent;
  doc["rhs_aggregate"] = {{"sup_b1", sup_b1}, {"weighted_l1", l1}, {"C0", c0}, {"total", rhs}};
  doc["holder_seminorm"] = {{"alpha", alpha}, {"value", number(lhs)}};
  doc["constant_ratio"] = rhs > 0.0 ? number(lhs / rhs) : nlohmann::json(nullptr);
  run.report.check("seminorm_finite", std::isfinite(lhs), lhs, 0.0);
  finish(run.report, cfg, out);
  return std::move(run.report);
}

Report run_liouville(const Config& cfg_in, const std::filesystem::path& out) {
  Config cfg = cfg_in;
  if (!cfg.has("operator.type")) cfg.set("operator.type", "pucci_plus");
  const Grid defaults{8.0, 512, 0.0, 16.0, 0};
  const Grid grid = grid_from(cfg, defaults);
  ParabolicProblem problem = problem_from(cfg, defaults, grid.half_width);
  const double sigma = problem.op.params().sigma;
  const double beta = cfg.number("liouville.beta", 1.0);
  if (!(beta > 0.0) || beta >= problem.op.params().sigma0) throw ConfigError("liouville.beta must lie in (0, sigma0)");
  const auto rhos = cfg.numbers("liouville.rhos", {1.0, 2.0, 4.0});
  // Window of scale rho covers ages (age rho^sigma, (age + 1) rho^sigma].
  const double age = cfg.number("liouville.age", 0.0078125);
  if (!(age >= 0.0)) throw ConfigError("liouville.age must be nonnegative");
  if (rhos.size() < 2) throw ConfigError("liouville.rhos needs at least two scales");
  for (double rho : rhos) {
    if (!(rho >= 1.0)) throw ConfigError("liouville.rhos must be >= 1");
    if (grid.t0 + (age + 1.0) * std::pow(rho, sigma) > grid.t_end + 1e-12) {
      throw ConfigError("grid.t_end too small for the largest liouville scale");
    }
    if (grid.half_width / rho <= 1.0) throw ConfigError("grid too small for the largest liouville scale");
  }
  problem.store_dt = cfg.number("evolution.store_dt", age > 0.0 ? std::min(1.0 / 32.0, age / 2.0) : 1.0 / 32.0);
  const Trajectory traj = evolve(problem);
  write_trajectory_csv(out / "trajectory.csv", traj.field, output_stride(cfg, traj.field));

  Report report;
  report.scenario = "liouville";
  report.doc = header("liouville");
  std::vector<double> osc;
  std::vector<double> anchors;
  std::string csv = "rho,anchor,oscillation\n";
  for (double rho : rhos) {
    const double anchor = grid.t0 + (age + 1.0) * std::pow(rho, sigma);
    const SpaceTimeField v = parabolic_rescale(traj.field, rho, beta, sigma, anchor);
    const auto [lo, hi] = local_range(v, 1.0, -1.0, 0.0);
    osc.push_back(hi - lo);
    anchors.push_back(anchor);
    csv += format_double(rho) + "," + format_double(anchor) + "," + format_double(hi - lo) + "\n";
  }
  write_text(out / "oscillation.csv", csv);
  const double ratio = osc.front() > 0.0 ? osc.back() / osc.front() : 0.0;
  double spread = 0.0;
  for (double o : osc) spread = std::max(spread, std::fabs(o - osc.front()));
  auto& doc = report.doc;
  doc["operator"] = to_string(problem.op.kind());
  doc["cfl"] = cfl_json(traj.cfl);
  doc["beta"] = beta;
  doc["rhos"] = numbers(rhos);
  doc["anchors"] = numbers(anchors);
  doc["oscillation"] = numbers(osc);
  doc["ratio_last_over_first"] = ratio;
  doc["max_deviation_from_first"] = spread;
  if (cfg.has("assert.max_ratio")) {
    const double v = cfg.number("assert.max_ratio");
    report.check("oscillation_ratio", ratio <= v, ratio, v);
  }
  if (cfg.has("assert.flat_tolerance")) {
    const double v = cfg.number("assert.flat_tolerance");
    report.check("oscillation_flat", spread <= v, spread, v);
  }
  finish(report, cfg, out);
  return report;
}

Report run_sigma2_limit(const Config& cfg, const std::filesystem::path& out) {
  const auto sigmas = cfg.numbers("limit.sigmas", {1.9, 1.99, 1.999});
  const std::string fn_name = cfg.text("limit.function", "gaussian");
  std::function<double(double)> fn;
  std::function<double(double)> d2;
  BoundClass bound = BoundClass::bounded(1.0);
  if (fn_name == "gaussian") {
    fn = [](double x) { return std::exp(-x * x); };
    d2 = [](double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); };
  } else if (fn_name == "cosine") {
    fn = [](double x) { return std::cos(x); };
    d2 = [](double x) { return -std::cos(x); };
  } else if (fn_name == "affine") {
    fn = [](double x) { return 2.0 * x + 1.0; };
    d2 = [](double) { return 0.0; };
    bound = BoundClass::growth(3.0, 1.0);
  } else {
    throw ConfigError("limit.function must be gaussian, cosine or affine");
  }
  const Grid grid = grid_from(cfg, Grid{2.0, 2048, -1.0, 0.0, 0});
  const EllipticityParams base = params_from(cfg, 1.9);
  const double c = cfg.number("kernel.constant", 1.0);
  const double radius = cfg.number("limit.radius", 1.0);
  const TailSpec spec = tail_from(cfg);

  Report report;
  report.scenario = "sigma2_limit";
  report.doc = header("sigma2_limit");
  std::vector<double> errors;
  std::string csv = "sigma,error\n";
  for (double s : sigmas) {
    EllipticityParams p = base;
    p.sigma = s;
    p.sigma0 = std::min(p.sigma0, s);
    if (s == 2.0) p.sigma0 = std::min(p.sigma0, 1.999);
    try {
      p.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("limit.sigmas: ") + e.what());
    }
    TailSpec ts = spec;
    ts.data_bound = bound.C;
    ts.growth = bound.exponent();
    Kernel k = [&] {
      try {
        return Kernel::power(p, c);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("kernel.constant: ") + e.what());
      }
    }();
    const DiscreteOperator op(Operator::linear(k), grid, ts);
    const auto u = SpaceTimeField::sample(grid, {0.0}, [fn](double x, double) { return fn(x); }, bound, false);
    const auto lo = std::max<std::ptrdiff_t>(1, grid.nearest_index(-radius));
    const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(grid.n_points) - 1, grid.nearest_index(radius));
    const auto v = apply_on_level(op, u, 0, lo, hi);
    const double scale = s == 2.0 ? p.c_n * c : c;
    double e = 0.0;
    for (auto i = lo; i <= hi; ++i) e = std::max(e, std::fabs(v[static_cast<std::size_t>(i - lo)] - scale * d2(grid.node(i))));
    errors.push_back(e);
    csv += format_double(s) + "," + format_double(e) + "\n";
  }
  write_text(out / "limit.csv", csv);
  bool decreasing = true;
  for (std::size_t k = 1; k < errors.size(); ++k) decreasing = decreasing && errors[k] < errors[k - 1];
  auto& doc = report.doc;
  doc["function"] = fn_name;
  doc["sigmas"] = numbers(sigmas);
  doc["errors"] = numbers(errors);
  doc["decreasing"] = decreasing;
  if (cfg.flag("assert.decreasing", false)) report.check("error_decreasing", decreasing, errors.back(), 0.0);
  if (cfg.has("assert.limit_tolerance")) {
    const double v = cfg.number("assert.limit_tolerance");
    report.check("last_error", errors.back() <= v, errors.back(), v);
  }
  finish(report, cfg, out);
  return report;
}

namespace {

std::shared_ptr<const TailLayout> scaled_layout(const TailLayout& layout, double r) {
  TailLayout s = layout;
  for (auto* v : {&s.lo, &s.hi, &s.node}) {
    for (double& y : *v) y /= r;
  }
  s.cutoff /= r;
  return std::make_shared<const TailLayout>(std::move(s));
}

}  // namespace

ScalingResult scaling_relation(const Operator& op, const Grid& grid, double x0, double r, double c, const Affine& ell,
                               const std::function<double(double)>& w, BoundClass bound, const TailSpec& spec) {
  if (!(r >= 1.0) || std::fabs(std::exp2(std::round(std::log2(r))) - r) > 0.0) {
    throw DomainError("nested grids need r to be a power of two");
  }
  const auto i0 = grid.nearest_index(x0);
  if (std::fabs(grid.node(i0) - x0) > 1e-12 * std::max(1.0, grid.half_width)) throw DomainError("x0 must be a grid node");
  TailSpec ts = spec;
  ts.data_bound = bound.C;
  ts.growth = bound.exponent();
  const DiscreteOperator coarse(op, grid, ts);
  const Grid fine{grid.half_width, static_cast<std::size_t>(std::llround(r * static_cast<double>(grid.n_points))), grid.t0,
                  grid.t_end, 0};
  const Operator tilde = rescale_operator(op, x0, r, c, ell);
  const DiscreteOperator scaled(tilde, fine, scaled_layout(*coarse.tail_layout(), r));

  const auto wf = SpaceTimeField::sample(grid, {0.0}, [w](double x, double) { return w(x); }, bound, false);
  auto wt = [w, x0, r, c, ell](double y) { return (w(x0 + r * y) - ell(x0 + r * y)) / c; };
  const auto uf = SpaceTimeField::sample(fine, {0.0}, [wt](double y, double) { return wt(y); }, bound, false);

  const auto n = static_cast<std::ptrdiff_t>(grid.n_points);
  std::ptrdiff_t lo = -1;
  std::ptrdiff_t hi = -1;
  for (std::ptrdiff_t k = 1; k < static_cast<std::ptrdiff_t>(fine.n_points); ++k) {
    const std::ptrdiff_t i = i0 + (k - static_cast<std::ptrdiff_t>(fine.n_points / 2));
    if (i < 1 || i > n - 1) continue;
    if (lo < 0) lo = k;
    hi = k;
  }
  if (lo < 0) throw DomainError("no rescaled node lands inside the coarse grid");
  const std::ptrdiff_t shift = i0 - static_cast<std::ptrdiff_t>(fine.n_points / 2);
  const auto lhs = apply_on_level(scaled, uf, 0, lo, hi);
  const auto rhs = apply_on_level(coarse, wf, 0, lo + shift, hi + shift);
  const double factor = std::pow(r, op.params().sigma) / c;
  ScalingResult result;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    result.max_error = std::max(result.max_error, std::fabs(lhs[k] - factor * rhs[k]));
    result.max_value = std::max(result.max_value, std::fabs(factor * rhs[k]));
  }
  result.nodes = lhs.size();
  return result;
}

double sandwich_slack(const Operator& op, const Grid& grid, const std::function<double(double)>& u,
                      const std::function<double(double)>& v, BoundClass bound, const TailSpec& spec) {
  const EllipticityParams& p = op.params();
  TailSpec ts = spec;
  ts.data_bound = 2.0 * bound.C;
  ts.growth = bound.exponent();
  const DiscreteOperator iop(op, grid, ts);
  const DiscreteOperator plus(Operator::pucci_plus(p), grid, iop.tail_layout());
  const DiscreteOperator minus(Operator::pucci_minus(p), grid, iop.tail_layout());
  BoundClass diff = bound;
  diff.C *= 2.0;
  const auto fu = SpaceTimeField::sample(grid, {0.0}, [u](double x, double) { return u(x); }, bound, false);
  const auto fv = SpaceTimeField::sample(grid, {0.0}, [v](double x, double) { return v(x); }, bound, false);
  const auto fd = SpaceTimeField::sample(grid, {0.0}, [u, v](double x, double) { return u(x) - v(x); }, diff, false);
  const std::ptrdiff_t lo = 1;
  const auto hi = static_cast<std::ptrdiff_t>(grid.n_points) - 1;
  const auto iu = apply_on_level(iop, fu, 0, lo, hi);
  const auto iv = apply_on_level(iop, fv, 0, lo, hi);
  const auto mp = apply_on_level(plus, fd, 0, lo, hi);
  const auto mm = apply_on_level(minus, fd, 0, lo, hi);
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < iu.size(); ++k) {
    const double d = iu[k] - iv[k];
    slack = std::min({slack, d - mm[k], mp[k] - d});
  }
  return slack;
}

Report run_scaling_check(const Config& cfg, const std::filesystem::path& out) {
  const std::uint64_t seed = cfg.seed("seed", 1);
  const EllipticityParams params = params_from(cfg);
  const Grid grid = grid_from(cfg, Grid{2.0, 256, -1.0, 0.0, 0});
  const double r = cfg.number("scale.r", 2.0);
  const double c = cfg.number("scale.c", 3.0);
  const double x0 = cfg.number("scale.x0", 0.0);
  const Affine ell{cfg.number("scale.slope", 2.0), cfg.number("scale.offset", 1.0)};
  const auto pairs = static_cast<std::size_t>(std::max<std::int64_t>(0, cfg.integer("scale.pairs", 100)));
  const auto families = static_cast<std::size_t>(std::max<std::int64_t>(1, cfg.integer("scale.families", 5)));
  const TailSpec spec = tail_from(cfg);
  const BoundClass bound = BoundClass::bounded(2.0);

  Report report;
  report.scenario = "scaling_check";
  report.doc = header("scaling_check");
  auto rng = SplitMix64::stream(seed, "scaling-check");
  const auto w = seeded_field(rng.next());
  std::vector<std::pair<std::string, Operator>> ops;
  ops.emplace_back("linear", Operator::linear(Kernel::dyadic_rough(params, rng.next())));
  ops.emplace_back("pucci_plus", Operator::pucci_plus(params));
  ops.emplace_back("pucci_minus", Operator::pucci_minus(params));
  ops.emplace_back("isaacs", Operator::isaacs(IsaacsFamily::seeded(params, rng.next(), 2, 2, 0.5)));

  double relation = 0.0;
  nlohmann::json rel = nlohmann::json::object();
  for (const auto& [name, op] : ops) {
    ScalingResult res;
    try {
      res = scaling_relation(op, grid, x0, r, c, ell, w, bound, spec);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("scale: ") + e.what());
    }
    rel[name] = {{"max_error", res.max_error}, {"max_value", res.max_value}, {"nodes", res.nodes}};
    relation = std::max(relation, res.max_error);
  }

  double slack = std::numeric_limits<double>::infinity();
  std::vector<double> per_family;
  for (std::size_t f = 0; f < families; ++f) {
    const Operator isaacs =
        rescale_operator(Operator::isaacs(IsaacsFamily::seeded(params, rng.next(), 2, 2, 0.5)), x0, r, c, ell);
    double fam = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < (pairs + families - 1) / families; ++q) {
      fam = std::min(fam, sandwich_slack(isaacs, grid, seeded_field(rng.next()), seeded_field(rng.next()), bound, spec));
    }
    per_family.push_back(fam);
    slack = std::min(slack, fam);
  }

  auto& doc = report.doc;
  doc["relation"] = rel;
  doc["relation_max_error"] = relation;
  doc["sandwich_min_slack"] = number(slack);
  doc["sandwich_per_family"] = numbers(per_family);
  const double rel_tol = cfg.number("assert.relation_tolerance", 1e-6);
  report.check("rescale_relation", relation <= rel_tol, relation, rel_tol);
  const double slack_tol = cfg.number("assert.sandwich_slack", -1e-9);
  report.check("sandwich", pairs == 0 || slack >= slack_tol, pairs == 0 ? 0.0 : slack, slack_tol);
  finish(report, cfg, out);
  return report;
}

Report run_analyze(const Config& cfg, const std::filesystem::path& out) {
  const std::string path = cfg.text("input.trajectory");
  const SpaceTimeField u = read_trajectory_csv(path);
  Report report = analyze_field(cfg, u, std::fabs(cfg.number("rhs.value", 0.0)), out);
  report.scenario = "analyze";
  nlohmann::json doc = header("analyze");
  doc.update(report.doc);
  doc["levels"] = u.levels();
  doc["sup_norm"] = u.sup_norm();
  report.doc = std::move(doc);
  finish(report, cfg, out);
  return report;
}

Report run_scenario(const Config& cfg, const std::filesystem::path& out) {
  const std::string s = cfg.text("scenario", "main_estimate");
  if (s == "main_estimate") return run_main_estimate(cfg, out);
  if (s == "calpha_check") return run_calpha_check(cfg, out);
  if (s == "liouville") return run_liouville(cfg, out);
  if (s == "sigma2_limit") return run_sigma2_limit(cfg, out);
  if (s == "scaling_check") return run_scaling_check(cfg, out);
  if (s == "analyze") return run_analyze(cfg, out);
  throw ConfigError("unknown scenario '" + s + "'");
}

}  // namespace roughlab::lab
