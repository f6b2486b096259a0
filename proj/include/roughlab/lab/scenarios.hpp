#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughlab/evolution.hpp"
#include "roughlab/lab/config.hpp"
#include "roughlab/operators.hpp"

namespace roughlab::lab {

inline constexpr const char* kVersion = "0.1.0";

struct Assertion {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double threshold = 0.0;
};

struct Report {
  std::string scenario;
  nlohmann::json doc;
  std::vector<Assertion> assertions;

  bool passed() const;
  /// Adds the assertion to both the list and the JSON document.
  void check(const std::string& name, bool ok, double value, double threshold);
};

/// Named data generators shared by the exterior and initial sections:
/// zero, constant, cosine, affine, power, gaussian, bounded_noise.
ExteriorData data_from(const Config& cfg, const std::string& prefix, std::uint64_t seed);

EllipticityParams params_from(const Config& cfg, double default_sigma = 1.5);
Grid grid_from(const Config& cfg, const Grid& defaults);
/// operator.type = linear | pucci_plus | pucci_minus | isaacs; kernels are
/// power (kernel.constant) or dyadic_rough (kernel.seed).
Operator operator_from(const Config& cfg, const EllipticityParams& params, std::uint64_t seed);

/// Evolution problem for the simulate and liouville scenarios.
ParabolicProblem problem_from(const Config& cfg, const Grid& default_grid, double default_active_radius);

/// Regularity analysis of a stored trajectory (space and time exponents,
/// seminorms, deviation CSV). Used by simulate and analyze.
Report analyze_field(const Config& cfg, const SpaceTimeField& u, double rhs_bound,
                     const std::filesystem::path& out);

Report run_main_estimate(const Config& cfg, const std::filesystem::path& out);
Report run_calpha_check(const Config& cfg, const std::filesystem::path& out);
Report run_liouville(const Config& cfg, const std::filesystem::path& out);
Report run_sigma2_limit(const Config& cfg, const std::filesystem::path& out);
Report run_scaling_check(const Config& cfg, const std::filesystem::path& out);
/// Reads the trajectory named by input.trajectory and analyzes it.
Report run_analyze(const Config& cfg, const std::filesystem::path& out);

/// Bounded noise plus a random sinusoid, defined on all of R.
std::function<double(double)> seeded_field(std::uint64_t seed);

struct ScalingResult {
  double max_error = 0.0;  ///< max |J u~ - (r^sigma / c) I w| over compared nodes
  double max_value = 0.0;
  std::size_t nodes = 0;
};

/// Compares the rescaled operator on the grid refined by r (a power of two)
/// against the original operator on `grid`, with x0 a node of `grid`.
ScalingResult scaling_relation(const Operator& op, const Grid& grid, double x0, double r, double c, const Affine& ell,
                               const std::function<double(double)>& w, BoundClass bound, const TailSpec& spec = {});

/// min over interior nodes of (Iu - Iv) - M-(u - v) and M+(u - v) - (Iu - Iv),
/// all operators sharing one tail layout.
double sandwich_slack(const Operator& op, const Grid& grid, const std::function<double(double)>& u,
                      const std::function<double(double)>& v, BoundClass bound, const TailSpec& spec = {});

/// Dispatches on the `scenario` key and writes report.json into out.
Report run_scenario(const Config& cfg, const std::filesystem::path& out);

/// Invariant suites on small problems; one line per check in the report.
Report run_selfcheck(std::uint64_t seed, const std::filesystem::path& out);

}  // namespace roughlab::lab
