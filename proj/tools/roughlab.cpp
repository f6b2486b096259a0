#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "roughlab/errors.hpp"
#include "roughlab/lab/config.hpp"
#include "roughlab/lab/scenarios.hpp"
#include "roughlab/parallel.hpp"

namespace lab = roughlab::lab;

namespace {

int print_report(const lab::Report& report) {
  for (const auto& a : report.assertions) {
    std::printf("%-32s %s  value=%.6g threshold=%.6g\n", a.name.c_str(), a.passed ? "pass" : "FAIL", a.value,
                a.threshold);
  }
  std::printf("%s: %s\n", report.scenario.c_str(), report.passed() ? "pass" : "FAIL");
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal parabolic regularity laboratory"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;

  struct Command {
    const char* name;
    const char* help;
    std::vector<std::string> scenarios;
  };
  const std::vector<Command> commands = {
      {"simulate", "Evolve a problem and measure its regularity", {"main_estimate", "calpha_check"}},
      {"analyze", "Analyze a stored trajectory", {"analyze"}},
      {"liouville", "Rescaled oscillation under parabolic blow-down", {"liouville"}},
      {"limit2", "Approach to the second derivative as sigma tends to 2", {"sigma2_limit"}},
      {"scalecheck", "Operator rescaling relation and ellipticity sandwich", {"scaling_check"}},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Override the master seed");
    sub->add_option("--threads", threads, "Worker threads (0 = auto)");
  }
  auto* selfcheck = app.add_subcommand("selfcheck", "Run the invariant suites");
  selfcheck->add_option("--out", out_dir, "Output directory");
  selfcheck->add_option("--seed", seed, "Seed for the generated fields");
  selfcheck->add_option("--threads", threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    roughlab::set_thread_count(threads);
    if (selfcheck->parsed()) return print_report(lab::run_selfcheck(seed.value_or(1), out_dir));

    for (const auto& c : commands) {
      if (!app.got_subcommand(c.name)) continue;
      lab::Config cfg = config_path.empty() ? lab::Config::parse("", "<defaults>") : lab::Config::load(config_path);
      if (seed) cfg.set("seed", std::to_string(*seed));
      if (!cfg.has("scenario")) cfg.set("scenario", c.scenarios.front());
      const std::string s = cfg.text("scenario");
      if (std::find(c.scenarios.begin(), c.scenarios.end(), s) == c.scenarios.end()) {
        throw roughlab::ConfigError("scenario '" + s + "' does not belong to subcommand " + c.name);
      }
      return print_report(lab::run_scenario(cfg, out_dir));
    }
  } catch (const roughlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const roughlab::DivergenceError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const roughlab::NumericalAbort& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 3;
  } catch (const roughlab::CflViolation& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 3;
  } catch (const roughlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
