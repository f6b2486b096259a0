#include <doctest.h>

#include <sys/wait.h>

#include <clocale>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughlab/errors.hpp"
#include "roughlab/lab/config.hpp"
#include "roughlab/lab/io.hpp"
#include "roughlab/lab/scenarios.hpp"
#include "support.hpp"

using namespace roughlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("roughlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ROUGHLAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallMain = R"(
scenario = main_estimate
seed = 5
params.sigma = 1.5
params.lambda = 1
params.Lambda = 2
grid.half_width = 2
grid.n_points = 128
grid.t0 = -1
grid.t_end = 0
operator.type = pucci_plus
exterior.type = cosine
evolution.active_radius = 1
)";

}  // namespace

TEST_SUITE("lab") {
  TEST_CASE("config parsing") {
    const auto cfg = lab::Config::parse("# comment\n a.b = 1.5 \nname = hello # trailing\nlist = 1, 2,3\nflag = true\n");
    CHECK(cfg.number("a.b") == 1.5);
    CHECK(cfg.text("name") == "hello");
    CHECK(cfg.numbers("list", {}) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(cfg.flag("flag", false));
    CHECK(cfg.number("missing", 7.0) == 7.0);
    CHECK(cfg.resolved().at("missing") == lab::format_double(7.0));
    CHECK(cfg.unused().empty());
    CHECK_THROWS_AS(cfg.number("name"), ConfigError);
    CHECK_THROWS_AS(cfg.text("absent"), ConfigError);
  }

  TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS(lab::Config::parse("novalue\n"), ConfigError);
    CHECK_THROWS_AS(lab::Config::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(lab::Config::parse("a =\n"), ConfigError);
    CHECK_THROWS_AS(lab::Config::parse("bad key = 1\n"), ConfigError);
    const auto cfg = lab::Config::parse("seed = -3\nn = 2.5\nb = maybe\n");
    CHECK_THROWS_AS(cfg.seed("seed", 0), ConfigError);
    CHECK_THROWS_AS(cfg.integer("n", 0), ConfigError);
    CHECK_THROWS_AS(cfg.flag("b", false), ConfigError);
    const auto extra = lab::Config::parse("used = 1\nstray = 2\n");
    CHECK(extra.number("used") == 1.0);
    CHECK(extra.unused() == std::vector<std::string>{"stray"});
    CHECK_THROWS_AS(extra.require_all_used(), ConfigError);
  }

  TEST_CASE("numbers are formatted independently of the locale") {
    CHECK(lab::format_double(0.1) == "0.10000000000000001");
    CHECK(lab::format_double(-2.0) == "-2");
    const char* old = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = old ? old : "C";
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) CHECK(lab::format_double(1.5) == "1.5");
    std::setlocale(LC_NUMERIC, saved.c_str());
  }

  TEST_CASE("trajectory CSV round trip") {
    const fs::path dir = scratch("csv");
    const Grid g{2.0, 32, -1.0, 0.0, 0};
    const auto u = SpaceTimeField::sample(g, {-1.0, -0.5, 0.0}, [](double x, double t) { return std::sin(x) + t / 3.0; },
                                          BoundClass::bounded(2.0));
    lab::write_trajectory_csv(dir / "traj.csv", u);
    const auto v = lab::read_trajectory_csv(dir / "traj.csv");
    REQUIRE(v.levels() == 3);
    CHECK(v.grid().n_points == 32);
    CHECK(v.grid().half_width == 2.0);
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(v.time(m) == u.time(m));
      for (std::ptrdiff_t i = 0; i <= 32; ++i) CHECK(v.at(m, i) == u.at(m, i));
    }
    std::ofstream(dir / "bad.csv") << "a,b\n";
    CHECK_THROWS_AS(lab::read_trajectory_csv(dir / "bad.csv"), ConfigError);
  }

  TEST_CASE("scenario runs are deterministic") {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    const auto ra = lab::run_scenario(lab::Config::parse(kSmallMain), a);
    const auto rb = lab::run_scenario(lab::Config::parse(kSmallMain), b);
    CHECK(ra.passed() == rb.passed());
    for (const auto& entry : fs::directory_iterator(a)) {
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    const auto doc = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(doc["config"]["grid.n_points"] == "128");
    CHECK(doc["scenario"] == "main_estimate");
  }

  TEST_CASE("unknown keys are reported") {
    const fs::path dir = scratch("unknown");
    auto cfg = lab::Config::parse(std::string(kSmallMain) + "grid.typo = 3\n");
    CHECK_THROWS_AS(lab::run_scenario(cfg, dir), ConfigError);
  }

  TEST_CASE("analyze reproduces the stored trajectory") {
    const fs::path dir = scratch("analyze");
    lab::run_scenario(lab::Config::parse(std::string(kSmallMain) + "output.trajectory_levels = 100000\n"), dir / "sim");
    const auto sim = nlohmann::json::parse(slurp(dir / "sim" / "report.json"));
    auto cfg = lab::Config::parse("scenario = analyze\nparams.sigma = 1.5\nanalysis.mode = affine\n");
    cfg.set("input.trajectory", (dir / "sim" / "trajectory.csv").string());
    lab::run_scenario(cfg, dir / "an");
    const auto an = nlohmann::json::parse(slurp(dir / "an" / "report.json"));
    CHECK(an["space_exponent"]["exponent"].get<double>() == doctest::Approx(sim["space_exponent"]["exponent"].get<double>()));
  }

  TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("cli");
    CHECK(run_cli("selfcheck --out " + (dir / "self").string()) == 0);
    CHECK(fs::exists(dir / "self" / "report.json"));
    CHECK(run_cli("nonsense") == 2);
    CHECK(run_cli("simulate --config /nonexistent/file.cfg") == 2);
    std::ofstream(dir / "bad.cfg") << "scenario = liouville\n";
    CHECK(run_cli("simulate --config " + (dir / "bad.cfg").string() + " --out " + (dir / "bad").string()) == 2);
    std::ofstream(dir / "typo.cfg") << "params.sigmaa = 1\n";
    CHECK(run_cli("simulate --config " + (dir / "typo.cfg").string() + " --out " + (dir / "typo").string()) == 2);
    std::ofstream(dir / "cfl.cfg") << kSmallMain << "grid.n_steps = 3\n";
    CHECK(run_cli("simulate --config " + (dir / "cfl.cfg").string() + " --out " + (dir / "cfl").string()) == 3);
    std::ofstream(dir / "fail.cfg") << kSmallMain << "assert.space_exponent_min = 2.9\n";
    CHECK(run_cli("simulate --config " + (dir / "fail.cfg").string() + " --out " + (dir / "fail").string()) == 1);
  }

  TEST_CASE("selfcheck passes") {
    const fs::path dir = scratch("selfcheck");
    const auto r = lab::run_selfcheck(3, dir);
    for (const auto& a : r.assertions) CHECK_MESSAGE(a.passed, a.name);
  }
}
