#include "roughlab/lab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "roughlab/errors.hpp"

namespace roughlab::lab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_trajectory_csv(const std::filesystem::path& path, const SpaceTimeField& u, std::size_t level_stride) {
  const std::size_t stride = std::max<std::size_t>(1, level_stride);
  std::string out = "t,x,u\n";
  const Grid& g = u.grid();
  for (std::size_t m = 0; m < u.levels(); ++m) {
    if (m % stride != 0 && m + 1 != u.levels()) continue;
    const std::string t = format_double(u.time(m));
    const auto lev = u.level(m);
    for (std::size_t i = 0; i < g.size(); ++i) {
      out += t;
      out += ',';
      out += format_double(g.node(static_cast<std::ptrdiff_t>(i)));
      out += ',';
      out += format_double(lev[i]);
      out += '\n';
    }
  }
  write_text(path, out);
}

void write_deviation_csv(const std::filesystem::path& path, const DeviationProfile& profile) {
  std::string out = "r,z,D,mode\n";
  const std::string mode = to_string(profile.mode);
  for (std::size_t r = 0; r < profile.radii.size(); ++r) {
    for (std::size_t c = 0; c < profile.centers.size(); ++c) {
      out += format_double(profile.radii[r]) + "," + format_double(profile.centers[c].first) + "|" +
             format_double(profile.centers[c].second) + "," + format_double(profile.per_center[r][c]) + "," + mode +
             "\n";
    }
  }
  write_text(path, out);
}

SpaceTimeField read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read trajectory " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,x,u") throw ConfigError(path.string() + ": expected header t,x,u");
  std::vector<double> times, xs, values;
  std::vector<double> first_xs;
  double current_t = std::nan("");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double t = 0.0, x = 0.0, v = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &v) != 3) {
      throw ConfigError(path.string() + ":" + std::to_string(row) + ": malformed row");
    }
    if (times.empty() || t != current_t) {
      if (!times.empty() && xs.size() != first_xs.size() && !first_xs.empty()) {
        throw ConfigError(path.string() + ": levels have different node counts");
      }
      if (times.size() == 1) first_xs = xs;
      times.push_back(t);
      current_t = t;
      xs.clear();
    }
    xs.push_back(x);
    values.push_back(v);
  }
  if (times.empty()) throw ConfigError(path.string() + ": no data rows");
  if (first_xs.empty()) first_xs = xs;
  const std::size_t nodes = first_xs.size();
  if (nodes < 9 || values.size() != nodes * times.size()) throw ConfigError(path.string() + ": ragged trajectory");
  Grid g;
  g.half_width = -first_xs.front();
  g.n_points = nodes - 1;
  g.t0 = times.front();
  g.t_end = times.size() > 1 ? times.back() : times.front() + 1.0;
  if (std::fabs(first_xs.back() - g.half_width) > 1e-9 * g.half_width) {
    throw ConfigError(path.string() + ": grid is not symmetric");
  }
  return SpaceTimeField(g, std::move(times), std::move(values), ExteriorData::zero());
}

}  // namespace roughlab::lab
