#include "roughlab/lab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "roughlab/errors.hpp"
#include "roughlab/lab/io.hpp"

namespace roughlab::lab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '.';
    if (!ok) return false;
  }
  return true;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("key '" + key + "': '" + value + "' is not a number");
  return out;
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (cfg.entries_.count(key) != 0) throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
  entries_[key] = value;
}

const std::string* Config::find(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void Config::note_default(const std::string& key, const std::string& value) const { defaults_[key] = value; }

std::string Config::text(const std::string& key) const {
  const auto* v = find(key);
  if (v == nullptr) throw ConfigError("missing required key '" + key + "'");
  return *v;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  if (v != nullptr) return *v;
  note_default(key, fallback);
  return fallback;
}

double Config::number(const std::string& key) const { return parse_double(key, text(key)); }

double Config::number(const std::string& key, double fallback) const {
  const auto* v = find(key);
  if (v != nullptr) return parse_double(key, *v);
  note_default(key, format_double(fallback));
  return fallback;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
  const auto* v = find(key);
  if (v == nullptr) {
    note_default(key, std::to_string(fallback));
    return fallback;
  }
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("key '" + key + "': '" + *v + "' is not an integer");
  }
  return out;
}

std::uint64_t Config::seed(const std::string& key, std::uint64_t fallback) const {
  const auto* v = find(key);
  if (v == nullptr) {
    note_default(key, std::to_string(fallback));
    return fallback;
  }
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("key '" + key + "': '" + *v + "' is not a 64-bit unsigned seed");
  }
  return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto* v = find(key);
  if (v == nullptr) {
    note_default(key, fallback ? "true" : "false");
    return fallback;
  }
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("key '" + key + "': '" + *v + "' is not a boolean");
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const auto* v = find(key);
  if (v == nullptr) {
    std::string joined;
    for (std::size_t k = 0; k < fallback.size(); ++k) joined += (k ? "," : "") + format_double(fallback[k]);
    note_default(key, joined);
    return fallback;
  }
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= v->size()) {
    const auto comma = v->find(',', pos);
    const std::string item = trim(std::string_view(*v).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (item.empty()) throw ConfigError("key '" + key + "': empty list item");
    out.push_back(parse_double(key, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::map<std::string, std::string> Config::resolved() const {
  std::map<std::string, std::string> out = defaults_;
  for (const auto& [k, v] : entries_) out[k] = v;
  return out;
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (used_.count(k) == 0) out.push_back(k);
  }
  return out;
}

void Config::require_all_used() const {
  const auto extra = unused();
  if (!extra.empty()) throw ConfigError(origin_ + ": unknown key '" + extra.front() + "'");
}

std::string Config::render() const {
  std::string out;
  for (const auto& [k, v] : resolved()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace roughlab::lab
