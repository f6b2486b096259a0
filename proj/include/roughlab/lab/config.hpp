#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace roughlab::lab {

/// Flat `key = value` configuration: one key per line, dotted namespaces,
/// '#' starts a comment. Lookups with a fallback record the value used, so
/// the resolved configuration can be embedded in reports.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  /// Every entry plus every fallback that was consulted.
  std::map<std::string, std::string> resolved() const;
  /// Keys present in the file that no lookup consumed.
  std::vector<std::string> unused() const;
  /// Throws ConfigError naming the first unconsumed key.
  void require_all_used() const;

  std::string render() const;
  const std::string& origin() const noexcept { return origin_; }

 private:
  const std::string* find(const std::string& key) const;
  void note_default(const std::string& key, const std::string& value) const;

  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> used_;
  mutable std::map<std::string, std::string> defaults_;
  std::string origin_;
};

}  // namespace roughlab::lab
