#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace colprune::experiments {

/// Flat key = value configuration.
///
/// File format: one `key = value` per line, `#` starts a comment, blank lines
/// are ignored, keys are [a-z0-9_.]+. Later assignments override earlier ones,
/// so applying the file and then command-line overrides gives
/// flags > file > defaults. Every lookup is recorded so unused keys can be
/// reported and the effective configuration echoed into the manifest.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  /// Applies `key=value`.
  void assign(const std::string& assignment);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  /// Keys present in the config but never read.
  std::vector<std::string> unused() const;
  /// Every key that was read, with the value in effect (defaults included).
  nlohmann::json effective() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  void record(const std::string& key, const std::string& value) const;

  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> used_;
};

}  // namespace colprune::experiments
