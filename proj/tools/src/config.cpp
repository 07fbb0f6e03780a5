#include "colprune/experiments/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <colprune/errors.hpp>

namespace colprune::experiments {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
  return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
  });
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "': '" + text + "' is not a number");
  }
  if (pos != text.size()) throw InvalidArgument("config key '" + key + "': trailing characters in '" + text + "'");
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": bad key '" + key + "'");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void KeyValueConfig::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidArgument("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw InvalidArgument("bad config key '" + key + "'");
  values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) != 0; }

void KeyValueConfig::record(const std::string& key, const std::string& value) const { used_[key] = value; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  const std::string v = it == values_.end() ? fallback : it->second;
  record(key, v);
  return v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  const double v = it == values_.end() ? fallback : parse_double(key, it->second);
  record(key, format_double(v));
  return v;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  long v = fallback;
  if (it != values_.end()) {
    const std::string& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw InvalidArgument("config key '" + key + "': '" + s + "' is not an integer");
    }
  }
  record(key, std::to_string(v));
  return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  std::uint64_t v = fallback;
  if (it != values_.end()) {
    const std::string& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw InvalidArgument("config key '" + key + "': '" + s + "' is not an unsigned integer");
    }
  }
  record(key, std::to_string(v));
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  bool v = fallback;
  if (it != values_.end()) {
    const std::string& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
      v = true;
    } else if (s == "false" || s == "0" || s == "no" || s == "off") {
      v = false;
    } else {
      throw InvalidArgument("config key '" + key + "': '" + s + "' is not a boolean");
    }
  }
  record(key, v ? "true" : "false");
  return v;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  std::vector<double> out = fallback;
  if (it != values_.end()) {
    out.clear();
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_double(key, item));
    }
  }
  std::string echo;
  for (std::size_t i = 0; i < out.size(); ++i) echo += (i ? "," : "") + format_double(out[i]);
  record(key, echo);
  return out;
}

std::vector<std::string> KeyValueConfig::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

nlohmann::json KeyValueConfig::effective() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : used_) j[k] = v;
  return j;
}

}  // namespace colprune::experiments
