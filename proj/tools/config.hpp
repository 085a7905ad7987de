#pragma once

// Flat key = value run configuration. Keys carry a section prefix
// (mediator.u, lattice.n); '#' starts a comment. Every subcommand declares
// the keys it accepts, and anything else is rejected by name.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lqc/errors.hpp"

namespace lqc::cli {

struct KeySpec {
  std::string key;
  std::string default_value;
  std::string help;
};

inline std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Flag spelling of a key: the part after the section prefix, '_' -> '-'.
inline std::string flag_name(const std::string &key) {
  auto s = key.substr(key.find('.') + 1);
  for (char &c : s)
    if (c == '_')
      c = '-';
  return s;
}

class Settings {
public:
  explicit Settings(std::vector<KeySpec> keys) : keys_(std::move(keys)) {
    for (const auto &k : keys_)
      values_[k.key] = k.default_value;
  }

  const std::vector<KeySpec> &keys() const noexcept { return keys_; }
  const std::map<std::string, std::string> &values() const noexcept { return values_; }

  bool known(const std::string &key) const { return values_.count(key) > 0; }

  void set(const std::string &key, const std::string &value) {
    if (!known(key))
      throw DomainError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  void load_file(const std::string &path) {
    std::ifstream is(path);
    if (!is)
      throw DomainError("cannot open config file " + path);
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      line = trim(line);
      if (line.empty())
        continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw DomainError(path + ":" + std::to_string(lineno) + ": expected key = value");
      const auto key = trim(line.substr(0, eq));
      if (!known(key))
        throw DomainError(path + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
      values_[key] = trim(line.substr(eq + 1));
    }
  }

  const std::string &str(const std::string &key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw DomainError("setting '" + key + "' is not declared");
    return it->second;
  }

  double real(const std::string &key) const { return parse_real(key, str(key)); }

  long integer(const std::string &key) const {
    const auto &s = str(key);
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw DomainError("setting '" + key + "' must be an integer, got '" + s + "'");
    return v;
  }

  std::size_t count(const std::string &key) const {
    const long v = integer(key);
    if (v < 0)
      throw DomainError("setting '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string &key) const {
    const auto &s = str(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on")
      return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
      return false;
    throw DomainError("setting '" + key + "' must be a boolean, got '" + s + "'");
  }

  /// "a:b:step" (inclusive) or a comma-separated list.
  std::vector<double> reals(const std::string &key) const { return parse_list(key, str(key)); }

  std::vector<int> ints(const std::string &key) const {
    std::vector<int> out;
    for (double v : reals(key)) {
      if (v != static_cast<double>(static_cast<int>(v)))
        throw DomainError("setting '" + key + "' must hold integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  static double parse_real(const std::string &key, const std::string &s) {
    std::istringstream is(s);
    double v = 0.0;
    is >> v;
    if (!is || !is.eof())
      throw DomainError("setting '" + key + "' must be a number, got '" + s + "'");
    return v;
  }

  static std::vector<double> parse_list(const std::string &key, const std::string &s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(s);
      for (std::string item; std::getline(ss, item, ':');)
        parts.push_back(parse_real(key, trim(item)));
      if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw DomainError("setting '" + key + "' range must be start:stop:step with step > 0");
      const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      for (long i = 0; i <= steps; ++i)
        out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    } else {
      std::stringstream ss(s);
      for (std::string item; std::getline(ss, item, ',');)
        if (!trim(item).empty())
          out.push_back(parse_real(key, trim(item)));
    }
    if (out.empty())
      throw DomainError("setting '" + key + "' is an empty list");
    return out;
  }

private:
  std::vector<KeySpec> keys_;
  std::map<std::string, std::string> values_;
};

} // namespace lqc::cli
