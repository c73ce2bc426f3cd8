#pragma once

// Flat `key = value` configuration text with optional [section] headers.
// Keys are addressed as "section.key"; keys before any header have no prefix.
// '#' and ';' start comments.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mg/error.hpp"

namespace mg {

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& is, const std::string& origin = "<config>") {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          throw ParseError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        }
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    const std::string v = it == values_.end() ? fallback : it->second;
    resolved_[key] = v;
    return v;
  }

  std::string require_string(const std::string& key) const {
    if (!has(key)) throw ParseError("config: missing required key '" + key + "'");
    return get_string(key, "");
  }

  double get_double(const std::string& key, double fallback) const {
    if (!has(key)) {
      resolved_[key] = format_double(fallback);
      return fallback;
    }
    const std::string v = get_string(key, "");
    return to_double(key, v);
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) {
      resolved_[key] = std::to_string(fallback);
      return fallback;
    }
    const std::string v = get_string(key, "");
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ParseError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) {
      resolved_[key] = fallback ? "true" : "false";
      return fallback;
    }
    std::string v = get_string(key, "");
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ParseError("config: key '" + key + "' expects a boolean, got '" + v + "'");
  }

  /// Comma-separated list of reals.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) {
      std::string joined;
      for (std::size_t i = 0; i < fallback.size(); ++i) {
        if (i) joined += ",";
        joined += format_double(fallback[i]);
      }
      resolved_[key] = joined;
      return fallback;
    }
    const std::string v = get_string(key, "");
    std::vector<double> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ParseError("config: key '" + key + "' is an empty list");
    return out;
  }

  /// Keys present in the text that no getter has asked for.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (!resolved_.count(k)) out.push_back(k);
    }
    return out;
  }

  /// Every key read so far with the value in effect (defaults included),
  /// grouped by section, in the same text format.
  std::string resolved_text() const {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_section;
    for (const auto& [k, v] : resolved_) {
      const auto dot = k.find('.');
      if (dot == std::string::npos) {
        by_section[""].push_back({k, v});
      } else {
        by_section[k.substr(0, dot)].push_back({k.substr(dot + 1), v});
      }
    }
    std::ostringstream os;
    for (const auto& [sec, kvs] : by_section) {
      if (!sec.empty()) os << "[" << sec << "]\n";
      for (const auto& [k, v] : kvs) os << k << " = " << v << "\n";
    }
    return os.str();
  }

  static std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::logic_error&) {
      throw ParseError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
  }

  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace mg
