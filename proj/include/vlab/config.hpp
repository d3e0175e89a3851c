#pragma once

// Experiment configuration: INI text (sections, key = value, ';' or '#'
// comments) read through Boost.PropertyTree. Every key is looked up with a
// default; keys nobody asked for are reported by check_consumed().

#include "vlab/errors.hpp"
#include "vlab/flow.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace vlab {

class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text) {
    std::istringstream in(text);
    Config c;
    try {
      boost::property_tree::ini_parser::read_ini(in, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    Config c;
    try {
      boost::property_tree::ini_parser::read_ini(path, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    return c;
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  std::string get_string(const std::string& key, const std::string& def) const {
    used_.insert(key);
    return tree_.get<std::string>(key, def);
  }

  double get_double(const std::string& key, double def) const {
    if (!has(key)) {
      used_.insert(key);
      return def;
    }
    const std::string s = get_string(key, "");
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
    }
  }

  int get_int(const std::string& key, int def) const {
    const double v = get_double(key, def);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
      throw ConfigError("key '" + key + "': expected an integer");
    }
    return static_cast<int>(v);
  }

  bool get_bool(const std::string& key, bool def) const {
    if (!has(key)) {
      used_.insert(key);
      return def;
    }
    const std::string s = get_string(key, "");
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + s + "'");
  }

  /// Comma-separated numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const {
    if (!has(key)) {
      used_.insert(key);
      return def;
    }
    const std::string s = get_string(key, "");
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t pos = 0;
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw std::invalid_argument(item);
        const std::string t = item.substr(first, last - first + 1);
        out.push_back(std::stod(t, &pos));
        if (pos != t.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': bad list entry '" + item + "'");
      }
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
  }

  void set(const std::string& key, const std::string& value) { tree_.put(key, value); }

  /// Throws ConfigError naming the first key that was never read.
  void check_consumed() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) {
        if (!used_.count(section)) throw ConfigError("unknown config key '" + section + "'");
        continue;
      }
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ConfigError("unknown config key '" + full + "'");
      }
    }
  }

  /// Every key/value pair, for the report manifest.
  std::map<std::string, std::string> entries() const {
    std::map<std::string, std::string> out;
    for (const auto& [section, body] : tree_) {
      if (body.empty()) out[section] = body.data();
      for (const auto& [key, value] : body) out[section + "." + key] = value.data();
    }
    return out;
  }

 private:
  boost::property_tree::ptree tree_;
  mutable std::set<std::string> used_;
};

/// Resolution "NR,NT".
struct Resolution {
  int radial = 16;
  int angular = 64;
};

inline Resolution parse_resolution(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("resolution must be NR,NT, got '" + s + "'");
  try {
    Resolution r{std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
    if (r.radial < 4 || r.angular < 8 || r.angular % 2 != 0 || r.radial > 40 || r.angular > 160) {
      throw ConfigError("resolution out of range (4 <= NR <= 40, 8 <= NT <= 160, NT even): '" + s + "'");
    }
    return r;
  } catch (const std::invalid_argument&) {
    throw ConfigError("resolution must be NR,NT, got '" + s + "'");
  }
}

inline Resolution get_resolution(const Config& c, const std::string& key, Resolution def) {
  if (!c.has(key)) {
    c.get_string(key, "");
    return def;
  }
  return parse_resolution(c.get_string(key, ""));
}

/// Named analytic viscosity families:
///   constant     mu = value
///   quadratic    mu = 1 + a x^2
///   exponential  mu = exp(k x)
///   bump         mu = 1 + c (1 - |z|^2)^2
///   gaussian     mu = 1 + c exp(-|z - (x0, y0)|^2 / w)
struct ViscositySpec {
  std::string family = "constant";
  double value = 1.0, a = 1.0, k = 2.0, c = 0.3, x0 = 0.0, y0 = 0.0, w = 0.1;

  double operator()(double x, double y) const {
    if (family == "constant") return value;
    if (family == "quadratic") return 1.0 + a * x * x;
    if (family == "exponential") return std::exp(k * x);
    if (family == "bump") {
      const double s = 1.0 - x * x - y * y;
      return 1.0 + c * s * s;
    }
    if (family == "gaussian") {
      return 1.0 + c * std::exp(-((x - x0) * (x - x0) + (y - y0) * (y - y0)) / w);
    }
    throw ConfigError("unknown viscosity family '" + family + "'");
  }

  std::string tag() const {
    std::ostringstream s;
    s << family;
    if (family == "constant") s << "(" << value << ")";
    if (family == "quadratic") s << "(a=" << a << ")";
    if (family == "exponential") s << "(k=" << k << ")";
    if (family == "bump") s << "(c=" << c << ")";
    if (family == "gaussian") s << "(c=" << c << ",x0=" << x0 << ",y0=" << y0 << ",w=" << w << ")";
    return s.str();
  }

  ViscosityField sample(const Domain& d) const {
    return ViscosityField::sample(d, [this](double x, double y) { return (*this)(x, y); });
  }
};

/// Reads [section] family/value/a/k/c/x0/y0/w and validates positivity on a
/// sample grid.
inline ViscositySpec get_viscosity(const Config& cfg, const std::string& section,
                                   const ViscositySpec& def) {
  ViscositySpec v = def;
  v.family = cfg.get_string(section + ".family", def.family);
  v.value = cfg.get_double(section + ".value", def.value);
  v.a = cfg.get_double(section + ".a", def.a);
  v.k = cfg.get_double(section + ".k", def.k);
  v.c = cfg.get_double(section + ".c", def.c);
  v.x0 = cfg.get_double(section + ".x0", def.x0);
  v.y0 = cfg.get_double(section + ".y0", def.y0);
  v.w = cfg.get_double(section + ".w", def.w);
  static const std::set<std::string> known{"constant", "quadratic", "exponential", "bump", "gaussian"};
  if (!known.count(v.family)) throw ConfigError("key '" + section + ".family': unknown family '" + v.family + "'");
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double x = -1.0 + 0.1 * i, y = -1.0 + 0.1 * j;
      if (x * x + y * y > 1.0) continue;
      const double m = v(x, y);
      if (!(m > 0.0) || !std::isfinite(m)) {
        throw ConfigError("section [" + section + "]: viscosity is not positive on the disk");
      }
    }
  }
  return v;
}

}  // namespace vlab
