#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "detlab/decomposition_lab.hpp"
#include "detlab/errors.hpp"

namespace detlab::config {

/// Raw `key = value` pairs; later assignments override earlier ones.
using RawConfig = std::map<std::string, std::string>;

inline std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

/// Parses one `key = value` assignment (also used for --set).
inline std::pair<std::string, std::string> parse_assignment(const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key = value: " + line);
  auto key = trim(line.substr(0, eq));
  auto value = trim(line.substr(eq + 1));
  if (key.empty()) throw ConfigError("empty key: " + line);
  return {key, value};
}

inline RawConfig parse_text(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      auto [k, v] = parse_assignment(line);
      raw[k] = v;
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return raw;
}

inline RawConfig parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str());
}

/// A real number, optionally with pi: `1.5`, `pi`, `pi/2`, `2*pi/3`, `-pi/4`.
inline double parse_number(std::string s) {
  s = trim(s);
  if (s.empty()) throw ConfigError("empty number");
  double sign = 1.0;
  if (s[0] == '-') {
    sign = -1.0;
    s = trim(s.substr(1));
  } else if (s[0] == '+') {
    s = trim(s.substr(1));
  }
  auto plain = [](const std::string& t) {
    double v = 0.0;
    const auto tt = trim(t);
    const auto* end = tt.data() + tt.size();
    const auto r = std::from_chars(tt.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) throw ConfigError("not a number: " + tt);
    return v;
  };
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string::npos) return sign * plain(s);
  double factor = 1.0;
  const auto head = trim(s.substr(0, pi_pos));
  if (!head.empty()) {
    if (head.back() != '*') throw ConfigError("bad pi expression: " + s);
    factor = plain(head.substr(0, head.size() - 1));
  }
  auto tail = trim(s.substr(pi_pos + 2));
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail[0] != '/') throw ConfigError("bad pi expression: " + s);
    divisor = plain(tail.substr(1));
  }
  return sign * factor * std::numbers::pi / divisor;
}

/// Splits on commas that are not nested in () or [].
inline std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

/// `name(args)` -> (name, args); plain values give (value, "").
inline std::pair<std::string, std::string> parse_call(const std::string& s) {
  const auto open = s.find('(');
  if (open == std::string::npos) return {trim(s), ""};
  if (s.back() != ')') throw ConfigError("unbalanced parentheses: " + s);
  return {trim(s.substr(0, open)), s.substr(open + 1, s.size() - open - 2)};
}

/// Phase decaying geometrically: c, c r, c r^2, ... (n terms).
inline std::vector<double> geometric_phases(double c, double r, std::size_t n) {
  std::vector<double> out;
  double v = c;
  for (std::size_t i = 0; i < n; ++i, v *= r) out.push_back(v);
  return out;
}

/// List of numbers: `1, 2, 4`, `[1, 2]`, or `geometric(c, r, n)`.
inline std::vector<double> parse_list(std::string s) {
  s = trim(s);
  if (s.empty() || s == "[]") return {};
  const auto [name, args] = parse_call(s);
  if (name == "geometric") {
    const auto a = split_top(args);
    if (a.size() != 3) throw ConfigError("geometric(c, r, n) takes three arguments");
    const double n = parse_number(a[2]);
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("geometric: n must be a positive integer");
    return geometric_phases(parse_number(a[0]), parse_number(a[1]), static_cast<std::size_t>(n));
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw ConfigError("unbalanced brackets: " + s);
    s = s.substr(1, s.size() - 2);
  }
  std::vector<double> out;
  for (const auto& item : split_top(s)) out.push_back(parse_number(item));
  return out;
}

inline std::size_t parse_count(const std::string& s, const std::string& key) {
  const double v = parse_number(s);
  if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(key + " must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& s) {
  const auto t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("not a boolean: " + s);
}

/// `arithmetic(a, d[, m])`, `explicit(mu1, mu2, ...)` or `explicit([mu1, ...])`.
inline TangentialSpectrum parse_spectrum(const std::string& s) {
  const auto [name, args] = parse_call(trim(s));
  const auto a = split_top(args);
  if (name == "arithmetic") {
    if (a.size() < 2 || a.size() > 3) throw ConfigError("arithmetic(a, d[, multiplicity])");
    const int m = a.size() == 3 ? static_cast<int>(parse_count(a[2], "multiplicity")) : 1;
    return TangentialSpectrum::arithmetic(parse_number(a[0]), parse_number(a[1]), m);
  }
  if (name == "explicit") {
    const auto mus = parse_list(args);
    if (mus.empty()) throw ConfigError("explicit() needs at least one value");
    return TangentialSpectrum::explicit_values(mus);
  }
  throw ConfigError("unknown spectrum: " + s);
}

/// `aps_pos`, `aps_neg`, `dirichlet`, `neumann`, `chiral_plus`, `chiral_minus`,
/// `sigma(angles...)`, `rotated(aps_pos|aps_neg, theta=[...])`.
inline BoundaryProjection parse_projection(const std::string& s) {
  const auto [name, args] = parse_call(trim(s));
  if (name == "aps_pos") return BoundaryProjection::aps_pos();
  if (name == "aps_neg") return BoundaryProjection::aps_neg();
  if (name == "dirichlet") return BoundaryProjection::dirichlet();
  if (name == "neumann") return BoundaryProjection::neumann();
  if (name == "chiral_plus") return BoundaryProjection::chiral_plus();
  if (name == "chiral_minus") return BoundaryProjection::chiral_minus();
  if (name == "sigma") return BoundaryProjection::sigma(parse_list(args));
  if (name == "rotated") {
    const auto a = split_top(args);
    if (a.size() != 2) throw ConfigError("rotated(base, theta=[...])");
    const auto base = trim(a[0]);
    ProjectionKind kind;
    if (base == "aps_pos") kind = ProjectionKind::APSpos;
    else if (base == "aps_neg") kind = ProjectionKind::APSneg;
    else throw ConfigError("rotated: unknown base " + base);
    auto th = trim(a[1]);
    if (th.rfind("theta", 0) == 0) th = trim(parse_assignment(th).second);
    return BoundaryProjection::rotated(kind, parse_list(th));
  }
  throw ConfigError("unknown projection: " + s);
}

/// Every recognised key, with a one-line description.
inline const std::map<std::string, std::string>& known_keys() {
  static const std::map<std::string, std::string> keys{
      {"spectrum", "tangential spectrum: arithmetic(a, d[, m]) or explicit([mu, ...])"},
      {"R_grid", "increasing list of half-lengths R"},
      {"mode_cutoff", "modes solved individually (>= 4)"},
      {"t0", "split point of the Mellin integral"},
      {"theta", "phases of the variation experiment"},
      {"p1", "projection P1 of the mixed gluing experiment"},
      {"p2", "projection P2 of the mixed gluing experiment"},
      {"sw_phases", "phases of the Grassmannian point in sw_check"},
      {"sigma1", "sigma data of P1 in r_independence"},
      {"sigma2", "sigma data of P2 in r_independence"},
      {"eta_modes", "lowest modes solved in the eta experiments"},
      {"eta_roots", "roots of each sign in the eta offset fit"},
      {"decay_t", "time of the gluing error experiment"},
      {"decay_R_grid", "R grid of the gluing error experiment"},
      {"parallel", "run R rows concurrently"},
      {"experiments", "default experiment selection"},
      {"kernel_dim", "dimension of ker B (must be 0 for determinant experiments)"},
      {"tol.ratio_rel", "relative tolerance of the D/N split ratios"},
      {"tol.chiral_abs", "tolerance of the chiral ratio"},
      {"tol.aps_limit_rel", "relative tolerance of the APS limit at the largest R"},
      {"tol.eta_abs", "tolerance of the eta sum"},
      {"tol.eta_shift_abs", "tolerance of eta shifts and gluing"},
      {"tol.sw_rel", "relative tolerance of the SW check"},
      {"tol.r_independence_rel", "relative tolerance of R-independence"},
      {"tol.block_abs", "tolerance of the boundary block comparison"},
  };
  return keys;
}

struct RunConfig {
  ExperimentConfig experiment;
  std::vector<std::string> selection;
};

inline RunConfig build(const RawConfig& raw) {
  RunConfig rc;
  auto& c = rc.experiment;
  c.theta = geometric_phases(std::exp(-1.0), std::exp(-1.0), 30);
  std::size_t kernel_dim = 0;
  for (const auto& [key, value] : raw) {
    if (!known_keys().count(key)) throw ConfigError("unknown key: " + key);
    try {
      if (key == "spectrum") c.spectrum = parse_spectrum(value);
      else if (key == "R_grid") c.R_grid = parse_list(value);
      else if (key == "mode_cutoff") c.mode_cutoff = parse_count(value, key);
      else if (key == "t0") c.t0 = parse_number(value);
      else if (key == "theta") c.theta = parse_list(value);
      else if (key == "p1") c.p1 = parse_projection(value);
      else if (key == "p2") c.p2 = parse_projection(value);
      else if (key == "sw_phases") c.sw_phases = parse_list(value);
      else if (key == "sigma1") c.sigma1 = parse_list(value);
      else if (key == "sigma2") c.sigma2 = parse_list(value);
      else if (key == "eta_modes") c.eta_modes = parse_count(value, key);
      else if (key == "eta_roots") c.eta_roots = parse_count(value, key);
      else if (key == "decay_t") c.decay_t = parse_number(value);
      else if (key == "decay_R_grid") c.decay_R_grid = parse_list(value);
      else if (key == "parallel") c.parallel = parse_bool(value);
      else if (key == "kernel_dim") kernel_dim = parse_count(value, key);
      else if (key == "experiments") {
        for (const auto& n : split_top(value))
          if (!n.empty()) rc.selection.push_back(n);
      }
      else if (key == "tol.ratio_rel") c.tol.ratio_rel = parse_number(value);
      else if (key == "tol.chiral_abs") c.tol.chiral_abs = parse_number(value);
      else if (key == "tol.aps_limit_rel") c.tol.aps_limit_rel = parse_number(value);
      else if (key == "tol.eta_abs") c.tol.eta_abs = parse_number(value);
      else if (key == "tol.eta_shift_abs") c.tol.eta_shift_abs = parse_number(value);
      else if (key == "tol.sw_rel") c.tol.sw_rel = parse_number(value);
      else if (key == "tol.r_independence_rel") c.tol.r_independence_rel = parse_number(value);
      else if (key == "tol.block_abs") c.tol.block_abs = parse_number(value);
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  if (kernel_dim > 0) c.spectrum = c.spectrum.with_kernel_dimension(static_cast<int>(kernel_dim));
  c.validate();
  if (!c.p1.is_grassmannian() || !c.p2.is_grassmannian())
    throw ConfigError("p1 and p2 must be Grassmannian projections");
  return rc;
}

}  // namespace detlab::config
