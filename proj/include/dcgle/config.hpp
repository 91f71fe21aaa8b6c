#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcgle/params.hpp"
#include "dcgle/parallel.hpp"

namespace dcgle {

/// A grid axis given either as min/max/count or as an explicit list. Unset parts fall back
/// to the scenario's defaults.
struct AxisSpec {
  std::optional<double> min;
  std::optional<double> max;
  std::optional<std::size_t> count;
  std::optional<std::vector<double>> values;

  bool set() const noexcept { return min || max || count || values; }
  bool explicit_list() const noexcept { return values.has_value(); }

  std::vector<double> resolve(double dmin, double dmax, std::size_t dcount) const {
    if (values) return *values;
    return linspace(min.value_or(dmin), max.value_or(dmax), count.value_or(dcount));
  }

  bool operator==(const AxisSpec&) const = default;
};

struct ScanConfig {
  double q = 0.0;
  std::optional<std::string> branch;  ///< "plus", "minus" or "physical"
  std::size_t stride = 1;
  std::map<std::string, AxisSpec> axes;  ///< omega, delta, eta, theta, xi, k, wavenumber

  const AxisSpec& axis(const std::string& name) const {
    static const AxisSpec empty;
    auto it = axes.find(name);
    return it == axes.end() ? empty : it->second;
  }

  bool operator==(const ScanConfig&) const = default;
};

struct SimulationConfig {
  std::size_t n_points = 500;
  double length = 32.0 * std::numbers::pi;
  double rtol = 1e-6;
  double atol = 1e-9;
  double t_end = 1000.0;
  double snapshot_every = 2.0;
  double observe_every = 1.0;
  std::string perturbation = "modal";  ///< none, modal or noise
  std::optional<double> perturbation_k;  ///< default: first sideband 2 pi / length
  double perturbation_relative = 1e-3;   ///< amplitude as a fraction of a0
  std::uint64_t seed = 1;
  std::optional<double> start_omega;
  std::optional<double> start_a0;
  std::optional<double> estimate_window;  ///< default: one delay interval

  bool operator==(const SimulationConfig&) const = default;
};

struct ScenarioConfig {
  std::string scenario;
  std::string output = "out";
  bool plots = true;
  ModelParams model;
  ScanConfig scan;
  SimulationConfig simulation;

  bool operator==(const ScenarioConfig&) const = default;
};

inline constexpr std::string_view scenario_names[] = {
    "hopf-curves",   "trivial-dispersion", "trivial-regions", "pw-roots",
    "pw-branch",     "pw-stability-finite", "pw-strong-map",  "pw-weak-map",
    "pw-class-map",  "simulate"};

inline bool known_scenario(std::string_view s) {
  for (auto n : scenario_names)
    if (n == s) return true;
  return false;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view v, int line, const std::string& key) {
  v = trim(v);
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ParseError(line, "'" + key + "' expects a decimal number, got '" + std::string(v) + "'");
  return out;
}

inline std::size_t parse_count(std::string_view v, int line, const std::string& key) {
  const double d = parse_real(v, line, key);
  if (d < 0.0 || d != std::floor(d) || d > 1e12)
    throw RangeError(key, "must be a nonnegative integer");
  return static_cast<std::size_t>(d);
}

inline std::vector<double> parse_list(std::string_view v, int line, const std::string& key) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto item = v.substr(start, comma == std::string_view::npos ? v.npos : comma - start);
    out.push_back(parse_real(item, line, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_flag(std::string_view v, int line, const std::string& key) {
  v = trim(v);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ParseError(line, "'" + key + "' expects 0 or 1");
}

inline constexpr std::string_view axis_names[] = {"omega", "delta", "eta",       "theta",
                                                  "xi",    "k",     "wavenumber"};

}  // namespace detail

/// Validates cross-field invariants; throws RangeError naming the key.
inline void validate(const ScenarioConfig& c) {
  c.model.validate();
  if (!c.scenario.empty() && !known_scenario(c.scenario))
    throw RangeError("scenario", "unknown scenario '" + c.scenario + "'");
  if (c.scan.branch && *c.scan.branch != "plus" && *c.scan.branch != "minus" &&
      *c.scan.branch != "physical")
    throw RangeError("branch", "must be plus, minus or physical");
  if (c.scan.stride == 0) throw RangeError("stride", "must be >= 1");
  for (const auto& [name, ax] : c.scan.axes) {
    if (ax.count && *ax.count == 0) throw RangeError(name + "_count", "must be >= 1");
    if (ax.values && ax.values->empty()) throw RangeError(name + "_values", "must not be empty");
  }
  const auto& s = c.simulation;
  if (s.n_points < 16) throw RangeError("n_points", "must be >= 16");
  if (!(s.length > 0.0)) throw RangeError("length", "must be > 0");
  if (!(s.rtol > 0.0)) throw RangeError("rtol", "must be > 0");
  if (!(s.atol > 0.0)) throw RangeError("atol", "must be > 0");
  if (!(s.t_end > 0.0)) throw RangeError("t_end", "must be > 0");
  if (s.snapshot_every < 0.0) throw RangeError("snapshot_every", "must be >= 0");
  if (s.observe_every < 0.0) throw RangeError("observe_every", "must be >= 0");
  if (s.perturbation != "none" && s.perturbation != "modal" && s.perturbation != "noise")
    throw RangeError("perturbation", "must be none, modal or noise");
  if (s.perturbation_relative < 0.0) throw RangeError("perturbation_relative", "must be >= 0");
  if (s.estimate_window && !(*s.estimate_window > 0.0))
    throw RangeError("estimate_window", "must be > 0");
}

/// Parses the sectioned key = value format. Keys before the first section header belong to
/// the run itself (scenario, output, plots).
inline ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig c;
  std::string section;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "scan" && section != "simulation")
        throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    const std::string qualified = section + "." + key;
    if (seen.count(qualified))
      throw ParseError(line_no, "duplicate key '" + key + "' (first on line " +
                                    std::to_string(seen[qualified]) + ")");
    seen[qualified] = line_no;

    auto real = [&] { return detail::parse_real(val, line_no, key); };
    if (section.empty()) {
      if (key == "scenario") c.scenario = std::string(val);
      else if (key == "output") c.output = std::string(val);
      else if (key == "plots") c.plots = detail::parse_flag(val, line_no, key);
      else throw UnknownKey(key);
    } else if (section == "model") {
      auto& m = c.model;
      if (key == "beta") m.beta = real();
      else if (key == "delta") m.delta = real();
      else if (key == "epsilon") m.epsilon = real();
      else if (key == "mu") m.mu = real();
      else if (key == "nu") m.nu = real();
      else if (key == "eta") m.eta = real();
      else if (key == "phi") m.phi = real();
      else if (key == "tau") m.tau = real();
      else throw UnknownKey(key);
    } else if (section == "scan") {
      auto& s = c.scan;
      if (key == "q") {
        s.q = real();
        continue;
      }
      if (key == "branch") {
        s.branch = std::string(val);
        continue;
      }
      if (key == "stride") {
        s.stride = detail::parse_count(val, line_no, key);
        continue;
      }
      bool matched = false;
      for (auto name : detail::axis_names) {
        const std::string n(name);
        if (key.rfind(n + "_", 0) != 0) continue;
        const std::string suffix = key.substr(n.size() + 1);
        auto& ax = s.axes[n];
        if (suffix == "min") ax.min = real();
        else if (suffix == "max") ax.max = real();
        else if (suffix == "count") ax.count = detail::parse_count(val, line_no, key);
        else if (suffix == "values") ax.values = detail::parse_list(val, line_no, key);
        else continue;
        matched = true;
        break;
      }
      if (!matched) throw UnknownKey(key);
    } else {
      auto& s = c.simulation;
      if (key == "n_points") s.n_points = detail::parse_count(val, line_no, key);
      else if (key == "length") s.length = real();
      else if (key == "rtol") s.rtol = real();
      else if (key == "atol") s.atol = real();
      else if (key == "t_end") s.t_end = real();
      else if (key == "snapshot_every") s.snapshot_every = real();
      else if (key == "observe_every") s.observe_every = real();
      else if (key == "perturbation") s.perturbation = std::string(val);
      else if (key == "perturbation_k") s.perturbation_k = real();
      else if (key == "perturbation_relative") s.perturbation_relative = real();
      else if (key == "seed") s.seed = detail::parse_count(val, line_no, key);
      else if (key == "start_omega") s.start_omega = real();
      else if (key == "start_a0") s.start_a0 = real();
      else if (key == "estimate_window") s.estimate_window = real();
      else throw UnknownKey(key);
    }
  }
  validate(c);
  return c;
}

/// Writes every resolved value back in the input format; parse_config reads it to an equal
/// config.
inline std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream o;
  if (!c.scenario.empty()) o << "scenario = " << c.scenario << '\n';
  o << "output = " << c.output << '\n';
  o << "plots = " << (c.plots ? 1 : 0) << '\n';
  const auto& m = c.model;
  o << "\n[model]\n";
  o << "beta = " << format_real(m.beta) << '\n';
  o << "delta = " << format_real(m.delta) << '\n';
  o << "epsilon = " << format_real(m.epsilon) << '\n';
  o << "mu = " << format_real(m.mu) << '\n';
  o << "nu = " << format_real(m.nu) << '\n';
  o << "eta = " << format_real(m.eta) << '\n';
  o << "phi = " << format_real(m.phi) << '\n';
  o << "tau = " << format_real(m.tau) << '\n';
  o << "\n[scan]\n";
  o << "q = " << format_real(c.scan.q) << '\n';
  if (c.scan.branch) o << "branch = " << *c.scan.branch << '\n';
  o << "stride = " << c.scan.stride << '\n';
  for (const auto& [name, ax] : c.scan.axes) {
    if (ax.min) o << name << "_min = " << format_real(*ax.min) << '\n';
    if (ax.max) o << name << "_max = " << format_real(*ax.max) << '\n';
    if (ax.count) o << name << "_count = " << *ax.count << '\n';
    if (ax.values) {
      o << name << "_values = ";
      for (std::size_t i = 0; i < ax.values->size(); ++i)
        o << (i ? ", " : "") << format_real((*ax.values)[i]);
      o << '\n';
    }
  }
  const auto& s = c.simulation;
  o << "\n[simulation]\n";
  o << "n_points = " << s.n_points << '\n';
  o << "length = " << format_real(s.length) << '\n';
  o << "rtol = " << format_real(s.rtol) << '\n';
  o << "atol = " << format_real(s.atol) << '\n';
  o << "t_end = " << format_real(s.t_end) << '\n';
  o << "snapshot_every = " << format_real(s.snapshot_every) << '\n';
  o << "observe_every = " << format_real(s.observe_every) << '\n';
  o << "perturbation = " << s.perturbation << '\n';
  if (s.perturbation_k) o << "perturbation_k = " << format_real(*s.perturbation_k) << '\n';
  o << "perturbation_relative = " << format_real(s.perturbation_relative) << '\n';
  o << "seed = " << s.seed << '\n';
  if (s.start_omega) o << "start_omega = " << format_real(*s.start_omega) << '\n';
  if (s.start_a0) o << "start_a0 = " << format_real(*s.start_a0) << '\n';
  if (s.estimate_window) o << "estimate_window = " << format_real(*s.estimate_window) << '\n';
  return o.str();
}

}  // namespace dcgle
