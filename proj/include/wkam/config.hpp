#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/kernel_build.hpp"
#include "wkam/lagrangian.hpp"

namespace wkam {

enum class Storage { automatic, dense, product };
enum class InitialKind { tent, zero, random };

/// Flat `section.key = value` run description. Every field has a default;
/// the resolved form is echoed next to the outputs.
struct RunConfig {
  std::string system_name = "forced_pendulum_1d";
  double a = 0.025;
  double eps = 0.0;
  double c = 0.5;

  int n_per_axis = 64;
  Storage storage = Storage::automatic;
  int steps_per_period = 16;
  int substeps = 8;
  double v_max = 3.0;
  int winding = 1;

  InitialKind initial = InitialKind::tent;
  double initial_center = 0.5;
  double initial_delta = 0.3;

  std::string op = "new";
  int n_max = 60;
  std::vector<int> tau_slices;  // empty: every slice 0..S-1
  std::optional<std::array<double, 2>> probe;
  int n_cap = 100000;

  int barrier_n_min = 0;  // 0: number of grid nodes
  int barrier_n_max = 0;  // 0: n_min + 64
  std::string barrier_mode = "tail_min";

  double tol_discretization = 5e-3;
  double tol_fixed_point = 1e-12;
  double tol_aubry = 1e-6;

  int check_samples = 10000;
  double check_neighborhood = 0.1;
  int potential_k_max = 8;
  bool check_corrupt = false;

  std::uint64_t seed = 1;
  std::string output = "out";

  LagrangianSpec lagrangian() const {
    if (system_name == "forced_pendulum_1d") return catalog_get(system_name, {{"a", a}, {"eps", eps}});
    return catalog_get(system_name, {{"c", c}});
  }
  Discretization discretization() const { return {steps_per_period, substeps, v_max, winding}; }
  bool use_product() const {
    return storage == Storage::product || (storage == Storage::automatic && lagrangian().separable());
  }
  int barrier_lo() const {
    if (barrier_n_min > 0) return barrier_n_min;
    int m = 1;
    for (int d = 0; d < lagrangian().dim; ++d) m *= n_per_axis;
    return m;
  }
  int barrier_hi() const { return barrier_n_max > 0 ? barrier_n_max : barrier_lo() + 64; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

inline int parse_int32(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

inline std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

struct ConfigEntry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<ConfigEntry>& config_entries() {
  using C = RunConfig;
  using S = const std::string&;
  auto real = [](double C::*f, const char* key) {
    return ConfigEntry{key, [f](const C& c) { return format_double(c.*f); },
                       [f, key](C& c, S v) { c.*f = parse_double(key, v); }};
  };
  auto integer = [](int C::*f, const char* key) {
    return ConfigEntry{key, [f](const C& c) { return std::to_string(c.*f); },
                       [f, key](C& c, S v) { c.*f = parse_int32(key, v); }};
  };
  auto text = [](std::string C::*f, const char* key) {
    return ConfigEntry{key, [f](const C& c) { return c.*f; }, [f](C& c, S v) { c.*f = v; }};
  };
  static const std::vector<ConfigEntry> entries = {
      text(&C::system_name, "system.name"),
      real(&C::a, "system.a"),
      real(&C::eps, "system.eps"),
      real(&C::c, "system.c"),
      integer(&C::n_per_axis, "grid.n_per_axis"),
      {"grid.storage",
       [](const C& c) {
         return std::string(c.storage == Storage::dense ? "dense" : c.storage == Storage::product ? "product" : "auto");
       },
       [](C& c, S v) {
         if (v == "auto") c.storage = Storage::automatic;
         else if (v == "dense") c.storage = Storage::dense;
         else if (v == "product") c.storage = Storage::product;
         else throw ConfigError("grid.storage", "expected auto, dense or product");
       }},
      integer(&C::steps_per_period, "time.steps_per_period"),
      integer(&C::substeps, "time.substeps"),
      real(&C::v_max, "window.v_max"),
      integer(&C::winding, "window.winding"),
      {"initial.kind",
       [](const C& c) {
         return std::string(c.initial == InitialKind::tent ? "tent" : c.initial == InitialKind::zero ? "zero" : "random");
       },
       [](C& c, S v) {
         if (v == "tent") c.initial = InitialKind::tent;
         else if (v == "zero") c.initial = InitialKind::zero;
         else if (v == "random") c.initial = InitialKind::random;
         else throw ConfigError("initial.kind", "expected tent, zero or random");
       }},
      real(&C::initial_center, "initial.center"),
      real(&C::initial_delta, "initial.delta"),
      text(&C::op, "operator.kind"),
      integer(&C::n_max, "operator.n_max"),
      {"operator.tau_slices",
       [](const C& c) {
         if (c.tau_slices.empty()) return std::string("all");
         std::string s;
         for (std::size_t i = 0; i < c.tau_slices.size(); ++i) s += (i ? "," : "") + std::to_string(c.tau_slices[i]);
         return s;
       },
       [](C& c, S v) {
         c.tau_slices.clear();
         if (v == "all") return;
         for (const auto& p : split_commas(v)) c.tau_slices.push_back(parse_int32("operator.tau_slices", p));
         if (c.tau_slices.empty()) throw ConfigError("operator.tau_slices", "empty slice list");
       }},
      {"operator.probe",
       [](const C& c) {
         if (!c.probe) return std::string("none");
         return format_double((*c.probe)[0]) + "," + format_double((*c.probe)[1]);
       },
       [](C& c, S v) {
         if (v == "none") {
           c.probe.reset();
           return;
         }
         const auto parts = split_commas(v);
         if (parts.empty() || parts.size() > 2) throw ConfigError("operator.probe", "expected 'none' or 'x' or 'x,y'");
         std::array<double, 2> p{0.0, 0.0};
         for (std::size_t i = 0; i < parts.size(); ++i) p[i] = parse_double("operator.probe", parts[i]);
         c.probe = p;
       }},
      integer(&C::n_cap, "operator.n_cap"),
      integer(&C::barrier_n_min, "barrier.n_min"),
      integer(&C::barrier_n_max, "barrier.n_max"),
      text(&C::barrier_mode, "barrier.mode"),
      real(&C::tol_discretization, "tolerances.discretization"),
      real(&C::tol_fixed_point, "tolerances.fixed_point"),
      real(&C::tol_aubry, "tolerances.aubry"),
      integer(&C::check_samples, "checks.samples"),
      real(&C::check_neighborhood, "checks.neighborhood"),
      integer(&C::potential_k_max, "checks.potential_k_max"),
      {"checks.corrupt", [](const C& c) { return std::string(c.check_corrupt ? "true" : "false"); },
       [](C& c, S v) { c.check_corrupt = parse_bool("checks.corrupt", v); }},
      {"run.seed", [](const C& c) { return std::to_string(c.seed); },
       [](C& c, S v) {
         const long long s = parse_int("run.seed", v);
         if (s < 0) throw ConfigError("run.seed", "seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      text(&C::output, "run.output"),
  };
  return entries;
}

}  // namespace detail

/// Applies one `key = value` assignment. Unknown keys raise ConfigError.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : detail::config_entries())
    if (key == e.key) return e.set(cfg, value);
  throw ConfigError(key, "unknown configuration key");
}

/// Parses `key=value` as given on the command line.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "override must look like key=value");
  apply_setting(cfg, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

/// Checks documented ranges; raises ConfigError naming the offending key.
inline void validate(const RunConfig& c) {
  (void)c.lagrangian();
  auto need = [](bool ok, const char* key, const char* msg) {
    if (!ok) throw ConfigError(key, msg);
  };
  need(c.n_per_axis >= 8 && c.n_per_axis <= 4096, "grid.n_per_axis", "must lie in [8, 4096]");
  need(c.steps_per_period >= 4 && c.steps_per_period <= 1024, "time.steps_per_period", "must lie in [4, 1024]");
  need(c.substeps >= 1 && c.substeps <= 1024, "time.substeps", "must lie in [1, 1024]");
  need(c.v_max > 0, "window.v_max", "must be > 0");
  need(c.winding >= 0 && c.winding <= 4, "window.winding", "must lie in [0, 4]");
  need(c.initial_delta > 0 && c.initial_delta < 0.5, "initial.delta", "must lie in (0, 1/2)");
  need(c.op == "new" || c.op == "classic", "operator.kind", "expected new or classic");
  need(c.n_max >= 0 && c.n_max <= 100000, "operator.n_max", "must lie in [0, 100000]");
  need(c.n_cap >= 1, "operator.n_cap", "must be >= 1");
  for (int t : c.tau_slices)
    need(t >= 0 && t < c.steps_per_period, "operator.tau_slices", "slice index must lie in [0, S)");
  need(c.barrier_n_min >= 0, "barrier.n_min", "must be >= 0");
  need(c.barrier_n_max >= 0, "barrier.n_max", "must be >= 0");
  need(c.barrier_hi() >= c.barrier_lo(), "barrier.n_max", "must be >= barrier.n_min");
  need(c.barrier_mode == "tail_min" || c.barrier_mode == "cesaro_check", "barrier.mode",
       "expected tail_min or cesaro_check");
  need(c.tol_discretization > 0, "tolerances.discretization", "must be > 0");
  need(c.tol_fixed_point > 0, "tolerances.fixed_point", "must be > 0");
  need(c.tol_aubry >= 0, "tolerances.aubry", "must be >= 0");
  need(c.check_samples >= 1, "checks.samples", "must be >= 1");
  need(c.check_neighborhood > 0, "checks.neighborhood", "must be > 0");
  need(c.potential_k_max >= 1, "checks.potential_k_max", "must be >= 1");
  need(!(c.storage == Storage::product && !c.lagrangian().separable()), "grid.storage",
       "product storage needs a separable Lagrangian");
  if (c.probe && c.lagrangian().dim == 1)
    need((*c.probe)[1] == 0.0, "operator.probe", "1-d systems take a single coordinate");
  detail::validate(TorusGrid(c.lagrangian().dim, c.n_per_axis), c.discretization());
}

/// Reads `section.key = value` lines; `#` starts a comment.
inline RunConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno), "expected 'key = value'");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  return parse_config(in, path);
}

/// Resolved config in the same syntax, one key per line.
inline std::string echo_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : detail::config_entries()) out += std::string(e.key) + " = " + e.get(cfg) + "\n";
  return out;
}

inline bool equivalent(const RunConfig& a, const RunConfig& b) { return echo_config(a) == echo_config(b); }

}  // namespace wkam
