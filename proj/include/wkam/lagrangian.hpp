#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>

#include "wkam/errors.hpp"
#include "wkam/grid.hpp"

namespace wkam {

enum class SystemKind { forced_pendulum_1d, example_4_1_2d };

inline const char* to_string(SystemKind k) {
  return k == SystemKind::forced_pendulum_1d ? "forced_pendulum_1d" : "example_4_1";
}

/// Known minimizing orbit of a catalog member. For the pendulum this is the
/// rest point x = 0; for example_4_1 it is the circle x = 0 traversed with
/// velocity (0, c), anchored at `position`.
struct ReferencePoint {
  std::array<double, 2> position{0.0, 0.0};
  std::array<double, 2> velocity{0.0, 0.0};
  double critical_value = 0.0;
  bool hyperbolic = true;
  /// True when the projected Aubry set is the whole circle {x = 0}.
  bool aubry_is_circle = false;
};

/// Time-periodic Lagrangian on T^dim, period 1.
///
///   forced_pendulum_1d: L = v^2/2 + a (1 - cos 2 pi x)(1 + eps cos 2 pi t)
///   example_4_1_2d:     L = vx^2/2 + (1 - cos 2 pi x) + (vy - c)^2/2
struct LagrangianSpec {
  SystemKind kind = SystemKind::forced_pendulum_1d;
  int dim = 1;
  double amplitude = 1.0;
  double eps = 0.0;
  double drift = 0.0;
  static constexpr double time_period = 1.0;

  ReferencePoint reference() const {
    ReferencePoint r;
    if (kind == SystemKind::example_4_1_2d) {
      r.position = {0.0, 0.5};
      r.velocity = {0.0, drift};
      r.hyperbolic = false;
      r.aubry_is_circle = true;
    }
    return r;
  }

  /// Lagrangians that split as a sum of one-axis terms, L = L_0(x, vx) + L_1(y, vy).
  bool separable() const { return kind == SystemKind::example_4_1_2d; }
};

namespace detail {
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}

/// Potential part V(x, t), so that L = |v|^2/2 + V (pendulum) and the
/// Euler-Lagrange equation reads x'' = dV/dx.
inline double potential(const LagrangianSpec& s, std::span<const double> x, double t) {
  using detail::two_pi;
  if (s.kind == SystemKind::forced_pendulum_1d)
    return s.amplitude * (1.0 - std::cos(two_pi * x[0])) * (1.0 + s.eps * std::cos(two_pi * t));
  return 1.0 - std::cos(two_pi * x[0]);
}

inline double eval_lagrangian(const LagrangianSpec& s, std::span<const double> x,
                              std::span<const double> v, double t) {
  if (static_cast<int>(x.size()) != s.dim || static_cast<int>(v.size()) != s.dim)
    throw ArgumentError("eval_lagrangian: dimension mismatch");
  if (s.kind == SystemKind::forced_pendulum_1d) return 0.5 * v[0] * v[0] + potential(s, x, t);
  double dy = v[1] - s.drift;
  return 0.5 * v[0] * v[0] + potential(s, x, t) + 0.5 * dy * dy;
}

/// One-axis term of a separable Lagrangian (axis 0 carries the potential).
inline double eval_axis_term(const LagrangianSpec& s, int axis, double x, double v, double t) {
  if (!s.separable()) throw ArgumentError("eval_axis_term: Lagrangian is not separable");
  (void)t;
  if (axis == 0) return 0.5 * v * v + (1.0 - std::cos(detail::two_pi * x));
  double dv = v - s.drift;
  return 0.5 * dv * dv;
}

/// Builds a catalog entry. Recognized names: "forced_pendulum_1d" with
/// params {a, eps}; "example_4_1" with params {c}. Unknown names, unknown
/// keys and out-of-range values raise ConfigError naming the key.
inline LagrangianSpec catalog_get(const std::string& name, const std::map<std::string, double>& params) {
  LagrangianSpec s;
  auto get = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw ConfigError(k, "unknown parameter for system '" + name + "'");
    }
  };
  if (name == "forced_pendulum_1d") {
    reject_unknown({"a", "eps"});
    s.kind = SystemKind::forced_pendulum_1d;
    s.dim = 1;
    s.amplitude = get("a", 1.0);
    s.eps = get("eps", 0.0);
    if (!(s.amplitude > 0.0) || !std::isfinite(s.amplitude)) throw ConfigError("a", "amplitude must be > 0");
    if (!(s.eps >= 0.0 && s.eps < 1.0)) throw ConfigError("eps", "forcing must satisfy 0 <= eps < 1");
  } else if (name == "example_4_1" || name == "example_4_1_2d") {
    reject_unknown({"c"});
    s.kind = SystemKind::example_4_1_2d;
    s.dim = 2;
    s.drift = get("c", 0.0);
    if (!std::isfinite(s.drift)) throw ConfigError("c", "drift must be finite");
  } else {
    throw ConfigError("name", "unknown system '" + name + "'");
  }
  return s;
}

/// Tent of height delta centred at y0 in the last coordinate:
/// u = max(0, delta - dist(y, y0)). Values are put on the quantum lattice.
inline ValueFunction tent_initial_condition(const TorusGrid& grid, double y0, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw ArgumentError("tent_initial_condition: delta must lie in (0, 1/2)");
  ValueFunction u = ValueFunction::constant(grid, 0.0);
  const int axis = grid.dim() - 1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double y = grid.coords(i)[axis];
    u[i] = quantize(std::max(0.0, delta - torus_distance(y, y0)));
  }
  return u;
}

}  // namespace wkam
