#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/grid.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/product_kernel.hpp"
#include "wkam/tropical.hpp"

namespace wkam {

struct Discretization {
  int steps_per_period = 16;
  int substeps = 8;
  double v_max = 3.0;  // torus units per period, per axis
  int winding = 1;
};

namespace detail {

/// Composite midpoint rule for the action of the straight segment
/// s -> from + s * v, v = disp / h, on [t0, t0 + h].
template <class Integrand>
double segment_action(Integrand&& lagr, std::span<const double> from, std::span<const double> disp, double t0,
                      double h, int substeps) {
  const std::size_t dim = from.size();
  std::array<double, 2> v{}, x{};
  for (std::size_t a = 0; a < dim; ++a) v[a] = disp[a] / h;
  const double dt = h / substeps;
  double sum = 0.0;
  for (int p = 0; p < substeps; ++p) {
    const double s = (p + 0.5) * dt;
    for (std::size_t a = 0; a < dim; ++a) x[a] = from[a] + s * v[a];
    sum += lagr(std::span<const double>(x.data(), dim), std::span<const double>(v.data(), dim), t0 + s);
  }
  return sum * dt;
}

/// Number of whole cells a single step may cross per axis.
inline int window_cells(const TorusGrid& grid, const Discretization& d) {
  return static_cast<int>(std::floor(d.v_max / d.steps_per_period * grid.n_per_axis() + 1e-9));
}

inline void validate(const TorusGrid& grid, const Discretization& d) {
  if (d.steps_per_period < 4) throw ConfigError("time.steps_per_period", "must be >= 4");
  if (d.substeps < 1) throw ConfigError("time.substeps", "must be >= 1");
  if (d.winding < 0) throw ConfigError("window.winding", "must be >= 0");
  if (grid.n_per_axis() < 8) throw ConfigError("grid.n_per_axis", "must be >= 8");
  if (d.v_max / d.steps_per_period < grid.spacing())
    throw ConfigError("window.v_max", "velocity window cannot reach neighbouring nodes (v_max/S < 1/N)");
}

/// Cost of one step between 1-d node indices, min over windings inside
/// the window; kBig when every winding is outside it.
template <class Integrand>
double axis_step_cost(Integrand&& lagr, const TorusGrid& line, int from, int to, double t0, double h,
                      const Discretization& d, bool quantized) {
  const double lim = d.v_max * h + 1e-12;
  const double xf = from * line.spacing();
  double best = kBig;
  for (int w = -d.winding; w <= d.winding; ++w) {
    const double disp = to * line.spacing() + w - xf;
    if (std::abs(disp) > lim) continue;
    double c = segment_action(lagr, std::span<const double>(&xf, 1), std::span<const double>(&disp, 1), t0, h,
                              d.substeps);
    best = std::min(best, c);
  }
  return quantized && best < kBig ? quantize(best) : best;
}

}  // namespace detail

/// Action of the straight lift from node `from` to node `to` over
/// [t0, t0 + h], minimized over winding shifts w in {-W..W} per axis.
/// Unquantized; no velocity window.
inline double one_step_cost(const LagrangianSpec& spec, std::span<const double> from, std::span<const double> to,
                            double t0, double h, int substeps, int winding = 1) {
  if (static_cast<int>(from.size()) != spec.dim || static_cast<int>(to.size()) != spec.dim)
    throw ArgumentError("one_step_cost: dimension mismatch");
  if (!(h > 0.0)) throw ArgumentError("one_step_cost: h must be > 0");
  if (substeps < 1) throw ArgumentError("one_step_cost: substeps must be >= 1");
  auto lagr = [&](std::span<const double> x, std::span<const double> v, double t) {
    return eval_lagrangian(spec, x, v, t);
  };
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 2> disp{};
  const int span = 2 * winding + 1;
  const int combos = spec.dim == 1 ? span : span * span;
  for (int c = 0; c < combos; ++c) {
    const int w0 = c % span - winding;
    const int w1 = c / span - winding;
    disp[0] = to[0] + w0 - from[0];
    if (spec.dim == 2) disp[1] = to[1] + w1 - from[1];
    best = std::min(best, detail::segment_action(lagr, from, std::span<const double>(disp.data(), spec.dim), t0,
                                                 h, substeps));
  }
  return best;
}

/// Dense one-step kernels K_j on [j/S, (j+1)/S], j = 0..S-1. Entries are
/// quantized; transitions outside the per-axis velocity window are kBig.
inline std::vector<CostKernel> build_step_kernels(const LagrangianSpec& spec, const TorusGrid& grid,
                                                  const Discretization& d) {
  if (grid.dim() != spec.dim) throw ArgumentError("build_step_kernels: grid dimension does not match system");
  detail::validate(grid, d);
  const int S = d.steps_per_period;
  const double h = 1.0 / S;
  const std::size_t m = grid.size();
  const double lim = d.v_max * h + 1e-12;
  auto lagr = [&](std::span<const double> x, std::span<const double> v, double t) {
    return eval_lagrangian(spec, x, v, t);
  };
  std::vector<CostKernel> out;
  out.reserve(S);
  for (int j = 0; j < S; ++j) {
    const double t0 = j * h;
    std::vector<double> c(m * m, kBig);
    for (std::size_t y = 0; y < m; ++y) {
      const auto cy = grid.coords(y);
      for (std::size_t x = 0; x < m; ++x) {
        const auto cx = grid.coords(x);
        double best = kBig;
        const int span = 2 * d.winding + 1;
        const int combos = spec.dim == 1 ? span : span * span;
        for (int cmb = 0; cmb < combos; ++cmb) {
          std::array<double, 2> disp{cx[0] + (cmb % span - d.winding) - cy[0], 0.0};
          if (spec.dim == 2) disp[1] = cx[1] + (cmb / span - d.winding) - cy[1];
          if (std::abs(disp[0]) > lim || std::abs(disp[1]) > lim) continue;
          best = std::min(best, detail::segment_action(lagr, std::span<const double>(cy.data(), spec.dim),
                                                       std::span<const double>(disp.data(), spec.dim), t0, h,
                                                       d.substeps));
        }
        c[y * m + x] = best < kBig ? quantize(best) : kBig;
      }
    }
    out.emplace_back(grid, t0, (j + 1) * h, std::move(c));
  }
  return out;
}

/// Separable one-step kernels for Lagrangians of the form L0(x0,v0) + L1(x1,v1).
inline std::vector<ProductKernel> build_product_step_kernels(const LagrangianSpec& spec, const TorusGrid& grid,
                                                             const Discretization& d) {
  if (!spec.separable() || grid.dim() != 2)
    throw ArgumentError("build_product_step_kernels: needs a separable 2-d system");
  detail::validate(grid, d);
  const int S = d.steps_per_period;
  const double h = 1.0 / S;
  const TorusGrid line(1, grid.n_per_axis());
  const int n = line.n_per_axis();
  std::vector<ProductKernel> out;
  out.reserve(S);
  for (int j = 0; j < S; ++j) {
    const double t0 = j * h;
    std::array<CostKernel, 2> f;
    for (int axis = 0; axis < 2; ++axis) {
      auto lagr = [&](std::span<const double> x, std::span<const double> v, double t) {
        return eval_axis_term(spec, axis, x[0], v[0], t);
      };
      std::vector<double> c(static_cast<std::size_t>(n) * n);
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) c[y * n + x] = detail::axis_step_cost(lagr, line, y, x, t0, h, d, true);
      f[axis] = CostKernel(line, t0, (j + 1) * h, std::move(c));
    }
    out.emplace_back(std::move(f[0]), std::move(f[1]));
  }
  return out;
}

/// Prefix products F_{0, j/S} for j = 0..S (prefix[0] is the identity,
/// prefix[S] the period kernel) and suffix products F_{j/S, 1}.
template <class Kernel>
struct PeriodProducts {
  std::vector<Kernel> prefix;
  std::vector<Kernel> suffix;
  const Kernel& period() const { return prefix.back(); }
};

template <class Kernel>
PeriodProducts<Kernel> period_kernel(const std::vector<Kernel>& steps) {
  if (steps.empty()) throw ArgumentError("period_kernel: no step kernels");
  if (std::abs(steps.front().t_start()) > 1e-12 || std::abs(steps.back().t_end() - 1.0) > 1e-9)
    throw ArgumentError("period_kernel: steps do not cover [0, 1]");
  for (std::size_t j = 1; j < steps.size(); ++j)
    if (std::abs(steps[j].t_start() - steps[j - 1].t_end()) > 1e-9)
      throw ArgumentError("period_kernel: gap between step kernels");
  const std::size_t S = steps.size();
  PeriodProducts<Kernel> p;
  p.prefix.reserve(S + 1);
  p.prefix.push_back(Kernel::identity(steps.front().grid(), 0.0));
  for (std::size_t j = 0; j < S; ++j) p.prefix.push_back(minplus_matmul(p.prefix.back(), steps[j]));
  p.suffix.assign(S + 1, Kernel{});
  p.suffix[S] = Kernel::identity(steps.front().grid(), 1.0);
  for (std::size_t j = S; j-- > 0;) p.suffix[j] = minplus_matmul(steps[j], p.suffix[j + 1]);
  return p;
}

/// Outcome of the velocity-window audit: transitions whose optimal two-step
/// split uses a step on the window boundary.
struct WindowAudit {
  int boundary_cells = 0;
  long boundary_hits = 0;
  bool ok() const { return boundary_hits == 0; }
};

namespace detail {
inline void audit_line(const CostKernel& a, const CostKernel& b, int cells, WindowAudit& audit) {
  const int n = a.grid().n_per_axis();
  auto offset = [n](int from, int to) {
    int d = ((to - from) % n + n) % n;
    return std::min(d, n - d);
  };
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (offset(y, x) > cells) continue;
      double best = kBig;
      int arg = -1;
      for (int z = 0; z < n; ++z) {
        double c = tropical_add(a(y, z), b(z, x));
        if (c < best) best = c, arg = z;
      }
      if (arg >= 0 && (offset(y, arg) >= cells || offset(arg, x) >= cells)) ++audit.boundary_hits;
    }
}
}  // namespace detail

/// For every pair reachable in one step, checks that the cheapest two-step
/// route never uses a transition on the window edge. Only meaningful when
/// the window is narrower than half the torus.
inline WindowAudit audit_velocity_window(const std::vector<CostKernel>& steps, const Discretization& d) {
  WindowAudit audit;
  const TorusGrid& g = steps.front().grid();
  audit.boundary_cells = detail::window_cells(g, d);
  if (g.dim() != 1 || 2 * audit.boundary_cells >= g.n_per_axis()) return audit;
  for (std::size_t j = 0; j < steps.size(); ++j)
    detail::audit_line(steps[j], steps[(j + 1) % steps.size()], audit.boundary_cells, audit);
  return audit;
}

inline WindowAudit audit_velocity_window(const std::vector<ProductKernel>& steps, const Discretization& d) {
  WindowAudit audit;
  const TorusGrid line(1, steps.front().grid().n_per_axis());
  audit.boundary_cells = detail::window_cells(line, d);
  if (2 * audit.boundary_cells >= line.n_per_axis()) return audit;
  for (int axis = 0; axis < 2; ++axis)
    for (std::size_t j = 0; j < steps.size(); ++j)
      detail::audit_line(steps[j].factor(axis), steps[(j + 1) % steps.size()].factor(axis), audit.boundary_cells,
                         audit);
  return audit;
}

// --- binary dump -----------------------------------------------------------
//
// "WKAM" | u32 version | u32 dim | u32 N | u32 S | f64 t_start | f64 t_end |
// M*M f64 row-major entries. Everything little-endian.

inline constexpr std::uint32_t kDumpVersion = 1;

namespace detail {
template <class T>
void put_le(std::ostream& os, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  os.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bits{};
  is.read(reinterpret_cast<char*>(bits.data()), sizeof(T));
  if (!is) throw ArgumentError("kernel dump: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}
}  // namespace detail

inline void write_kernel_dump(const std::string& path, const CostKernel& k, int steps_per_period) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot open kernel dump file " + path);
  os.write("WKAM", 4);
  detail::put_le<std::uint32_t>(os, kDumpVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.grid().dim()));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.grid().n_per_axis()));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(steps_per_period));
  detail::put_le<double>(os, k.t_start());
  detail::put_le<double>(os, k.t_end());
  for (double v : k.data()) detail::put_le<double>(os, v);
}

struct KernelDump {
  CostKernel kernel;
  int steps_per_period = 0;
};

inline KernelDump read_kernel_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("cannot open kernel dump file " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "WKAM") throw ArgumentError("kernel dump: bad magic");
  if (detail::get_le<std::uint32_t>(is) != kDumpVersion) throw ArgumentError("kernel dump: unsupported version");
  const int dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
  const int n = static_cast<int>(detail::get_le<std::uint32_t>(is));
  const int s = static_cast<int>(detail::get_le<std::uint32_t>(is));
  const double t0 = detail::get_le<double>(is);
  const double t1 = detail::get_le<double>(is);
  TorusGrid g(dim, n);
  std::vector<double> c(g.size() * g.size());
  for (auto& v : c) v = detail::get_le<double>(is);
  return {CostKernel(g, t0, t1, std::move(c)), s};
}

}  // namespace wkam
