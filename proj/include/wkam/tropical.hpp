#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/grid.hpp"

namespace wkam {

/// Stand-in for +infinity in the min-plus semiring. Any sum that touches it
/// saturates back to exactly kBig, so kBig never accumulates.
inline constexpr double kBig = 1e15;

inline bool is_blocked(double w) { return w >= kBig; }

/// Maps sums that involved a blocked entry back to exactly kBig. Finite
/// costs stay far below kBig / 2, so anything above it came from kBig.
inline double saturate(double v) { return v >= 0.5 * kBig ? kBig : v; }

inline double tropical_add(double a, double b) {
  if (a >= kBig || b >= kBig) return kBig;
  return std::min(a + b, kBig);
}

namespace detail {
/// Time ranges compose when the second starts where the first ends, modulo
/// whole periods (period kernels are reused at every integer time).
inline bool times_compose(double t_end, double t_start) {
  double d = t_end - t_start;
  return std::abs(d - std::round(d)) < 1e-9;
}
}  // namespace detail

/// Least-action matrix between grid nodes over [t_start, t_end].
/// Entry (y, x) is the cost of going from node y to node x.
class CostKernel {
 public:
  CostKernel() = default;
  CostKernel(TorusGrid grid, double t_start, double t_end, std::vector<double> cost,
             double normalization_offset = 0.0)
      : grid_(grid), t_start_(t_start), t_end_(t_end), offset_(normalization_offset), cost_(std::move(cost)) {
    if (cost_.size() != grid_.size() * grid_.size())
      throw ArgumentError("CostKernel: cost matrix does not match grid size");
    if (t_end_ < t_start_) throw ArgumentError("CostKernel: t_end < t_start");
  }

  /// Tropical identity: 0 on the diagonal, kBig elsewhere, empty time range.
  static CostKernel identity(TorusGrid grid, double t = 0.0) {
    const std::size_t m = grid.size();
    std::vector<double> c(m * m, kBig);
    for (std::size_t i = 0; i < m; ++i) c[i * m + i] = 0.0;
    return CostKernel(grid, t, t, std::move(c));
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  double duration() const { return t_end_ - t_start_; }
  double normalization_offset() const { return offset_; }

  double operator()(std::size_t y, std::size_t x) const { return cost_[y * size() + x]; }
  double& at(std::size_t y, std::size_t x) { return cost_[y * size() + x]; }
  std::span<const double> row(std::size_t y) const { return {cost_.data() + y * size(), size()}; }
  std::span<const double> data() const { return cost_; }
  std::vector<double>& mutable_data() { return cost_; }

  friend bool operator==(const CostKernel& a, const CostKernel& b) {
    return a.grid_ == b.grid_ && a.cost_ == b.cost_;
  }

 private:
  TorusGrid grid_;
  double t_start_ = 0.0;
  double t_end_ = 0.0;
  double offset_ = 0.0;
  std::vector<double> cost_;
};

/// out(x) = min_y u(y) + K(y, x).
inline ValueFunction minplus_matvec(const CostKernel& k, const ValueFunction& u) {
  require_same_grid(k.grid(), u.grid, "minplus_matvec");
  const std::size_t m = k.size();
  std::vector<double> out(m, kBig);
  for (std::size_t y = 0; y < m; ++y) {
    const double uy = u[y];
    if (uy >= kBig) continue;
    auto row = k.row(y);
    for (std::size_t x = 0; x < m; ++x) out[x] = std::min(out[x], uy + row[x]);
  }
  for (auto& v : out) v = saturate(v);
  return ValueFunction(u.grid, std::move(out), std::fmod(u.time_tag + k.duration(), 1.0));
}

/// out(y, x) = min_z A(y, z) + B(z, x); time ranges must be contiguous mod 1.
inline CostKernel minplus_matmul(const CostKernel& a, const CostKernel& b) {
  require_same_grid(a.grid(), b.grid(), "minplus_matmul");
  if (!detail::times_compose(a.t_end(), b.t_start()))
    throw ArgumentError("minplus_matmul: time ranges are not contiguous");
  const std::size_t m = a.size();
  std::vector<double> out(m * m, kBig);
  for (std::size_t y = 0; y < m; ++y) {
    double* orow = out.data() + y * m;
    for (std::size_t z = 0; z < m; ++z) {
      const double ayz = a(y, z);
      if (ayz >= kBig) continue;
      auto brow = b.row(z);
      for (std::size_t x = 0; x < m; ++x) orow[x] = std::min(orow[x], ayz + brow[x]);
    }
    for (std::size_t x = 0; x < m; ++x) orow[x] = saturate(orow[x]);
  }
  return CostKernel(a.grid(), a.t_start(), a.t_start() + a.duration() + b.duration(), std::move(out),
                    a.normalization_offset() + b.normalization_offset());
}

/// K^{⊗k} by binary powering. k = 0 gives the tropical identity.
inline CostKernel minplus_power(const CostKernel& k, int power) {
  if (power < 0) throw ArgumentError("minplus_power: negative exponent");
  CostKernel result = CostKernel::identity(k.grid(), k.t_start());
  if (power == 0) return result;
  CostKernel base = k;
  bool first = true;
  while (power > 0) {
    if (power & 1) {
      result = first ? base : minplus_matmul(result, base);
      first = false;
    }
    power >>= 1;
    if (power > 0) base = minplus_matmul(base, base);
  }
  return result;
}

/// Adds c * duration to every finite entry, i.e. the action of L + c, whose
/// minimum mean cycle is zero. The shift is put on the quantum lattice so
/// lattice kernels stay on it.
inline CostKernel normalize(const CostKernel& k, double c_est) {
  const double shift = quantize(c_est * k.duration());
  std::vector<double> c(k.data().begin(), k.data().end());
  for (auto& v : c)
    if (v < kBig) v = v + shift;
  return CostKernel(k.grid(), k.t_start(), k.t_end(), std::move(c), k.normalization_offset() + shift);
}

/// Entrywise minimum of two kernels on the same grid.
inline CostKernel entrywise_min(const CostKernel& a, const CostKernel& b) {
  require_same_grid(a.grid(), b.grid(), "entrywise_min");
  std::vector<double> c(a.data().begin(), a.data().end());
  auto bd = b.data();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::min(c[i], bd[i]);
  return CostKernel(a.grid(), a.t_start(), a.t_end(), std::move(c), a.normalization_offset());
}

/// min_z A(y, z) + B(z, x) for a single entry.
inline double compose_entry(const CostKernel& a, const CostKernel& b, std::size_t y, std::size_t x) {
  double best = kBig;
  auto arow = a.row(y);
  for (std::size_t z = 0; z < a.size(); ++z) best = std::min(best, tropical_add(arow[z], b(z, x)));
  return best;
}

/// Minimum mean cycle of the digraph with weights K(y, x), with the cycle
/// that realizes it. Weight sums are exact on the quantum lattice.
struct MeanCycle {
  double weight = 0.0;
  int length = 0;
  std::vector<std::size_t> nodes;

  double mean() const { return weight / length; }
};

/// Karp's algorithm with a virtual source joined to every node. Blocked
/// (kBig) entries are treated as absent edges.
inline MeanCycle karp_critical_cycle(const CostKernel& k) {
  const std::size_t n = k.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // d[j][v]: least weight of a j-edge walk ending at v; pred for walk recovery.
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(n, inf));
  std::vector<std::vector<std::size_t>> pred(n + 1, std::vector<std::size_t>(n, 0));
  std::fill(d[0].begin(), d[0].end(), 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t u = 0; u < n; ++u) {
      const double du = d[j - 1][u];
      if (du == inf) continue;
      auto row = k.row(u);
      for (std::size_t v = 0; v < n; ++v) {
        if (row[v] >= kBig) continue;
        const double cand = du + row[v];
        if (cand < d[j][v]) {
          d[j][v] = cand;
          pred[j][v] = u;
        }
      }
    }
  }
  double best = inf;
  std::size_t best_v = n;
  for (std::size_t v = 0; v < n; ++v) {
    if (d[n][v] == inf) continue;
    double worst = -inf;
    for (std::size_t j = 0; j < n; ++j) {
      if (d[j][v] == inf) continue;
      worst = std::max(worst, (d[n][v] - d[j][v]) / static_cast<double>(n - j));
    }
    if (worst < best) {
      best = worst;
      best_v = v;
    }
  }
  if (best_v == n) throw NumericalError("karp_min_mean_cycle: no finite cycle (all blocked)");

  // The optimal n-edge walk into best_v contains only critical cycles.
  std::vector<std::size_t> walk(n + 1);
  walk[n] = best_v;
  for (std::size_t j = n; j > 0; --j) walk[j - 1] = pred[j][walk[j]];

  MeanCycle result;
  double best_mean = inf;
  std::vector<long> last_seen(n, -1);
  for (std::size_t j = 0; j <= n; ++j) {
    const std::size_t v = walk[j];
    if (last_seen[v] >= 0) {
      const std::size_t from = static_cast<std::size_t>(last_seen[v]);
      double w = 0.0;
      for (std::size_t i = from; i < j; ++i) w += k(walk[i], walk[i + 1]);
      const int len = static_cast<int>(j - from);
      if (w / len < best_mean) {
        best_mean = w / len;
        result.weight = w;
        result.length = len;
        result.nodes.assign(walk.begin() + static_cast<long>(from), walk.begin() + static_cast<long>(j));
      }
    }
    last_seen[v] = static_cast<long>(j);
  }
  return result;
}

/// Minimum mean cycle weight per edge.
inline double min_mean_cycle(const CostKernel& k) { return karp_critical_cycle(k).mean(); }

/// Discrete critical value c = -(minimum mean cycle weight) / duration.
inline double karp_min_mean_cycle(const CostKernel& k) {
  if (!(k.duration() > 0)) throw ArgumentError("karp_min_mean_cycle: kernel has empty time range");
  return -min_mean_cycle(k) / k.duration();
}

}  // namespace wkam
