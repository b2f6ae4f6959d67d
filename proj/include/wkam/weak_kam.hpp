#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <type_traits>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/grid.hpp"
#include "wkam/minimizer.hpp"
#include "wkam/periodic_kernels.hpp"
#include "wkam/product_kernel.hpp"
#include "wkam/tropical.hpp"

namespace wkam {

// --- Lax-Oleinik operators ----------------------------------------------------

/// T_k u = u ⊗ K^{⊗k}, k matvecs.
template <class Kernel>
ValueFunction lo_iterate(const Kernel& period, ValueFunction u, int k) {
  if (k < 0) throw ArgumentError("lo_iterate: negative horizon");
  for (int i = 0; i < k; ++i) u = minplus_matvec(period, u);
  return u;
}

/// T_0 u, T_1 u, ..., T_kmax u.
template <class Kernel>
std::vector<ValueFunction> lo_sequence(const Kernel& period, ValueFunction u, int k_max) {
  std::vector<ValueFunction> seq;
  seq.reserve(static_cast<std::size_t>(k_max) + 1);
  seq.push_back(std::move(u));
  for (int k = 1; k <= k_max; ++k) seq.push_back(minplus_matvec(period, seq.back()));
  return seq;
}

inline ValueFunction pointwise_min(const ValueFunction& a, const ValueFunction& b) {
  require_same_grid(a.grid, b.grid, "pointwise_min");
  ValueFunction out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], b[i]);
  return out;
}

/// min over k in [n, 2n] of T_k u, before the fractional offset is applied.
/// `seq` must hold T_0 u .. T_{2n} u.
inline ValueFunction window_min(const std::vector<ValueFunction>& seq, int n) {
  if (n < 0 || static_cast<std::size_t>(2 * n) >= seq.size())
    throw ArgumentError("window_min: sequence too short for window");
  ValueFunction m = seq[static_cast<std::size_t>(n)];
  for (int k = n + 1; k <= 2 * n; ++k) m = pointwise_min(m, seq[static_cast<std::size_t>(k)]);
  return m;
}

/// New operator: out = min_{k in [n,2n]} u ⊗ K^{⊗k} ⊗ K_tau. The min over k
/// is taken before the offset kernel; min distributes over ⊗ exactly.
template <class Kernel>
ValueFunction new_lo_apply(const PeriodicKernels<Kernel>& pk, const ValueFunction& u, int n, int tau_index) {
  if (n < 0) throw ArgumentError("new_lo_apply: n must be >= 0");
  ValueFunction uk = lo_iterate(pk.period(), u, n);
  ValueFunction running = uk;
  for (int k = n + 1; k <= 2 * n; ++k) {
    uk = minplus_matvec(pk.period(), uk);
    running = pointwise_min(running, uk);
  }
  if (tau_index == 0) return running;
  return minplus_matvec(pk.prefix(tau_index), running);
}

/// U_n^u on every slice tau = j/S, j = 0..S.
template <class Kernel>
std::vector<ValueFunction> u_surface(const PeriodicKernels<Kernel>& pk, const ValueFunction& u, int n) {
  ValueFunction base = new_lo_apply(pk, u, n, 0);
  std::vector<ValueFunction> out;
  out.reserve(static_cast<std::size_t>(pk.steps_per_period()) + 1);
  out.push_back(base);
  for (int j = 1; j <= pk.steps_per_period(); ++j) {
    ValueFunction s = minplus_matvec(pk.prefix(j), base);
    s.time_tag = static_cast<double>(j) / pk.steps_per_period();
    out.push_back(std::move(s));
  }
  return out;
}

/// Sup over slices of the distance between two surfaces.
inline double surface_distance(const std::vector<ValueFunction>& a, const std::vector<ValueFunction>& b) {
  if (a.size() != b.size()) throw ArgumentError("surface_distance: slice count differs");
  double m = 0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, sup_distance(a[j], b[j]));
  return m;
}

// --- discrete fixed point -------------------------------------------------------

struct FixedPoint {
  ValueFunction ubar;
  int iterations = 0;
  double last_increment = 0.0;
  std::vector<double> recent_increments;
};

/// Iterates T_1 until the sup increment drops to `tol`. The normalized
/// finite system reaches an exact min-plus fixed point when the critical
/// graph is aperiodic; otherwise NumericalError carries the last increments.
template <class Kernel>
FixedPoint discrete_fixed_point(const Kernel& period, const ValueFunction& u, double tol, int n_cap) {
  FixedPoint fp;
  fp.ubar = u;
  for (int it = 1; it <= n_cap; ++it) {
    ValueFunction next = minplus_matvec(period, fp.ubar);
    const double inc = sup_distance(next, fp.ubar);
    fp.ubar = std::move(next);
    fp.iterations = it;
    fp.last_increment = inc;
    fp.recent_increments.push_back(inc);
    if (fp.recent_increments.size() > 8) fp.recent_increments.erase(fp.recent_increments.begin());
    if (inc <= tol) return fp;
  }
  std::string msg = "discrete fixed point did not converge within " + std::to_string(n_cap) +
                    " periods; last increments:";
  for (double d : fp.recent_increments) msg += " " + std::to_string(d);
  throw NumericalError(msg);
}

/// ubar on every slice j = 0..S: ubar_j = ubar ⊗ K_{j/S}.
template <class Kernel>
std::vector<ValueFunction> fixed_point_slices(const PeriodicKernels<Kernel>& pk, const ValueFunction& ubar) {
  std::vector<ValueFunction> out;
  out.push_back(ubar);
  for (int j = 1; j <= pk.steps_per_period(); ++j) {
    ValueFunction s = minplus_matvec(pk.prefix(j), ubar);
    s.time_tag = static_cast<double>(j) / pk.steps_per_period();
    out.push_back(std::move(s));
  }
  return out;
}

// --- windowed minima of kernel powers ----------------------------------------------

enum class Reduction { min, mean };

/// Entrywise min (or mean) over a family of kernels. Dense kernels under
/// min collapse into a single matrix; other cases keep the terms and
/// evaluate entries on demand.
template <class Kernel>
class WindowedMin {
 public:
  explicit WindowedMin(Reduction r = Reduction::min) : reduction_(r) {}

  void add(const Kernel& k) {
    if constexpr (std::is_same_v<Kernel, CostKernel>) {
      if (reduction_ == Reduction::min && !terms_.empty()) {
        terms_.front() = entrywise_min(terms_.front(), k);
        ++count_;
        return;
      }
    }
    terms_.push_back(k);
    ++count_;
  }

  std::size_t count() const { return count_; }
  Reduction reduction() const { return reduction_; }
  const TorusGrid& grid() const { return terms_.front().grid(); }

  double operator()(std::size_t y, std::size_t x) const {
    if (terms_.empty()) throw StateError("WindowedMin: empty window");
    if (reduction_ == Reduction::min) {
      double best = kBig;
      for (const auto& t : terms_) best = std::min(best, t(y, x));
      return best;
    }
    double sum = 0.0;
    for (const auto& t : terms_) {
      const double v = t(y, x);
      if (v >= kBig) return kBig;
      sum += v;
    }
    return sum / static_cast<double>(terms_.size());
  }

  /// out(x) = min_y u(y) + entry(y, x).
  ValueFunction apply(const ValueFunction& u) const {
    if (terms_.empty()) throw StateError("WindowedMin: empty window");
    if (reduction_ == Reduction::min) {
      ValueFunction out = minplus_matvec(terms_.front(), u);
      for (std::size_t i = 1; i < terms_.size(); ++i) out = pointwise_min(out, minplus_matvec(terms_[i], u));
      out.time_tag = u.time_tag;
      return out;
    }
    const std::size_t m = u.size();
    std::vector<double> out(m, kBig);
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t x = 0; x < m; ++x) out[x] = std::min(out[x], tropical_add(u[y], (*this)(y, x)));
    return ValueFunction(u.grid, std::move(out), u.time_tag);
  }

  std::vector<double> diagonal() const {
    const std::size_t m = grid().size();
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) d[i] = (*this)(i, i);
    return d;
  }

 private:
  Reduction reduction_;
  std::vector<Kernel> terms_;
  std::size_t count_ = 0;
};

namespace detail {
template <class Kernel>
std::vector<double> kernel_diagonal(const Kernel& k) {
  std::vector<double> d(k.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = k(i, i);
  return d;
}

/// Smallest p with d[i + p] == d[i] for every i in the sample; 0 if none.
inline int detect_period(const std::vector<std::vector<double>>& seq) {
  const std::size_t len = seq.size();
  for (std::size_t p = 1; 2 * p <= len; ++p) {
    bool ok = true;
    for (std::size_t i = 0; ok && i + p < len; ++i) ok = seq[i] == seq[i + p];
    if (ok) return static_cast<int>(p);
  }
  return 0;
}
}  // namespace detail

// --- Peierls barrier and action potential ------------------------------------------

enum class BarrierMode { tail_min, cesaro_check };

/// Discrete stand-in for h_{0,[tau]}: min over k in [n_min, n_max] of
/// (K^{⊗k} ⊗ K_tau)(y, x), with the eventual period of the power diagonals.
template <class Kernel>
struct BarrierField {
  int tau_index = 0;
  int n_min = 0;
  int n_max = 0;
  BarrierMode mode = BarrierMode::tail_min;
  /// Eventual period of k -> diag K^{⊗k} observed in the window (0: none found).
  int eventual_period = 0;
  WindowedMin<Kernel> values;

  const TorusGrid& grid() const { return values.grid(); }
  double operator()(std::size_t y, std::size_t x) const { return values(y, x); }
  std::vector<double> diagonal() const { return values.diagonal(); }
};

template <class Kernel>
BarrierField<Kernel> peierls_barrier(const PeriodicKernels<Kernel>& pk, int tau_index, int n_min, int n_max,
                                     BarrierMode mode = BarrierMode::tail_min) {
  if (n_min < 1 || n_max < n_min) throw ArgumentError("peierls_barrier: need n_max >= n_min >= 1");
  if (tau_index < 0 || tau_index > pk.steps_per_period()) throw ArgumentError("peierls_barrier: bad tau index");
  BarrierField<Kernel> b{tau_index, n_min, n_max, mode, 0,
                         WindowedMin<Kernel>(mode == BarrierMode::tail_min ? Reduction::min : Reduction::mean)};
  Kernel power = minplus_power(pk.period(), n_min);
  std::vector<std::vector<double>> diags;
  for (int k = n_min; k <= n_max; ++k) {
    if (k > n_min) power = minplus_matmul(power, pk.period());
    diags.push_back(detail::kernel_diagonal(power));
    b.values.add(tau_index == 0 ? power : minplus_matmul(power, pk.prefix(tau_index)));
  }
  b.eventual_period = detail::detect_period(diags);
  return b;
}

/// Discrete stand-in for Phi_{0,[tau]}: min over k in [1, k_max] of K^{⊗k} ⊗ K_tau.
template <class Kernel>
struct PotentialField {
  int tau_index = 0;
  int k_max = 0;
  WindowedMin<Kernel> values;

  double operator()(std::size_t y, std::size_t x) const { return values(y, x); }
};

template <class Kernel>
PotentialField<Kernel> action_potential(const PeriodicKernels<Kernel>& pk, int tau_index, int k_max) {
  if (k_max < 1) throw ArgumentError("action_potential: k_max must be >= 1");
  PotentialField<Kernel> f{tau_index, k_max, WindowedMin<Kernel>(Reduction::min)};
  Kernel power = pk.period();
  for (int k = 1; k <= k_max; ++k) {
    if (k > 1) power = minplus_matmul(power, pk.period());
    f.values.add(tau_index == 0 ? power : minplus_matmul(power, pk.prefix(tau_index)));
  }
  return f;
}

/// Phi_{s2,s1}(x2, x1) between arbitrary slices s = j/S: least action over
/// paths from (x2, s2) to (x1, s1) lasting at least one period and at most
/// k_max + 1 periods.
template <class Kernel>
class SlicePotential {
 public:
  SlicePotential(const PeriodicKernels<Kernel>& pk, int k_max) : pk_(&pk), k_max_(k_max) {
    if (k_max < 1) throw ArgumentError("SlicePotential: k_max must be >= 1");
    const int S = pk.steps_per_period();
    heads_.resize(static_cast<std::size_t>(S));
    for (int j = 0; j < S; ++j) {
      Kernel h = pk.suffix(j);
      heads_[j].push_back(h);
      for (int m = 1; m <= k_max; ++m) {
        h = minplus_matmul(h, pk.period());
        heads_[j].push_back(h);
      }
    }
  }

  double operator()(int j2, std::size_t x2, int j1, std::size_t x1) const {
    // duration (1 - s2) + m + s1 >= 1  <=>  m >= 1 when s1 < s2
    const int m_lo = j1 >= j2 ? 0 : 1;
    double best = kBig;
    for (int m = m_lo; m <= k_max_; ++m)
      best = std::min(best, compose_entry(heads_[j2][m], pk_->prefix(j1), x2, x1));
    return best;
  }

  int k_max() const { return k_max_; }

 private:
  const PeriodicKernels<Kernel>* pk_;
  int k_max_;
  std::vector<std::vector<Kernel>> heads_;
};

/// ubar(x) = min_y u(y) + b(y, x).
template <class Kernel>
ValueFunction ubar_from_barrier(const ValueFunction& u, const BarrierField<Kernel>& b) {
  require_same_grid(u.grid, b.grid(), "ubar_from_barrier");
  return b.values.apply(u);
}

// --- Aubry set ---------------------------------------------------------------------

/// Nodes with b(x,x) < tol, plus the whole diagonal.
struct AubryReport {
  std::vector<double> diagonal;
  std::vector<std::size_t> nodes;
  double tolerance = 0.0;
};

template <class Kernel>
AubryReport aubry_detect(const BarrierField<Kernel>& b, double tol) {
  if (b.tau_index != 0) throw ArgumentError("aubry_detect: barrier must be taken at tau = 0");
  AubryReport r;
  r.tolerance = tol;
  r.diagonal = b.diagonal();
  for (std::size_t i = 0; i < r.diagonal.size(); ++i)
    if (r.diagonal[i] < tol) r.nodes.push_back(i);
  if (r.nodes.empty())
    throw NumericalError("aubry_detect: no node with b(x,x) < " + std::to_string(tol) +
                         " (tolerance too tight or critical value misnormalized)");
  return r;
}

// --- property checks -----------------------------------------------------------------

struct TriangleResult {
  double first = -kBig;   // h00(x,z) - F_{0,n}(x,y) - h00(y,z)
  double second = -kBig;  // h0tau(x,z) - h00(x,y) - F_{0,n+tau}(y,z)
  double max_violation() const { return std::max(first, second); }
};

/// Samples both barrier triangle inequalities. `b_tau[j]` must be the barrier
/// at tau index j (same window as b0). n ranges over [1, n_hi].
template <class Kernel>
TriangleResult check_barrier_triangles(const PeriodicKernels<Kernel>& pk, const BarrierField<Kernel>& b0,
                            const std::vector<BarrierField<Kernel>>& b_tau, int n_hi, int samples,
                            std::mt19937_64& rng, std::vector<std::size_t> forced_nodes = {}) {
  if (n_hi < 1 || b_tau.empty()) throw ArgumentError("check_barrier_triangles: nothing to check");
  const std::size_t m = pk.grid().size();
  std::vector<Kernel> powers{pk.period()};
  for (int n = 2; n <= n_hi; ++n) powers.push_back(minplus_matmul(powers.back(), pk.period()));
  std::uniform_int_distribution<std::size_t> node(0, m - 1);
  std::uniform_int_distribution<int> pick_n(1, n_hi);
  std::uniform_int_distribution<std::size_t> pick_tau(0, b_tau.size() - 1);
  TriangleResult r;
  auto one = [&](std::size_t x, std::size_t y, std::size_t z, int n, std::size_t ti) {
    const Kernel& fn = powers[static_cast<std::size_t>(n - 1)];
    r.first = std::max(r.first, b0(x, z) - tropical_add(fn(x, y), b0(y, z)));
    const auto& bt = b_tau[ti];
    const double f_tau = bt.tau_index == 0 ? fn(y, z) : compose_entry(fn, pk.prefix(bt.tau_index), y, z);
    r.second = std::max(r.second, bt(x, z) - tropical_add(b0(x, y), f_tau));
  };
  for (std::size_t a : forced_nodes) one(a, a, a, 1, 0);
  for (int s = 0; s < samples; ++s) one(node(rng), node(rng), node(rng), pick_n(rng), pick_tau(rng));
  return r;
}

/// max over sampled slice pairs of w(x1,s1) - w(x2,s2) - Phi_{s2,s1}(x2,x1).
/// `w[j]` is the candidate on slice j/S, j = 0..S-1. Each node in `focus`
/// is additionally paired, on slice 0, with every node of slice 0.
template <class Kernel>
double check_domination(const std::vector<ValueFunction>& w, const SlicePotential<Kernel>& phi, int samples,
                        std::mt19937_64& rng, const std::vector<std::size_t>& focus = {}) {
  if (w.empty()) throw ArgumentError("check_domination: no slices");
  const std::size_t m = w.front().size();
  std::uniform_int_distribution<std::size_t> node(0, m - 1);
  std::uniform_int_distribution<int> slice(0, static_cast<int>(w.size()) - 1);
  double worst = -kBig;
  for (std::size_t x1 : focus)
    for (std::size_t x2 = 0; x2 < m; ++x2) worst = std::max(worst, w[0][x1] - w[0][x2] - phi(0, x2, 0, x1));
  for (int s = 0; s < samples; ++s) {
    const int j1 = slice(rng);
    const std::size_t x1 = node(rng);
    // every eighth sample is a diagonal pair
    const int j2 = s % 8 == 0 ? j1 : slice(rng);
    const std::size_t x2 = s % 8 == 0 ? x1 : node(rng);
    worst = std::max(worst, w[j1][x1] - w[j2][x2] - phi(j2, x2, j1, x1));
  }
  return worst;
}

/// |ubar(end, tau) - ubar(start, 0) - action| along a backtracked path.
/// `ubar_slices[j]` holds ubar on slice j/S, j = 0..S.
inline double check_calibration(const std::vector<ValueFunction>& ubar_slices, const DiscretePath& path,
                                int tau_index) {
  if (path.steps() == 0) return 0.0;
  const double lhs = ubar_slices.at(static_cast<std::size_t>(tau_index))[path.end()];
  return std::abs(lhs - ubar_slices.front()[path.start()] - path.total_action);
}

struct LocalizationResult {
  /// Smallest n from which every checked horizon localizes (-1: never).
  int t0 = -1;
  int n_cap = 0;
  double radius = 0.0;
  /// For each n = 1..n_cap, max distance of middle-third nodes to the Aubry set.
  std::vector<double> middle_distance;
  bool ok() const { return t0 > 0 && n_cap - t0 >= 4; }
};

/// Backtracks T_n u minimizers ending at `endpoint` for n = 1..n_cap and
/// checks that nodes with times in [n/3, 2n/3] stay within `radius` of the
/// given Aubry nodes.
template <class Kernel>
LocalizationResult check_localization(const PeriodicKernels<Kernel>& pk, const ValueFunction& u,
                                      std::size_t endpoint, const std::vector<std::size_t>& aubry_nodes,
                                      double radius, int n_cap) {
  if (aubry_nodes.empty()) throw ArgumentError("check_localization: empty Aubry set");
  const int S = pk.steps_per_period();
  ForwardCache<Kernel> cache(pk, u, static_cast<std::size_t>(n_cap) * S);
  const TorusGrid& g = pk.grid();
  LocalizationResult r;
  r.n_cap = n_cap;
  r.radius = radius;
  for (int n = 1; n <= n_cap; ++n) {
    DiscretePath p = backtrack_minimizer(cache, endpoint, n, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      const double t = p.times[i];
      if (3.0 * t < n - 1e-12 || 3.0 * t > 2.0 * n + 1e-12) continue;
      double d = 1e300;
      for (std::size_t a : aubry_nodes) d = std::min(d, g.distance(p.nodes[i], a));
      worst = std::max(worst, d);
    }
    r.middle_distance.push_back(worst);
  }
  for (int n = n_cap; n >= 1 && r.middle_distance[static_cast<std::size_t>(n - 1)] <= radius; --n) r.t0 = n;
  return r;
}

}  // namespace wkam
