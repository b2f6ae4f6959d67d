#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wkam/errors.hpp"

namespace wkam {

/// Values entering tropical sums are kept on a dyadic lattice of this
/// spacing. Sums of lattice values below 2^12 in magnitude are exact in
/// binary64, so min-plus products are associative bit for bit.
inline constexpr int kQuantumExponent = 40;

inline double quantize(double v) {
  if (!std::isfinite(v)) return v;
  return std::ldexp(std::nearbyint(std::ldexp(v, kQuantumExponent)), -kQuantumExponent);
}

/// Distance on the circle R/Z.
inline double torus_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

/// Uniform grid on the flat torus T^dim with n nodes per axis.
/// Node (i0, i1) has coordinates (i0/n, i1/n) and flat index i0*n + i1.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(int dim, int n_per_axis) : dim_(dim), n_(n_per_axis) {
    if (dim != 1 && dim != 2) throw ArgumentError("TorusGrid: dim must be 1 or 2");
    if (n_per_axis < 1) throw ArgumentError("TorusGrid: n_per_axis must be positive");
  }

  int dim() const { return dim_; }
  int n_per_axis() const { return n_; }
  double spacing() const { return 1.0 / n_; }
  std::size_t size() const {
    return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  }

  std::array<int, 2> indices(std::size_t node) const {
    if (dim_ == 1) return {static_cast<int>(node), 0};
    return {static_cast<int>(node / n_), static_cast<int>(node % n_)};
  }

  std::size_t node(std::array<int, 2> idx) const {
    auto wrap = [this](int i) { return ((i % n_) + n_) % n_; };
    if (dim_ == 1) return static_cast<std::size_t>(wrap(idx[0]));
    return static_cast<std::size_t>(wrap(idx[0])) * n_ + wrap(idx[1]);
  }

  std::array<double, 2> coords(std::size_t node) const {
    auto idx = indices(node);
    return {idx[0] * spacing(), dim_ == 2 ? idx[1] * spacing() : 0.0};
  }

  /// Node nearest to a torus point (coordinates taken mod 1).
  std::size_t nearest(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != dim_)
      throw ArgumentError("TorusGrid::nearest: point dimension mismatch");
    std::array<int, 2> idx{0, 0};
    for (int a = 0; a < dim_; ++a)
      idx[a] = static_cast<int>(std::lround(point[a] * n_));
    return node(idx);
  }

  /// Torus distance between two nodes (Euclidean product of circle distances).
  double distance(std::size_t a, std::size_t b) const {
    auto ca = coords(a), cb = coords(b);
    double s = 0;
    for (int k = 0; k < dim_; ++k) {
      double d = torus_distance(ca[k], cb[k]);
      s += d * d;
    }
    return std::sqrt(s);
  }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  int dim_ = 1;
  int n_ = 1;
};

/// A real function sampled on the grid nodes, living on time slice time_tag.
struct ValueFunction {
  TorusGrid grid;
  std::vector<double> values;
  double time_tag = 0.0;

  ValueFunction() = default;
  ValueFunction(TorusGrid g, std::vector<double> v, double tag = 0.0)
      : grid(g), values(std::move(v)), time_tag(tag) {
    if (values.size() != grid.size())
      throw ArgumentError("ValueFunction: value count does not match grid size");
  }
  static ValueFunction constant(TorusGrid g, double c, double tag = 0.0) {
    return ValueFunction(g, std::vector<double>(g.size(), c), tag);
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
  std::size_t argmin() const {
    return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  }
};

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
  if (!(a == b)) throw ArgumentError(std::string(where) + ": grid mismatch");
}

/// Sup-norm distance between two functions on the same grid.
inline double sup_distance(const ValueFunction& a, const ValueFunction& b) {
  require_same_grid(a.grid, b.grid, "sup_distance");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline ValueFunction quantized(ValueFunction u) {
  for (auto& v : u.values) v = quantize(v);
  return u;
}

}  // namespace wkam
