#pragma once

#include <cstddef>
#include <vector>

#include "wkam/grid.hpp"
#include "wkam/tropical.hpp"

namespace wkam {

/// Cost kernel on T^2 that splits as K((y0,y1),(x0,x1)) = K0(y0,x0) + K1(y1,x1),
/// i.e. the tropical Kronecker sum of two 1-d kernels. Products, powers and
/// critical values factor axis by axis, so nothing of size M^2 is ever stored.
class ProductKernel {
 public:
  ProductKernel() = default;
  ProductKernel(CostKernel axis0, CostKernel axis1) : k0_(std::move(axis0)), k1_(std::move(axis1)) {
    if (k0_.grid().dim() != 1 || !(k0_.grid() == k1_.grid()))
      throw ArgumentError("ProductKernel: factors must share one 1-d grid");
    if (std::abs(k0_.t_start() - k1_.t_start()) > 1e-12 || std::abs(k0_.t_end() - k1_.t_end()) > 1e-12)
      throw ArgumentError("ProductKernel: factor time ranges differ");
    grid_ = TorusGrid(2, k0_.grid().n_per_axis());
  }

  static ProductKernel identity(TorusGrid grid, double t = 0.0) {
    TorusGrid line(1, grid.n_per_axis());
    return ProductKernel(CostKernel::identity(line, t), CostKernel::identity(line, t));
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  double t_start() const { return k0_.t_start(); }
  double t_end() const { return k0_.t_end(); }
  double duration() const { return k0_.duration(); }
  double normalization_offset() const { return k0_.normalization_offset() + k1_.normalization_offset(); }

  const CostKernel& factor(int axis) const { return axis == 0 ? k0_ : k1_; }

  double operator()(std::size_t y, std::size_t x) const {
    const int n = grid_.n_per_axis();
    return tropical_add(k0_(y / n, x / n), k1_(y % n, x % n));
  }

  /// Dense expansion (tests and dumps only; M^2 entries).
  CostKernel to_dense() const {
    const std::size_t m = size();
    std::vector<double> c(m * m);
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t x = 0; x < m; ++x) c[y * m + x] = (*this)(y, x);
    return CostKernel(grid_, t_start(), t_end(), std::move(c), normalization_offset());
  }

  friend bool operator==(const ProductKernel& a, const ProductKernel& b) {
    return a.k0_ == b.k0_ && a.k1_ == b.k1_;
  }

 private:
  TorusGrid grid_{2, 1};
  CostKernel k0_;
  CostKernel k1_;
};

/// Two-pass min-plus product: contract axis 0, then axis 1.
inline ValueFunction minplus_matvec(const ProductKernel& k, const ValueFunction& u) {
  require_same_grid(k.grid(), u.grid, "minplus_matvec");
  const std::size_t n = static_cast<std::size_t>(k.grid().n_per_axis());
  const CostKernel& k0 = k.factor(0);
  const CostKernel& k1 = k.factor(1);
  // tmp(x0, y1) = min_y0 u(y0, y1) + K0(y0, x0)
  std::vector<double> tmp(n * n, kBig);
  for (std::size_t y0 = 0; y0 < n; ++y0) {
    auto row = k0.row(y0);
    for (std::size_t x0 = 0; x0 < n; ++x0) {
      const double w = row[x0];
      if (w >= kBig) continue;
      double* t = tmp.data() + x0 * n;
      const double* uy = u.values.data() + y0 * n;
      for (std::size_t y1 = 0; y1 < n; ++y1) t[y1] = std::min(t[y1], uy[y1] + w);
    }
  }
  for (auto& v : tmp) v = saturate(v);
  // out(x0, x1) = min_y1 tmp(x0, y1) + K1(y1, x1)
  std::vector<double> out(n * n, kBig);
  for (std::size_t x0 = 0; x0 < n; ++x0) {
    double* o = out.data() + x0 * n;
    const double* t = tmp.data() + x0 * n;
    for (std::size_t y1 = 0; y1 < n; ++y1) {
      if (t[y1] >= kBig) continue;
      auto row = k1.row(y1);
      for (std::size_t x1 = 0; x1 < n; ++x1) o[x1] = std::min(o[x1], t[y1] + row[x1]);
    }
  }
  for (auto& v : out) v = saturate(v);
  return ValueFunction(u.grid, std::move(out), std::fmod(u.time_tag + k.duration(), 1.0));
}

inline ProductKernel minplus_matmul(const ProductKernel& a, const ProductKernel& b) {
  return ProductKernel(minplus_matmul(a.factor(0), b.factor(0)), minplus_matmul(a.factor(1), b.factor(1)));
}

inline ProductKernel minplus_power(const ProductKernel& k, int power) {
  return ProductKernel(minplus_power(k.factor(0), power), minplus_power(k.factor(1), power));
}

/// Shifts the whole critical value onto axis 0.
inline ProductKernel normalize(const ProductKernel& k, double c_est) {
  return ProductKernel(normalize(k.factor(0), c_est), k.factor(1));
}

/// Normalizes each axis by its own critical value.
inline ProductKernel normalize_axes(const ProductKernel& k, double c0, double c1) {
  return ProductKernel(normalize(k.factor(0), c0), normalize(k.factor(1), c1));
}

inline double compose_entry(const ProductKernel& a, const ProductKernel& b, std::size_t y, std::size_t x) {
  const std::size_t n = static_cast<std::size_t>(a.grid().n_per_axis());
  return tropical_add(compose_entry(a.factor(0), b.factor(0), y / n, x / n),
                      compose_entry(a.factor(1), b.factor(1), y % n, x % n));
}

/// A joint cycle projects onto closed walks of equal length on each axis,
/// so the minimum mean is the sum of the per-axis minima.
inline double min_mean_cycle(const ProductKernel& k) {
  return min_mean_cycle(k.factor(0)) + min_mean_cycle(k.factor(1));
}

inline double karp_min_mean_cycle(const ProductKernel& k) {
  return karp_min_mean_cycle(k.factor(0)) + karp_min_mean_cycle(k.factor(1));
}

}  // namespace wkam
