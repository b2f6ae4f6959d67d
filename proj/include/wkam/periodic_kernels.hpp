#pragma once

#include <vector>

#include "wkam/kernel_build.hpp"
#include "wkam/product_kernel.hpp"
#include "wkam/tropical.hpp"

namespace wkam {

/// Normalized one-step kernels of a time-periodic system together with
/// their prefix/suffix products. Everything the operator layer needs.
template <class Kernel>
struct PeriodicKernels {
  std::vector<Kernel> steps;
  PeriodProducts<Kernel> products;
  Kernel raw_period;  // before normalization
  double c_est = 0.0;

  int steps_per_period() const { return static_cast<int>(steps.size()); }
  const TorusGrid& grid() const { return steps.front().grid(); }
  const Kernel& period() const { return products.period(); }
  /// F_{0, j/S}; j = 0 is the identity, j = S the period kernel.
  const Kernel& prefix(int j) const { return products.prefix.at(static_cast<std::size_t>(j)); }
  /// F_{j/S, 1}.
  const Kernel& suffix(int j) const { return products.suffix.at(static_cast<std::size_t>(j)); }
};

/// Measures the critical value of the raw steps with Karp and removes it.
inline PeriodicKernels<CostKernel> prepare_kernels(const std::vector<CostKernel>& raw_steps) {
  PeriodicKernels<CostKernel> pk;
  auto raw = period_kernel(raw_steps);
  pk.raw_period = raw.period();
  pk.c_est = karp_min_mean_cycle(pk.raw_period) + 0.0;  // no signed zero in reports
  pk.steps.reserve(raw_steps.size());
  for (const auto& s : raw_steps) pk.steps.push_back(normalize(s, pk.c_est));
  pk.products = period_kernel(pk.steps);
  return pk;
}

inline PeriodicKernels<ProductKernel> prepare_kernels(const std::vector<ProductKernel>& raw_steps) {
  PeriodicKernels<ProductKernel> pk;
  auto raw = period_kernel(raw_steps);
  pk.raw_period = raw.period();
  const double c0 = karp_min_mean_cycle(pk.raw_period.factor(0));
  const double c1 = karp_min_mean_cycle(pk.raw_period.factor(1));
  pk.c_est = c0 + c1 + 0.0;
  pk.steps.reserve(raw_steps.size());
  for (const auto& s : raw_steps) pk.steps.push_back(normalize_axes(s, c0, c1));
  pk.products = period_kernel(pk.steps);
  return pk;
}

}  // namespace wkam
