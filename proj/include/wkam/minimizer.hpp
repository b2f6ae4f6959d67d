#pragma once

#include <cstddef>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/grid.hpp"
#include "wkam/periodic_kernels.hpp"

namespace wkam {

/// Node sequence of a discrete minimizer; times[i] = i / S.
struct DiscretePath {
  std::vector<std::size_t> nodes;
  std::vector<double> times;
  double total_action = 0.0;

  std::size_t start() const { return nodes.front(); }
  std::size_t end() const { return nodes.back(); }
  std::size_t steps() const { return nodes.size() - 1; }
};

/// Forward values v_0 = u, v_{i+1} = v_i ⊗ K_{i mod S}, one per sub-step.
template <class Kernel>
class ForwardCache {
 public:
  ForwardCache() = default;
  ForwardCache(const PeriodicKernels<Kernel>& kernels, ValueFunction u, std::size_t substeps)
      : kernels_(&kernels) {
    values_.reserve(substeps + 1);
    values_.push_back(std::move(u));
    const std::size_t S = static_cast<std::size_t>(kernels.steps_per_period());
    for (std::size_t i = 0; i < substeps; ++i) values_.push_back(minplus_matvec(kernels.steps[i % S], values_.back()));
  }

  bool ready() const { return kernels_ != nullptr; }
  std::size_t substeps() const { return values_.empty() ? 0 : values_.size() - 1; }
  const ValueFunction& at(std::size_t i) const { return values_.at(i); }
  const PeriodicKernels<Kernel>& kernels() const { return *kernels_; }

 private:
  const PeriodicKernels<Kernel>* kernels_ = nullptr;
  std::vector<ValueFunction> values_;
};

/// Recovers an argmin node sequence ending at `endpoint` after k periods plus
/// tau_index sub-steps. Ties go to the lowest node index.
template <class Kernel>
DiscretePath backtrack_minimizer(const ForwardCache<Kernel>& cache, std::size_t endpoint, int k, int tau_index) {
  if (!cache.ready()) throw StateError("backtrack_minimizer: forward cache not built");
  const auto& kernels = cache.kernels();
  const int S = kernels.steps_per_period();
  if (k < 0 || tau_index < 0 || tau_index > S) throw ArgumentError("backtrack_minimizer: bad horizon");
  const std::size_t length = static_cast<std::size_t>(k) * S + tau_index;
  if (length > cache.substeps()) throw StateError("backtrack_minimizer: forward cache too short for horizon");
  const std::size_t m = kernels.grid().size();
  if (endpoint >= m) throw ArgumentError("backtrack_minimizer: endpoint out of range");

  DiscretePath path;
  path.nodes.assign(length + 1, 0);
  path.times.assign(length + 1, 0.0);
  path.nodes[length] = endpoint;
  for (std::size_t i = length; i > 0; --i) {
    const Kernel& step = kernels.steps[(i - 1) % S];
    const ValueFunction& prev = cache.at(i - 1);
    const std::size_t x = path.nodes[i];
    double best = kBig;
    std::size_t arg = 0;
    for (std::size_t y = 0; y < m; ++y) {
      const double c = tropical_add(prev[y], step(y, x));
      if (c < best) best = c, arg = y;
    }
    path.nodes[i - 1] = arg;
  }
  for (std::size_t i = 0; i <= length; ++i) path.times[i] = static_cast<double>(i) / S;
  for (std::size_t i = 0; i < length; ++i)
    path.total_action += kernels.steps[i % S](path.nodes[i], path.nodes[i + 1]);
  return path;
}

}  // namespace wkam
