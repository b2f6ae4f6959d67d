#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "wkam/kernel_build.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/periodic_kernels.hpp"

using namespace wkam;

namespace {
constexpr double kPi = std::numbers::pi;

// Closed-form action of the straight segment x0 -> x0 + d over [t0, t0+h]
// for the autonomous pendulum: v^2 h / 2 + a h - a (sin(2 pi (x0+d)) - sin(2 pi x0)) / (2 pi v).
double pendulum_segment_exact(double a, double x0, double d, double h) {
  const double v = d / h;
  double pot = a * h;
  if (std::abs(d) > 1e-15) pot -= a * (std::sin(2 * kPi * (x0 + d)) - std::sin(2 * kPi * x0)) / (2 * kPi * v);
  else pot -= a * h * std::cos(2 * kPi * x0);
  return 0.5 * v * v * h + pot;
}
}  // namespace

TEST(Catalog, BuildsAndValidates) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 1.0}, {"eps", 0.0}});
  EXPECT_EQ(p.dim, 1);
  EXPECT_FALSE(p.separable());
  auto e = catalog_get("example_4_1", {{"c", 0.5}});
  EXPECT_EQ(e.dim, 2);
  EXPECT_TRUE(e.separable());
  EXPECT_EQ(catalog_get("example_4_1_2d", {}).kind, SystemKind::example_4_1_2d);
  EXPECT_THROW(catalog_get("pendulum", {}), ConfigError);
  EXPECT_THROW(catalog_get("forced_pendulum_1d", {{"c", 1.0}}), ConfigError);
  EXPECT_THROW(catalog_get("forced_pendulum_1d", {{"a", -1.0}}), ConfigError);
  EXPECT_THROW(catalog_get("forced_pendulum_1d", {{"eps", 1.0}}), ConfigError);
  try {
    catalog_get("forced_pendulum_1d", {{"eps", 2.0}});
  } catch (const ConfigError& err) {
    EXPECT_EQ(err.key(), "eps");
  }
}

TEST(Catalog, LagrangianValues) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 1.0}});
  std::array<double, 1> x{0.0}, v{0.0};
  EXPECT_EQ(eval_lagrangian(p, x, v, 0.3), 0.0);
  x[0] = 0.5;
  v[0] = 2.0;
  EXPECT_DOUBLE_EQ(eval_lagrangian(p, x, v, 0.0), 2.0 + 2.0);
  auto f = catalog_get("forced_pendulum_1d", {{"a", 0.05}, {"eps", 0.2}});
  EXPECT_DOUBLE_EQ(eval_lagrangian(f, x, std::array<double, 1>{0.0}, 0.0), 0.05 * 2 * 1.2);
  // x = 0 is a critical point of V for every t
  EXPECT_EQ(potential(f, std::array<double, 1>{0.0}, 0.37), 0.0);
  auto e = catalog_get("example_4_1", {{"c", 0.5}});
  std::array<double, 2> x2{0.0, 0.3}, v2{0.0, 0.5};
  EXPECT_EQ(eval_lagrangian(e, x2, v2, 0.0), 0.0);
  EXPECT_THROW(eval_lagrangian(e, x, v, 0.0), ArgumentError);
  EXPECT_DOUBLE_EQ(eval_axis_term(e, 0, 0.5, 1.0, 0.0) + eval_axis_term(e, 1, 0.3, 1.5, 0.0),
                   eval_lagrangian(e, std::array<double, 2>{0.5, 0.3}, std::array<double, 2>{1.0, 1.5}, 0.0));
}

TEST(Catalog, ReferenceAndTent) {
  auto e = catalog_get("example_4_1", {{"c", 0.5}});
  EXPECT_TRUE(e.reference().aubry_is_circle);
  EXPECT_FALSE(e.reference().hyperbolic);
  TorusGrid g(2, 8);
  auto u = tent_initial_condition(g, 0.5, 0.3);
  EXPECT_EQ(u[g.node({3, 4})], quantize(0.3));
  EXPECT_EQ(u[g.node({3, 0})], 0.0);
  EXPECT_THROW(tent_initial_condition(g, 0.5, 0.5), ArgumentError);
}

TEST(OneStepCost, ConvergesToClosedFormUnderQuadratureRefinement) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 1.0}});
  const double h = 1.0 / 16;
  std::array<double, 1> from{0.125}, to{0.1875};
  const double exact = pendulum_segment_exact(1.0, 0.125, 0.0625, h);
  // composite midpoint rule: error falls by 4 per halving of the substep
  double prev = std::abs(one_step_cost(p, from, to, 0.0, h, 1) - exact);
  for (int sub : {2, 4, 8, 16, 32}) {
    const double err = std::abs(one_step_cost(p, from, to, 0.0, h, sub) - exact);
    EXPECT_NEAR(prev / err, 4.0, 0.1) << "substeps " << sub;
    prev = err;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(OneStepCost, WindingPicksShortLift) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 1.0}});
  std::array<double, 1> from{0.9375}, to{0.0625};
  const double h = 1.0 / 16;
  // forward across 0 (d = 0.125) beats backward (d = -0.875)
  EXPECT_NEAR(one_step_cost(p, from, to, 0.0, h, 64), pendulum_segment_exact(1.0, 0.9375, 0.125, h), 1e-6);
  EXPECT_THROW(one_step_cost(p, from, to, 0.0, 0.0, 4), ArgumentError);
}

TEST(StepKernels, EntriesMatchWindowedOneStepCost) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 0.05}, {"eps", 0.2}});
  TorusGrid g(1, 16);
  Discretization d{8, 4, 3.0, 1};
  auto steps = build_step_kernels(p, g, d);
  ASSERT_EQ(steps.size(), 8u);
  const int cells = static_cast<int>(std::floor(3.0 / 8 * 16 + 1e-9));
  for (int j = 0; j < 8; ++j) {
    EXPECT_DOUBLE_EQ(steps[j].t_start(), j / 8.0);
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) {
        const int off = static_cast<int>((x + 16 - y) % 16);
        const int dist = std::min(off, 16 - off);
        std::array<double, 1> a{g.coords(y)[0]}, b{g.coords(x)[0]};
        if (dist > cells) {
          EXPECT_EQ(steps[j](y, x), kBig);
        } else {
          EXPECT_EQ(steps[j](y, x), quantize(one_step_cost(p, a, b, j / 8.0, 1.0 / 8, 4)));
        }
      }
  }
}

TEST(StepKernels, ProductMatchesDenseBuild) {
  auto e = catalog_get("example_4_1", {{"c", 0.5}});
  TorusGrid g(2, 8);
  Discretization d{4, 4, 3.0, 1};
  auto dense = build_step_kernels(e, g, d);
  auto prod = build_product_step_kernels(e, g, d);
  for (std::size_t j = 0; j < dense.size(); ++j) {
    const auto pd = prod[j].to_dense();
    for (std::size_t i = 0; i < pd.data().size(); ++i) {
      const double a = pd.data()[i], b = dense[j].data()[i];
      if (b >= kBig) EXPECT_EQ(a, kBig);
      else EXPECT_NEAR(a, b, 1e-11);
    }
  }
}

TEST(StepKernels, ValidationRejectsBadDiscretizations) {
  auto p = catalog_get("forced_pendulum_1d", {});
  EXPECT_THROW(build_step_kernels(p, TorusGrid(1, 4), Discretization{}), ConfigError);
  EXPECT_THROW(build_step_kernels(p, TorusGrid(1, 16), Discretization{2, 8, 3.0, 1}), ConfigError);
  EXPECT_THROW(build_step_kernels(p, TorusGrid(1, 16), Discretization{16, 8, 0.5, 1}), ConfigError);
  EXPECT_THROW(build_step_kernels(p, TorusGrid(2, 16), Discretization{}), ArgumentError);
}

TEST(PeriodProducts, PrefixSuffixAndPeriod) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 0.1}, {"eps", 0.2}});
  TorusGrid g(1, 8);
  auto steps = build_step_kernels(p, g, Discretization{4, 2, 3.0, 1});
  auto pp = period_kernel(steps);
  ASSERT_EQ(pp.prefix.size(), 5u);
  ASSERT_EQ(pp.suffix.size(), 5u);
  EXPECT_EQ(pp.prefix[0], CostKernel::identity(g));
  CostKernel direct = steps[0];
  for (int j = 1; j < 4; ++j) direct = minplus_matmul(direct, steps[j]);
  EXPECT_EQ(pp.period(), direct);
  for (int j = 0; j <= 4; ++j) EXPECT_EQ(minplus_matmul(pp.prefix[j], pp.suffix[j]), direct) << j;
  std::vector<CostKernel> gap{steps[0], steps[2]};
  EXPECT_THROW(period_kernel(gap), ArgumentError);
}

TEST(PeriodicKernels, NormalizedPeriodHasZeroMeanCycle) {
  auto e = catalog_get("example_4_1", {{"c", 0.5}});
  auto pk = prepare_kernels(build_product_step_kernels(e, TorusGrid(2, 12), Discretization{4, 4, 3.0, 1}));
  EXPECT_NEAR(min_mean_cycle(pk.period()), 0.0, 1e-12);
  auto p = catalog_get("forced_pendulum_1d", {{"a", 0.025}});
  auto pd = prepare_kernels(build_step_kernels(p, TorusGrid(1, 16), Discretization{8, 4, 3.0, 1}));
  EXPECT_NEAR(min_mean_cycle(pd.period()), 0.0, 1e-12);
  EXPECT_EQ(pd.c_est, 0.0);
}

TEST(WindowAudit, NoBoundaryHitsAtDefaults) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 0.025}});
  auto steps = build_step_kernels(p, TorusGrid(1, 32), Discretization{8, 4, 3.0, 1});
  auto audit = audit_velocity_window(steps, Discretization{8, 4, 3.0, 1});
  EXPECT_TRUE(audit.ok());
  EXPECT_GT(audit.boundary_cells, 0);
}

TEST(KernelDump, RoundTripsBitExactly) {
  auto p = catalog_get("forced_pendulum_1d", {{"a", 0.5}, {"eps", 0.1}});
  auto pk = prepare_kernels(build_step_kernels(p, TorusGrid(1, 8), Discretization{4, 2, 3.0, 1}));
  const auto path = (std::filesystem::temp_directory_path() / "wkam_dump_test.bin").string();
  write_kernel_dump(path, pk.raw_period, 4);
  auto back = read_kernel_dump(path);
  EXPECT_EQ(back.kernel, pk.raw_period);
  EXPECT_EQ(back.steps_per_period, 4);
  EXPECT_EQ(back.kernel.t_start(), pk.raw_period.t_start());
  EXPECT_EQ(back.kernel.t_end(), pk.raw_period.t_end());
  // header layout: magic, 4 x u32, 2 x f64, then 64 doubles
  EXPECT_EQ(std::filesystem::file_size(path), 4u + 16u + 16u + 64u * 8u);
  std::filesystem::remove(path);
}
