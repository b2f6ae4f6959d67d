#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wkam/pipeline.hpp"

using namespace wkam;

namespace {

RunConfig pendulum(int n, int s, double a = 0.025, double eps = 0.0) {
  RunConfig c;
  c.a = a;
  c.eps = eps;
  c.n_per_axis = n;
  c.steps_per_period = s;
  c.substeps = 4;
  c.n_max = 20;
  c.check_samples = 2000;
  return c;
}

RunConfig plane(int n, int s) {
  RunConfig c;
  c.system_name = "example_4_1";
  c.n_per_axis = n;
  c.steps_per_period = s;
  c.substeps = 4;
  c.op = "classic";
  c.n_max = 20;
  c.check_samples = 2000;
  return c;
}

}  // namespace

TEST(Operators, SequenceAndWindowMin) {
  auto sys = build_system<CostKernel>(pendulum(16, 8, 0.5, 0.2));
  std::mt19937_64 rng(3);
  const auto u = oracle::random_function(rng, sys.grid);
  const auto seq = lo_sequence(sys.pk.period(), u, 12);
  ASSERT_EQ(seq.size(), 13u);
  for (int k = 0; k <= 12; ++k) EXPECT_EQ(seq[k].values, lo_iterate(sys.pk.period(), u, k).values);
  for (int n = 0; n <= 6; ++n) {
    const auto w = window_min(seq, n);
    for (std::size_t x = 0; x < u.size(); ++x) {
      double best = kBig;
      for (int k = n; k <= 2 * n; ++k) best = std::min(best, seq[k][x]);
      EXPECT_EQ(w[x], best);
    }
    EXPECT_EQ(new_lo_apply(sys.pk, u, n, 0).values, w.values);
    EXPECT_EQ(new_lo_apply(sys.pk, u, n, 3).values, minplus_matvec(sys.pk.prefix(3), w).values);
  }
  EXPECT_THROW(window_min(seq, 7), ArgumentError);
  const auto surf = u_surface(sys.pk, u, 2);
  ASSERT_EQ(surf.size(), 9u);
  EXPECT_EQ(surf[5].values, new_lo_apply(sys.pk, u, 2, 5).values);
}

TEST(FixedPoint, IsExactAndPeriodic) {
  auto sys = build_system<CostKernel>(pendulum(32, 8, 0.5, 0.2));
  const auto u = initial_function(sys.cfg, sys.grid);
  const auto fp = discrete_fixed_point(sys.pk.period(), u, 0.0, 100000);
  EXPECT_EQ(minplus_matvec(sys.pk.period(), fp.ubar).values, fp.ubar.values);
  const auto slices = fixed_point_slices(sys.pk, fp.ubar);
  ASSERT_EQ(slices.size(), 9u);
  EXPECT_EQ(slices.back().values, slices.front().values);
  // starting at the fixed point both operators are stationary
  const auto seq = lo_sequence(sys.pk.period(), fp.ubar, 10);
  for (int n = 0; n <= 5; ++n) {
    EXPECT_EQ(sup_distance(seq[n], fp.ubar), 0.0);
    EXPECT_EQ(sup_distance(window_min(seq, n), fp.ubar), 0.0);
  }
  EXPECT_THROW(discrete_fixed_point(sys.pk.period(), u, 0.0, 1), NumericalError);
}

TEST(Barrier, PendulumAubrySetIsTheHyperbolicPoint) {
  auto cfg = pendulum(32, 8);
  auto sys = build_system<CostKernel>(cfg);
  const auto b = configured_barrier(sys, 0);
  EXPECT_EQ(b.n_min, 32);
  EXPECT_EQ(b.n_max, 96);
  EXPECT_GT(b.eventual_period, 0);
  const auto a = aubry_detect(b, cfg.tol_aubry);
  EXPECT_TRUE(aubry_matches_reference(sys.spec, sys.grid, a));
  EXPECT_NE(std::find(a.nodes.begin(), a.nodes.end(), 0u), a.nodes.end());
  EXPECT_GT(a.diagonal[16], 1e-3);
  for (double d : a.diagonal) EXPECT_GE(d, -1e-12);
  EXPECT_THROW(aubry_detect(b, -1.0), NumericalError);
  EXPECT_THROW(aubry_detect(configured_barrier(sys, 2), 1e-6), ArgumentError);
  EXPECT_THROW(peierls_barrier(sys.pk, 0, 0, 4), ArgumentError);
  EXPECT_THROW(peierls_barrier(sys.pk, 9, 1, 4), ArgumentError);
}

TEST(Barrier, CesaroMeanDominatesTailMin) {
  auto sys = build_system<CostKernel>(pendulum(16, 8, 0.3, 0.2));
  const auto lo = peierls_barrier(sys.pk, 0, 16, 40);
  const auto mean = peierls_barrier(sys.pk, 0, 16, 40, BarrierMode::cesaro_check);
  EXPECT_EQ(mean.values.count(), 25u);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) EXPECT_GE(mean(y, x), lo(y, x) - 1e-12);
}

TEST(Barrier, RepresentsTheLimitOnBothSystems) {
  auto p = pendulum(32, 8, 0.05, 0.2);
  EXPECT_LE(with_system(p, [](const auto& s) { return representation_gap(s); }), 2 * p.tol_discretization);
  auto e = plane(12, 4);
  EXPECT_LE(with_system(e, [](const auto& s) { return representation_gap(s); }), 2 * e.tol_discretization);
}

TEST(Barrier, PlaneAubrySetIsACircle) {
  auto cfg = plane(12, 4);
  auto sys = build_system<ProductKernel>(cfg);
  const auto a = aubry_detect(configured_barrier(sys, 0), cfg.tol_aubry);
  EXPECT_TRUE(aubry_matches_reference(sys.spec, sys.grid, a));
  EXPECT_GE(a.nodes.size(), 12u);
}

TEST(Barrier, ProductAndDenseStorageAgree) {
  auto cfg = plane(8, 4);
  auto prod = build_system<ProductKernel>(cfg);
  auto dense = build_system<CostKernel>(cfg);
  EXPECT_DOUBLE_EQ(prod.pk.c_est, dense.pk.c_est);
  const auto bp = peierls_barrier(prod.pk, 2, 8, 16);
  const auto bd = peierls_barrier(dense.pk, 2, 8, 16);
  for (std::size_t y = 0; y < 64; y += 5)
    for (std::size_t x = 0; x < 64; ++x) EXPECT_NEAR(bp(y, x), bd(y, x), 1e-9);
}

TEST(SlicePotential, LoopsAreNonNegativeAfterNormalization) {
  auto sys = build_system<CostKernel>(pendulum(16, 8, 0.3, 0.2));
  const SlicePotential<CostKernel> phi(sys.pk, 3);
  for (int j = 0; j < 8; ++j)
    for (std::size_t x = 0; x < 16; ++x) EXPECT_GE(phi(j, x, j, x), -1e-12);
  EXPECT_THROW(SlicePotential<CostKernel>(sys.pk, 0), ArgumentError);
}

TEST(Checks, HoldOnTheFixedPointAndCatchACorruption) {
  auto sys = build_system<CostKernel>(pendulum(16, 8, 0.3, 0.2));
  const auto u = initial_function(sys.cfg, sys.grid);
  const auto fp = discrete_fixed_point(sys.pk.period(), u, 0.0, 100000);
  const auto slices = fixed_point_slices(sys.pk, fp.ubar);
  std::vector<ValueFunction> w(slices.begin(), slices.end() - 1);
  const SlicePotential<CostKernel> phi(sys.pk, 4);
  std::mt19937_64 rng(9);
  EXPECT_LE(check_domination(w, phi, 3000, rng), 1e-12);
  w.front()[0] += 0.1;
  EXPECT_GT(check_domination(w, phi, 10, rng, {0}), 0.05);

  ForwardCache<CostKernel> cache(sys.pk, fp.ubar, 5 * 8);
  for (int tau = 0; tau <= 8; ++tau)
    for (std::size_t x = 0; x < 16; x += 3)
      EXPECT_LE(check_calibration(slices, backtrack_minimizer(cache, x, 4, tau), tau), 1e-12);

  const auto b0 = peierls_barrier(sys.pk, 0, 16, 40);
  std::vector<BarrierField<CostKernel>> bt{b0, peierls_barrier(sys.pk, 4, 16, 40)};
  const auto l = check_barrier_triangles(sys.pk, b0, bt, 6, 3000, rng, {0});
  EXPECT_LE(l.max_violation(), 1e-12);
}

TEST(Checks, MinimizersLocalizeNearTheAubrySet) {
  auto cfg = pendulum(32, 8);
  auto sys = build_system<CostKernel>(cfg);
  const auto a = aubry_detect(configured_barrier(sys, 0), cfg.tol_aubry);
  const auto u = initial_function(cfg, sys.grid);
  const auto r = check_localization(sys.pk, u, sys.grid.nearest(std::array<double, 1>{0.5}), a.nodes, 0.1, 24);
  EXPECT_EQ(r.middle_distance.size(), 24u);
  EXPECT_TRUE(r.ok()) << "t0 = " << r.t0;
  EXPECT_THROW(check_localization(sys.pk, u, 0, {}, 0.1, 4), ArgumentError);
}

TEST(Checks, SuiteSummaryPassesOnSmallSystems) {
  for (const auto& cfg : {pendulum(16, 8), plane(12, 4)}) {
    const auto s = with_system(cfg, [](const auto& sys) { return run_checks(sys); });
    EXPECT_TRUE(s.all_pass()) << checks_text(s);
  }
  auto bad = pendulum(16, 8);
  bad.check_corrupt = true;
  EXPECT_FALSE(with_system(bad, [](const auto& sys) { return run_checks(sys); }).all_pass());
}

TEST(Convergence, ClassicAndNewShareTheLimitOnAutonomousSystems) {
  auto cfg = pendulum(16, 8, 0.3, 0.0);
  cfg.n_max = 30;
  const auto run = run_convergence(build_system<CostKernel>(cfg), true);
  ASSERT_EQ(run.classic_sup.size(), 31u);
  EXPECT_EQ(run.report.series.size(), 31u);
  EXPECT_LE(run.classic_sup.back(), 1e-12);
  EXPECT_LE(run.new_sup.back(), 1e-12);
  EXPECT_EQ(run.report.series.front().n, 0);
}
