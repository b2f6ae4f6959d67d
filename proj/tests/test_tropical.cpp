#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wkam/product_kernel.hpp"
#include "wkam/tropical.hpp"

using namespace wkam;

namespace {

CostKernel small(std::vector<double> c, double t0 = 0.0, double t1 = 1.0) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.size()))));
  return CostKernel(TorusGrid(1, n), t0, t1, std::move(c));
}

}  // namespace

TEST(Tropical, SaturatingAdd) {
  EXPECT_EQ(tropical_add(1.0, 2.0), 3.0);
  EXPECT_EQ(tropical_add(kBig, -5.0), kBig);
  EXPECT_EQ(tropical_add(-3.0, kBig), kBig);
  EXPECT_TRUE(is_blocked(kBig));
}

TEST(Tropical, MatvecHandExample) {
  // K = [[0,1],[2,0]], u = (0, 5): out = (min(0, 7), min(1, 5))
  auto k = small({0, 1, 2, 0});
  ValueFunction u(TorusGrid(1, 2), {0.0, 5.0});
  auto out = minplus_matvec(k, u);
  EXPECT_EQ(out.values, (std::vector<double>{0.0, 1.0}));
}

TEST(Tropical, MatmulMatchesNaiveTripleLoop) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 4;
    auto a = oracle::random_kernel(rng, n), b = oracle::random_kernel(rng, n);
    EXPECT_EQ(minplus_matmul(a, b), oracle::matmul(a, b));
  }
}

TEST(Tropical, AssociativityIsExactOnLattice) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = oracle::random_kernel(rng, 5), b = oracle::random_kernel(rng, 5), c = oracle::random_kernel(rng, 5);
    EXPECT_EQ(minplus_matmul(minplus_matmul(a, b), c), minplus_matmul(a, minplus_matmul(b, c)));
    auto u = oracle::random_function(rng, a.grid());
    EXPECT_EQ(minplus_matvec(b, minplus_matvec(a, u)).values, minplus_matvec(minplus_matmul(a, b), u).values);
  }
}

TEST(Tropical, IdentityIsNeutral) {
  std::mt19937_64 rng(13);
  auto a = oracle::random_kernel(rng, 6);
  auto id = CostKernel::identity(a.grid(), 0.0);
  EXPECT_EQ(minplus_matmul(a, id), a);
  EXPECT_EQ(minplus_matmul(id, a), a);
  EXPECT_EQ(minplus_power(a, 0), id);
}

TEST(Tropical, MatvecDistributesOverMin) {
  std::mt19937_64 rng(14);
  auto k = oracle::random_kernel(rng, 6);
  auto u = oracle::random_function(rng, k.grid()), v = oracle::random_function(rng, k.grid());
  ValueFunction m = u;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::min(u[i], v[i]);
  auto lhs = minplus_matvec(k, m);
  auto a = minplus_matvec(k, u), b = minplus_matvec(k, v);
  for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_EQ(lhs[i], std::min(a[i], b[i]));
}

TEST(Tropical, PowerDoublingEqualsIteration) {
  std::mt19937_64 rng(15);
  auto k = oracle::random_kernel(rng, 5, 0.1);
  CostKernel iter = k;
  for (int p = 2; p <= 13; ++p) {
    iter = minplus_matmul(iter, k);
    EXPECT_EQ(minplus_power(k, p), iter) << "p=" << p;
  }
}

TEST(Tropical, NonExpansiveAndConstantEquivariant) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    auto k = oracle::random_kernel(rng, 6, 0.0);
    auto u = oracle::random_function(rng, k.grid()), v = oracle::random_function(rng, k.grid());
    EXPECT_LE(sup_distance(minplus_matvec(k, u), minplus_matvec(k, v)), sup_distance(u, v));
    ValueFunction w = u;
    for (auto& x : w.values) x += 0.625;
    auto tu = minplus_matvec(k, u), tw = minplus_matvec(k, w);
    for (std::size_t i = 0; i < tu.size(); ++i) EXPECT_EQ(tw[i], tu[i] + 0.625);
  }
}

TEST(Tropical, NonContiguousTimesRejected) {
  auto a = small({0, 1, 1, 0}, 0.0, 0.25);
  auto b = small({0, 1, 1, 0}, 0.5, 0.75);
  EXPECT_THROW(minplus_matmul(a, b), ArgumentError);
}

TEST(Karp, HandExamples) {
  // self-loops 3 and 1, 2-cycle of mean 0.5
  auto k = small({3, 0, 1, 1});
  EXPECT_EQ(min_mean_cycle(k), 0.5);
  auto cyc = karp_critical_cycle(k);
  EXPECT_EQ(cyc.length, 2);
  EXPECT_EQ(cyc.weight, 1.0);
  // single node, single loop
  EXPECT_EQ(min_mean_cycle(small({-2.0})), -2.0);
}

TEST(Karp, MatchesSimpleCycleEnumeration) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    auto k = oracle::random_kernel(rng, 3 + trial % 4, 0.3);
    const double brute = oracle::min_mean_cycle(k);
    if (!std::isfinite(brute)) {
      EXPECT_THROW(karp_min_mean_cycle(k), NumericalError);
      continue;
    }
    EXPECT_NEAR(min_mean_cycle(k), brute, 1e-12) << "trial " << trial;
  }
}

TEST(Karp, AllBlockedThrows) {
  auto k = small({kBig, kBig, kBig, kBig});
  EXPECT_THROW(karp_min_mean_cycle(k), NumericalError);
}

TEST(Karp, ShiftByConstantIsExact) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    auto k = oracle::random_kernel(rng, 5, 0.2);
    if (!std::isfinite(oracle::min_mean_cycle(k))) continue;
    const double kappa = 0.3125;
    CostKernel s = k;
    for (auto& v : s.mutable_data())
      if (v < kBig) v += kappa;
    const auto a = karp_critical_cycle(k), b = karp_critical_cycle(s);
    // mean(b) = mean(a) + kappa, compared as exact rationals
    EXPECT_EQ(b.weight * a.length, (a.weight + kappa * a.length) * b.length);
    EXPECT_EQ(karp_min_mean_cycle(s) - karp_min_mean_cycle(k), -kappa);
  }
}

TEST(Normalize, RemovesCriticalValueAndInverts) {
  std::mt19937_64 rng(19);
  auto k = oracle::random_kernel(rng, 6, 0.0, 0.0, 1.0);
  const double c = karp_min_mean_cycle(k);
  auto n = normalize(k, c);
  EXPECT_NEAR(min_mean_cycle(n), 0.0, 1e-12);
  EXPECT_EQ(normalize(n, -c), k);
  // no linear drift in the diagonal minima
  CostKernel p = n;
  double lo = 1e300, hi = -1e300;
  for (int j = 1; j <= 200; ++j) {
    double d = kBig;
    for (std::size_t i = 0; i < p.size(); ++i) d = std::min(d, p(i, i));
    lo = std::min(lo, d / 1.0), hi = std::max(hi, d);
    p = minplus_matmul(p, n);
  }
  EXPECT_LT(hi - lo, 20.0);
  EXPECT_GE(lo, -1e-9);
}

TEST(ProductKernel, MatchesDenseExpansion) {
  std::mt19937_64 rng(20);
  auto a0 = oracle::random_kernel(rng, 4, 0.2), a1 = oracle::random_kernel(rng, 4, 0.2);
  auto b0 = oracle::random_kernel(rng, 4, 0.2), b1 = oracle::random_kernel(rng, 4, 0.2);
  ProductKernel a(a0, a1), b(b0, b1);
  auto da = a.to_dense(), db = b.to_dense();
  EXPECT_EQ(minplus_matmul(a, b).to_dense(), minplus_matmul(da, db));
  EXPECT_EQ(minplus_power(a, 5).to_dense(), minplus_power(da, 5));
  ValueFunction u = oracle::random_function(rng, a.grid());
  EXPECT_EQ(minplus_matvec(a, u).values, minplus_matvec(da, u).values);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) EXPECT_EQ(compose_entry(a, b, y, x), compose_entry(da, db, y, x));
  // dense Karp on the 16-node expansion; Karp itself is checked against enumeration above
  if (std::isfinite(oracle::min_mean_cycle(a0)) && std::isfinite(oracle::min_mean_cycle(a1))) {
    EXPECT_NEAR(min_mean_cycle(a), min_mean_cycle(da), 1e-12);
  }
}
