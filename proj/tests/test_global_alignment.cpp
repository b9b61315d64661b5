#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fedgala/errors.hpp"
#include "fedgala/global_alignment.hpp"
#include "support/gradcheck.hpp"

using namespace fedgala;

namespace {

UpdateDelta delta_of(RealVec a, RealVec b = {}) {
  LayeredParams p;
  p.add_layer("a", std::move(a));
  if (!b.empty()) p.add_layer("b", std::move(b));
  return UpdateDelta{std::move(p), 0};
}

std::vector<UpdateDelta> random_updates(Rng& rng, std::size_t k) {
  std::vector<UpdateDelta> out;
  for (std::size_t i = 0; i < k; ++i)
    out.push_back(delta_of(check::random_vector(rng, 5), check::random_vector(rng, 3)));
  return out;
}

}  // namespace

TEST(ClientUpdates, Examples) {
  Rng rng(RngStream{1, 0});
  const LayeredParams g = delta_of(check::random_vector(rng, 4)).delta;
  const LayeredParams c = delta_of(check::random_vector(rng, 4)).delta;
  const auto u = client_updates({g, c}, g, 5);
  EXPECT_EQ(u[0].delta, g.zeros_like());
  EXPECT_EQ(u[1].round, 5u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(u[1].delta.values(0)[i], c.values(0)[i] - g.values(0)[i]);
}

TEST(Fedavg, Examples) {
  EXPECT_EQ(fedavg_aggregate({delta_of({2}), delta_of({0})}).delta, delta_of({1}).delta);
  const UpdateDelta u = delta_of({0.3, -1.7}, {4});
  EXPECT_EQ(fedavg_aggregate({u, u, u}).delta, u.delta);
  const RealVec w{0.25, 0.75};
  EXPECT_EQ(fedavg_aggregate({delta_of({4}), delta_of({0})}, w).delta, delta_of({1}).delta);
  EXPECT_THROW(fedavg_aggregate({delta_of({1}), delta_of({1, 2})}), DimensionError);
}

TEST(AlignedAggregate, IdenticalUpdatesAreFixedPoint) {
  const UpdateDelta u = delta_of({0.3, -1.7}, {4});
  const auto r = aligned_aggregate({u, u, u}, 3);
  EXPECT_EQ(r.final_update.delta, u.delta);
  ASSERT_EQ(r.weights_per_iteration.size(), 3u);
  for (const auto& w : r.weights_per_iteration)
    for (double v : w) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(AlignedAggregate, OrthogonalPair) {
  const auto r = aligned_aggregate({delta_of({1, 0}), delta_of({0, 1})}, 1);
  EXPECT_EQ(r.weights_per_iteration[0], (RealVec{0.5, 0.5}));
  EXPECT_EQ(r.final_update.delta, delta_of({0.5, 0.5}).delta);
}

TEST(AlignedAggregate, OpposedPairUsesZeroCosine) {
  const auto r = aligned_aggregate({delta_of({1, 2}), delta_of({-1, -2})}, 1);
  EXPECT_EQ(r.weights_per_iteration[0], (RealVec{0.5, 0.5}));
  EXPECT_EQ(r.final_update.delta, delta_of({0, 0}).delta);
  EXPECT_FALSE(r.fallback_used);
}

TEST(AlignedAggregate, ZeroIterationsIsFedavg) {
  Rng rng(RngStream{2, 0});
  const auto u = random_updates(rng, 4);
  const auto r = aligned_aggregate(u, 0);
  EXPECT_EQ(r.final_update, fedavg_aggregate(u));
  EXPECT_TRUE(r.weights_per_iteration.empty());
}

TEST(AlignedAggregate, WeightsNormalizedEveryIteration) {
  Rng rng(RngStream{3, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = aligned_aggregate(random_updates(rng, 1 + rng.below(6)), 1 + rng.below(7));
    for (const auto& w : r.weights_per_iteration) {
      double s = 0.0;
      for (double v : w) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(AlignedAggregate, PermutationEquivariant) {
  Rng rng(RngStream{4, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = random_updates(rng, 5);
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    rng.shuffle(perm);
    std::vector<UpdateDelta> p;
    for (std::size_t i : perm) p.push_back(u[i]);
    const auto a = aligned_aggregate(u, 3), b = aligned_aggregate(p, 3);
    for (std::size_t it = 0; it < 3; ++it)
      for (std::size_t i = 0; i < 5; ++i)
        EXPECT_NEAR(b.weights_per_iteration[it][i], a.weights_per_iteration[it][perm[i]], 1e-12);
    EXPECT_LT(check::relative_error(a.final_update.delta.flatten(), b.final_update.delta.flatten()),
              1e-12);
  }
}

TEST(AlignedAggregate, PositiveScaleInvariance) {
  Rng rng(RngStream{5, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = random_updates(rng, 4);
    const double c = rng.uniform(0.1, 10.0);
    std::vector<UpdateDelta> s = u;
    for (auto& d : s)
      for (std::size_t l = 0; l < d.delta.layer_count(); ++l)
        for (double& v : d.delta.values(l)) v *= c;
    const auto a = aligned_aggregate(u, 3), b = aligned_aggregate(s, 3);
    for (std::size_t it = 0; it < 3; ++it)
      for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NEAR(a.weights_per_iteration[it][i], b.weights_per_iteration[it][i], 1e-12);
    RealVec scaled = a.final_update.delta.flatten();
    for (double& v : scaled) v *= c;
    EXPECT_LT(check::relative_error(scaled, b.final_update.delta.flatten()), 1e-12);
  }
}

TEST(AlignedAggregate, AlignedClientsDominate) {
  const UpdateDelta u = delta_of({1, 0, 0});
  const UpdateDelta v = delta_of({0, 1, 0});
  const auto r = aligned_aggregate({u, u, v}, 3);
  const RealVec& w = r.weights_per_iteration.back();
  EXPECT_LT(w[2], w[0]);
  EXPECT_LT(w[2], w[1]);
}

TEST(AlignedAggregate, StaysInConvexHull) {
  Rng rng(RngStream{6, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = random_updates(rng, 3);
    const RealVec f = aligned_aggregate(u, 3).final_update.delta.flatten();
    for (std::size_t j = 0; j < f.size(); ++j) {
      double lo = 1e300, hi = -1e300;
      for (const auto& d : u) {
        lo = std::min(lo, d.delta.flatten()[j]);
        hi = std::max(hi, d.delta.flatten()[j]);
      }
      EXPECT_GE(f[j], lo - 1e-12);
      EXPECT_LE(f[j], hi + 1e-12);
    }
  }
}

TEST(ApplyGlobalUpdate, Examples) {
  Rng rng(RngStream{7, 0});
  const LayeredParams g = delta_of(check::random_vector(rng, 4), check::random_vector(rng, 2)).delta;
  EXPECT_EQ(apply_global_update(g, UpdateDelta{g.zeros_like(), 0}), g);
  LayeredParams neg = g;
  for (std::size_t l = 0; l < neg.layer_count(); ++l)
    for (double& v : neg.values(l)) v = -v;
  EXPECT_EQ(apply_global_update(g, UpdateDelta{neg, 0}), g.zeros_like());
  const LayeredParams u = delta_of(check::random_vector(rng, 4), check::random_vector(rng, 2)).delta;
  const RealVec sum = apply_global_update(g, UpdateDelta{u, 0}).flatten();
  for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_EQ(sum[i], g.flatten()[i] + u.flatten()[i]);
  EXPECT_THROW(apply_global_update(g, delta_of({1})), DimensionError);
}
