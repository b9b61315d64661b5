#include <gtest/gtest.h>

#include "fedgala/errors.hpp"
#include "fedgala/local_alignment.hpp"
#include "fedgala/variants.hpp"
#include "support/gradcheck.hpp"

using namespace fedgala;
using check::central_difference;
using check::relative_error;

namespace {

LayeredParams two_layers(Rng& rng) {
  LayeredParams p;
  p.add_layer("a", check::random_vector(rng, 4));
  p.add_layer("b", check::random_vector(rng, 3));
  return p;
}

double sum_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST(Reweight, FactorOneIsPlainSgd) {
  Rng rng(RngStream{1, 0});
  ClientState c{0, two_layers(rng), nullptr, {}, 0.1};
  LayeredParams expected = c.params;
  const UpdateDelta g{two_layers(rng), 0};
  const UpdateDelta ref{two_layers(rng), 0};
  reweight_sgd_step(c, g, &ref, 0.5, 1.0);
  axpy(-0.1, g.delta, expected);
  EXPECT_EQ(c.params, expected);
}

TEST(Reweight, UnalignedLayerMovesByFactor) {
  Rng rng(RngStream{2, 0});
  ClientState c{0, two_layers(rng), nullptr, {}, 0.1};
  const LayeredParams before = c.params;
  const UpdateDelta g{two_layers(rng), 0};
  UpdateDelta ref = g;
  for (double& v : ref.delta.values(0)) v = -v;
  const DiscardStats s = reweight_sgd_step(c, g, &ref, 0.0, 0.01);
  EXPECT_EQ(s.discarded, 1u);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_EQ(c.params.values(0)[i], before.values(0)[i] + (-0.1 * 0.01) * g.delta.values(0)[i]);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(c.params.values(1)[i], before.values(1)[i] + -0.1 * g.delta.values(1)[i]);
}

TEST(Reweight, VanishingFactorMatchesDiscard) {
  Rng rng(RngStream{3, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const LayeredParams p = two_layers(rng);
    const UpdateDelta g{two_layers(rng), 0};
    const UpdateDelta ref{two_layers(rng), 0};
    ClientState a{0, p, nullptr, {}, 0.1}, b{0, p, nullptr, {}, 0.1};
    const DiscardStats sa = reweight_sgd_step(a, g, &ref, 0.0, 1e-300);
    const DiscardStats sb = filtered_sgd_step(b, g, &ref, 0.0);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(sa, sb);
  }
}

TEST(Reweight, AlignedLayersMatchDiscardExactly) {
  Rng rng(RngStream{4, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const LayeredParams p = two_layers(rng);
    const UpdateDelta g{two_layers(rng), 0};
    const UpdateDelta ref{two_layers(rng), 0};
    ClientState a{0, p, nullptr, {}, 0.1}, b{0, p, nullptr, {}, 0.1};
    reweight_sgd_step(a, g, &ref, 0.0, 0.3);
    filtered_sgd_step(b, g, &ref, 0.0);
    for (std::size_t l = 0; l < 2; ++l)
      if (is_aligned(cosine(g.delta.values(l), ref.delta.values(l)), 0.0)) {
        EXPECT_EQ(a.params.layer(l), b.params.layer(l));
      }
  }
}

TEST(Reweight, FactorOutOfRangeThrows) {
  Rng rng(RngStream{5, 0});
  ClientState c{0, two_layers(rng), nullptr, {}, 0.1};
  const UpdateDelta g{two_layers(rng), 0};
  EXPECT_THROW(reweight_sgd_step(c, g, nullptr, 0.0, 0.0), PreconditionError);
  EXPECT_THROW(reweight_sgd_step(c, g, nullptr, 0.0, 1.5), PreconditionError);
  VariantConfig v;
  v.local_mode = LocalMode::Reweight;
  v.reweight_factor = 0.0;
  EXPECT_THROW(v.validate(), PreconditionError);
  VariantConfig neg;
  neg.prox_mu = -1.0;
  EXPECT_THROW(neg.validate(), PreconditionError);
}

TEST(L2Term, Examples) {
  LayeredParams p;
  p.add_layer("w", {1, -2});
  EXPECT_EQ(l2_grad_term(p, 0.0).delta, p.zeros_like());
  EXPECT_EQ(l2_grad_term(p, 0.5).delta.flatten(), (RealVec{1, -2}));
  EXPECT_THROW(l2_grad_term(p, -0.1), PreconditionError);
}

TEST(L2Term, MatchesFiniteDifferences) {
  Rng rng(RngStream{6, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const LayeredParams p = two_layers(rng);
    const double lambda = rng.uniform(0.0, 2.0);
    const RealVec fd =
        central_difference([&](const RealVec& v) { return lambda * sum_sq(v); }, p.flatten());
    EXPECT_LT(relative_error(l2_grad_term(p, lambda).delta.flatten(), fd), 1e-6);
  }
}

TEST(ProxTerm, Examples) {
  LayeredParams p, g;
  p.add_layer("w", {5});
  g.add_layer("w", {2});
  EXPECT_EQ(prox_grad_term(p, p, 0.3).delta, p.zeros_like());
  EXPECT_EQ(prox_grad_term(p, g, 0.0).delta, p.zeros_like());
  EXPECT_NEAR(prox_grad_term(p, g, 0.01).delta.flatten()[0], 0.06, 1e-15);
  LayeredParams wide;
  wide.add_layer("w", {1, 2});
  EXPECT_THROW(prox_grad_term(p, wide, 0.1), DimensionError);
}

TEST(ProxTerm, MatchesFiniteDifferences) {
  Rng rng(RngStream{7, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const LayeredParams p = two_layers(rng), g = two_layers(rng);
    const double mu = rng.uniform(0.0, 2.0);
    const RealVec gf = g.flatten();
    const RealVec fd = central_difference(
        [&](const RealVec& v) {
          double s = 0.0;
          for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] - gf[i]) * (v[i] - gf[i]);
          return mu * s;
        },
        p.flatten());
    EXPECT_LT(relative_error(prox_grad_term(p, g, mu).delta.flatten(), fd), 1e-6);
  }
}

TEST(ProxTerm, StepShrinksDrift) {
  Rng rng(RngStream{8, 0});
  const LayeredParams g = two_layers(rng);
  ClientState c{0, two_layers(rng), nullptr, {}, 0.1};
  const double before = subtract(c.params, g).delta.l2_norm();
  filtered_sgd_step(c, prox_grad_term(c.params, g, 0.5), nullptr, 0.0);
  EXPECT_LT(subtract(c.params, g).delta.l2_norm(), before);
}
