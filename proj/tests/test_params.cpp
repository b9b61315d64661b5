#include <gtest/gtest.h>

#include <sstream>

#include "fedgala/errors.hpp"
#include "fedgala/params.hpp"
#include "support/gradcheck.hpp"

using namespace fedgala;

namespace {

LayeredParams two_layers(RealVec a, RealVec b) {
  LayeredParams p;
  p.add_layer("a", std::move(a));
  p.add_layer("b", std::move(b));
  return p;
}

}  // namespace

TEST(LayeredParams, ShapeAndLookup) {
  const auto p = two_layers({1, 2, 3}, {4});
  EXPECT_EQ(p.layer_count(), 2u);
  EXPECT_EQ(p.total_size(), 4u);
  EXPECT_EQ(p.index_of("b"), 1u);
  EXPECT_EQ(p.flatten(), (RealVec{1, 2, 3, 4}));
  EXPECT_TRUE(p.same_shape(two_layers({0, 0, 0}, {0})));
  EXPECT_FALSE(p.same_shape(two_layers({0, 0}, {0})));
  EXPECT_THROW(p.require_same_shape(two_layers({0}, {0}), "test"), DimensionError);
  LayeredParams q;
  q.add_layer("a", {1});
  EXPECT_THROW(q.add_layer("a", {2}), DimensionError);
}

TEST(LayeredParams, ArithmeticMatchesBruteForce) {
  Rng rng(RngStream{1, 0});
  const auto a = two_layers(check::random_vector(rng, 5), check::random_vector(rng, 2));
  const auto b = two_layers(check::random_vector(rng, 5), check::random_vector(rng, 2));
  const UpdateDelta d = subtract(a, b, 7);
  EXPECT_EQ(d.round, 7u);
  const RealVec fa = a.flatten(), fb = b.flatten(), fd = d.delta.flatten();
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(fd[i], fa[i] - fb[i]);
  const RealVec back = add(b, d).flatten();
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(back[i], fb[i] + fd[i]);
  EXPECT_EQ(subtract(a, a).delta, a.zeros_like());
  EXPECT_THROW(subtract(a, two_layers({1}, {1})), DimensionError);
}

TEST(LayeredParams, FlatCosineConcatenatesLayers) {
  const auto u = two_layers({1, 0}, {0});
  const auto v = two_layers({0, 0}, {5});
  EXPECT_EQ(flat_cosine(u, v), 0.0);
  EXPECT_NEAR(flat_cosine(u, two_layers({1, 0}, {1})), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(LayeredParams, HashTracksValues) {
  auto p = two_layers({1, 2}, {3});
  const auto h = p.hash();
  EXPECT_EQ(h, two_layers({1, 2}, {3}).hash());
  p.values(1)[0] = 3.0000000001;
  EXPECT_NE(h, p.hash());
}

TEST(Checkpoint, RoundTripsExactly) {
  Rng rng(RngStream{2, 0});
  const auto p = two_layers(check::random_vector(rng, 17), check::random_vector(rng, 3));
  std::stringstream buf;
  write_checkpoint(buf, p);
  EXPECT_EQ(read_checkpoint(buf), p);
}

TEST(Checkpoint, TruncatedInputThrows) {
  const auto p = two_layers({1, 2, 3}, {4});
  std::stringstream buf;
  write_checkpoint(buf, p);
  std::string bytes = buf.str();
  bytes.resize(bytes.size() - 4);
  std::stringstream cut(bytes);
  EXPECT_THROW(read_checkpoint(cut), Error);
}
