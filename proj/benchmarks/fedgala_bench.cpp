#include <benchmark/benchmark.h>

#include <memory>
#include <numeric>

#include "fedgala/domains.hpp"
#include "fedgala/encoders.hpp"
#include "fedgala/global_alignment.hpp"
#include "fedgala/local_alignment.hpp"
#include "fedgala/ssl_losses.hpp"

using namespace fedgala;

namespace {

Matrix random_embeddings(std::size_t rows, std::size_t cols) {
  Rng rng(RngStream{1, 0});
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

std::vector<UpdateDelta> random_updates(std::size_t k, std::size_t width) {
  Rng rng(RngStream{2, 0});
  std::vector<UpdateDelta> out;
  for (std::size_t i = 0; i < k; ++i) {
    LayeredParams p;
    RealVec v(width);
    for (double& x : v) x = rng.normal();
    p.add_layer("w", std::move(v));
    out.push_back(UpdateDelta{std::move(p), 0});
  }
  return out;
}

}  // namespace

static void BM_NtXent(benchmark::State& state) {
  const Matrix e = random_embeddings(2 * static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(ntxent_loss(e, 0.5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NtXent)->Arg(32)->Arg(128)->Arg(512);

static void BM_SslBatchGradient(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const DomainFamily fam = generate_family({uniform_spec(8, 0.7)}, b, RngStream{3, 0});
  std::vector<std::size_t> idx(b);
  std::iota(idx.begin(), idx.end(), 0);
  const ContrastiveBatch batch =
      make_contrastive_batch(fam.domains[0], idx, sample_augmentation(8, RngStream{3, 1}));
  const EncoderSpec enc{EncoderKind::Mlp, MlpArch::default_for(8)};
  const LayeredParams p = init_encoder(enc, 8, RngStream{3, 2});
  for (auto _ : state) benchmark::DoNotOptimize(ssl_batch_gradient(enc, LossSpec{}, p, batch));
}
BENCHMARK(BM_SslBatchGradient)->Arg(128);

static void BM_AlignedAggregate(benchmark::State& state) {
  const auto updates = random_updates(static_cast<std::size_t>(state.range(0)), 1000);
  for (auto _ : state) benchmark::DoNotOptimize(aligned_aggregate(updates, 3));
}
BENCHMARK(BM_AlignedAggregate)->Arg(3)->Arg(10)->Arg(50);

static void BM_LocalRound(benchmark::State& state) {
  const auto fam = generate_family({uniform_spec(8, 0.7)}, 2000, RngStream{4, 0});
  const auto data = std::make_shared<const DomainSample>(fam.domains[0]);
  LocalRoundOptions o;
  o.epochs = 1;
  o.encoder = EncoderSpec{EncoderKind::Mlp, MlpArch::default_for(8)};
  const LayeredParams prev = init_encoder(o.encoder, 8, RngStream{4, 1});
  const LayeredParams now = init_encoder(o.encoder, 8, RngStream{4, 2});
  const AffineAug aug = sample_augmentation(8, RngStream{4, 3});
  for (auto _ : state)
    benchmark::DoNotOptimize(local_round(ClientState{0, {}, data, RngStream{4, 4}, 0.05}, now, &prev, o, aug));
}
BENCHMARK(BM_LocalRound)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
