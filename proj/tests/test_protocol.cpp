#include <gtest/gtest.h>

#include <numeric>

#include "fedgala/errors.hpp"
#include "fedgala/io.hpp"
#include "fedgala/protocol.hpp"

using namespace fedgala;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c = parse_config(
      "protocol.rounds = 3\n"
      "protocol.local_epochs = 1\n"
      "protocol.batch_size = 16\n"
      "domains.samples = 64\n"
      "domains.features = 4\n"
      "eval.labeled_fractions = 0.3\n"
      "eval.epochs = 20\n");
  return c;
}

ClientData clients_of(const ExperimentConfig& c, std::size_t k) {
  const DomainFamily fam = make_family(c);
  ClientData out;
  for (std::size_t d = 0; d < k; ++d) out.push_back(std::make_shared<const DomainSample>(fam.domains[d]));
  return out;
}

}  // namespace

TEST(Protocol, ZeroRoundsReturnsInitialization) {
  ExperimentConfig c = small_config();
  c.rounds = 0;
  const ProtocolResult r = run_protocol(c, clients_of(c, 3));
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.final_global, r.initial);
}

TEST(Protocol, RecordsEveryRoundWithStepAccounting) {
  const ExperimentConfig c = small_config();
  const ProtocolResult r = run_protocol(c, clients_of(c, 3));
  ASSERT_EQ(r.records.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(r.records[t].round, t + 1);
    ASSERT_EQ(r.records[t].clients.size(), 3u);
    for (const auto& cl : r.records[t].clients) EXPECT_EQ(cl.steps, local_steps(64, 16, 1));
    EXPECT_EQ(r.records[t].weight_history.size(), 3u);
  }
  // First round has no reference, so nothing is filtered.
  EXPECT_EQ(r.records[0].clients[0].considered, 0u);
  EXPECT_GT(r.records[1].clients[0].considered, 0u);
}

TEST(Protocol, DisabledAlignmentEqualsFedavg) {
  ExperimentConfig g = small_config();
  g.tau = -1.0;
  g.agg_iterations = 0;
  ExperimentConfig f = g;
  f.algorithm = Algorithm::FedAvgSsl;
  const ClientData data = clients_of(g, 3);
  EXPECT_EQ(run_protocol(g, data).final_global, run_protocol(f, data).final_global);
}

TEST(Protocol, SingleClientFedavgIsCentralizedSgd) {
  ExperimentConfig c = small_config();
  c.algorithm = Algorithm::FedAvgSsl;
  c.clients = 1;
  c.local_epochs = 2;
  const ClientData data = clients_of(c, 1);
  const ProtocolResult r = run_protocol(c, data);

  // Oracle: plain minibatch SGD on the one client with the protocol's streams.
  const RngStream base{c.seed, 0};
  const EncoderSpec enc = c.resolved_encoder();
  LayeredParams p = init_encoder(enc, 4, base.derive(stream_tag::kInit));
  std::vector<std::size_t> order(64);
  for (std::size_t t = 1; t <= c.rounds; ++t) {
    const AffineAug aug = sample_augmentation(4, base.derive(stream_tag::kAugmentation, t));
    Rng rng(base.derive(stream_tag::kShuffle, 0).derive(t));
    for (std::size_t e = 0; e < c.local_epochs; ++e) {
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::size_t s = 0; s < 64; s += 16) {
        const std::span<const std::size_t> idx(order.data() + s, 16);
        const auto g = ssl_batch_gradient(enc, c.loss, p, make_contrastive_batch(*data[0], idx, aug));
        axpy(-c.learning_rate, g.grad.delta, p);
      }
    }
  }
  const RealVec a = r.final_global.flatten(), b = p.flatten();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Protocol, ThreadCountDoesNotChangeResults) {
  const ExperimentConfig c = small_config();
  const ClientData data = clients_of(c, 3);
  const ProtocolResult a = run_protocol(c, data, 1), b = run_protocol(c, data, 3);
  EXPECT_EQ(a.final_global, b.final_global);
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    EXPECT_EQ(a.records[t].weight_history, b.records[t].weight_history);
    EXPECT_EQ(a.records[t].global_param_norm, b.records[t].global_param_norm);
  }
}

TEST(Protocol, DivergenceNamesTheRound) {
  ExperimentConfig c = small_config();
  c.learning_rate = 1e300;
  try {
    run_protocol(c, clients_of(c, 3));
    FAIL();
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("round 1"), std::string::npos);
  }
}

TEST(Protocol, LocalOnlyNeverFilters) {
  ExperimentConfig c = small_config();
  c.algorithm = Algorithm::LocalOnly;
  const ProtocolResult r = run_protocol(c, clients_of(c, 3));
  for (const auto& rec : r.records) {
    EXPECT_TRUE(rec.weight_history.empty());
    EXPECT_EQ(rec.discard_ratio(), 0.0);
  }
  EXPECT_NE(r.final_global, r.initial);
}

TEST(Protocol, TrainingNeverEvaluatesLabels) {
  const ExperimentConfig c = small_config();
  const ClientData data = clients_of(c, 3);
  const std::uint64_t before = label_rule_evaluations();
  run_protocol(c, data);
  EXPECT_EQ(label_rule_evaluations(), before);
}

TEST(Experiment, LeaveOneDomainOutWithTwoDomains) {
  ExperimentConfig c = small_config();
  c.domain_count = 2;
  c.clients = 1;
  c.rho = {0.8, 0.6};
  const auto runs = leave_one_domain_out(c);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].target_domain, 0u);
  EXPECT_EQ(runs[0].training_domains, (std::vector<std::size_t>{1}));
  EXPECT_EQ(runs[1].training_domains, (std::vector<std::size_t>{0}));
  for (const auto& r : runs) {
    EXPECT_EQ(r.protocol.records.front().clients.size(), 1u);
    ASSERT_EQ(r.probes.size(), 1u);
  }
}

TEST(Experiment, LeaveOneDomainOutIsDeterministic) {
  const ExperimentConfig c = small_config();
  const auto a = leave_one_domain_out(c), b = leave_one_domain_out(c);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a[i].training_domains.size(), 3u);
    EXPECT_EQ(a[i].probes[0].accuracy, b[i].probes[0].accuracy);
  }
}

TEST(Sweep, CommunicationFrequencyRounds) {
  ExperimentConfig c = small_config();
  set_warnings_enabled(false);
  const auto rows = communication_frequency_sweep(c, 4, {1, 3, 4});
  set_warnings_enabled(true);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].rounds, 4u);
  EXPECT_EQ(rows[1].rounds, 1u);
  EXPECT_EQ(rows[2].rounds, 1u);
  EXPECT_EQ(rows[2].local_epochs, 4u);
}

TEST(Sweep, GridCoversProduct) {
  ExperimentConfig c = small_config();
  c.rounds = 1;
  c.sweep.tau = {-1.0, 0.0};
  c.sweep.local_epochs = {1, 2};
  c.sweep.batch_size = {16};
  c.sweep.agg_iterations = {0, 3};
  const auto rows = grid_sweep(c);
  EXPECT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows.front().tau, -1.0);
  EXPECT_EQ(rows.back().agg_iterations, 3u);
}
