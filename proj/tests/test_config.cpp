#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "fedgala/config.hpp"
#include "fedgala/errors.hpp"

using namespace fedgala;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, DefaultsMatchDeskSetup) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(c.rounds, 100u);
  EXPECT_EQ(c.local_epochs, 7u);
  EXPECT_EQ(c.batch_size, 128u);
  EXPECT_EQ(c.tau, 0.0);
  EXPECT_EQ(c.agg_iterations, 3u);
  EXPECT_EQ(c.clients, 3u);
  EXPECT_EQ(c.resolved_target(), 3u);
  EXPECT_EQ(c.resolved_encoder().arch, MlpArch::default_for(8));
}

TEST(Config, ParsesValuesAndComments) {
  const ExperimentConfig c = parse_config(
      "# comment line\n"
      "seed = 42\n"
      "protocol.tau = -0.25   # trailing\n"
      "  protocol.rounds=5\n"
      "\n"
      "algorithm.name = fedgala_prox\n"
      "algorithm.prox_mu = 0.01\n"
      "eval.labeled_fractions = 0.1, 0.3, 0.5\n"
      "eval.target_domain = 0\n"
      "encoder.arch = 8, 4\n"
      "protocol.size_weighted_fedavg = true\r\n");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.tau, -0.25);
  EXPECT_EQ(c.rounds, 5u);
  EXPECT_EQ(c.algorithm, Algorithm::FedGaLAProx);
  EXPECT_EQ(c.variant().prox_mu, 0.01);
  EXPECT_EQ(c.labeled_fractions, (std::vector<double>{0.1, 0.3, 0.5}));
  EXPECT_EQ(c.resolved_target(), 0u);
  EXPECT_EQ(c.encoder.arch.widths, (std::vector<std::size_t>{8, 4}));
  EXPECT_TRUE(c.size_weighted_fedavg);
  EXPECT_EQ(parse_config("eval.target_domain = last").resolved_target(), 3u);
}

TEST(Config, ErrorsNameLineAndKey) {
  const std::string bad_value = error_of("seed = 1\nprotocol.rounds = many\n");
  EXPECT_NE(bad_value.find("line 2"), std::string::npos);
  EXPECT_NE(bad_value.find("protocol.rounds"), std::string::npos);
  const std::string no_equals = error_of("\n\nprotocol.tau 0.5\n");
  EXPECT_NE(no_equals.find("line 3"), std::string::npos);
  EXPECT_NE(error_of("protocol.learning_rate = nan").find("protocol.learning_rate"), std::string::npos);
  EXPECT_NE(error_of("algorithm.name = fedsgd").find("algorithm.name"), std::string::npos);
}

TEST(Config, UnknownKeyListsValidKeys) {
  const std::string e = error_of("protocol.tua = 0\n");
  EXPECT_NE(e.find("line 1: unknown key 'protocol.tua'"), std::string::npos);
  for (const std::string& k : config_keys()) EXPECT_NE(e.find("\n  " + k), std::string::npos) << k;
}

TEST(Config, ValidationRejectsInconsistentSettings) {
  EXPECT_NE(error_of("protocol.tau = 1.5").find("protocol.tau"), std::string::npos);
  EXPECT_NE(error_of("protocol.clients = 4").find("protocol.clients"), std::string::npos);
  EXPECT_NE(error_of("domains.rho = 0.5, 0.5").find("domains.rho"), std::string::npos);
  EXPECT_NE(error_of("encoder.kind = one_layer").find("loss.kind"), std::string::npos);
  EXPECT_NE(error_of("domains.samples = 129").find("protocol.batch_size"), std::string::npos);
  EXPECT_NE(error_of("theory.cov_grid = 0.1, 0.5").find("theory.cov_grid"), std::string::npos);
  EXPECT_NE(error_of("algorithm.name = fedgala_reweight\nalgorithm.reweight_factor = 0")
                .find("algorithm.reweight_factor"),
            std::string::npos);
}

TEST(Config, CanonicalFormRoundTrips) {
  const ExperimentConfig c = parse_config(
      "seed = 9\nprotocol.tau = 0.1\nprotocol.learning_rate = 0.1\nalgorithm.name = local_only\n"
      "domains.rho = 0.3\nsweep.mode = comm_frequency\ntheory.summary = trace\n");
  const std::string text = canonical_config(c);
  EXPECT_EQ(canonical_config(parse_config(text)), text);
  EXPECT_NE(text.find("protocol.learning_rate = 0.10000000000000001\n"), std::string::npos);
  EXPECT_NE(text.find("encoder.arch = 8,32,16\n"), std::string::npos);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n' ? 1 : 0;
  EXPECT_EQ(lines, config_keys().size());
}

TEST(Config, MissingFile) {
  try {
    load_config(std::filesystem::temp_directory_path() / "fedgala_no_such_file.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("file not found"), std::string::npos);
  }
}
