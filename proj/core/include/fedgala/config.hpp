#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedgala/encoders.hpp"
#include "fedgala/local_alignment.hpp"
#include "fedgala/ssl_losses.hpp"
#include "fedgala/theory.hpp"
#include "fedgala/variants.hpp"

namespace fedgala {

enum class Algorithm { FedGaLA, FedAvgSsl, FedGaLAReweight, FedGaLAL2, FedGaLAProx, LocalOnly };

const char* to_string(Algorithm a) noexcept;
Algorithm algorithm_from_string(std::string_view name);

enum class SweepMode { Grid, CommFrequency };

struct SweepConfig {
  SweepMode mode = SweepMode::Grid;
  std::vector<double> tau{0.0};
  std::vector<std::size_t> local_epochs{7};
  std::vector<std::size_t> agg_iterations{3};
  std::vector<std::size_t> batch_size{128};
  std::size_t total_local_epochs = 9;
  std::vector<std::size_t> e_values{1, 3, 9};
};

/// Every protocol knob. Defaults reproduce the desk-scale setup: 4 synthetic
/// domains (3 training clients + 1 target), 8 features, 2000 samples each.
struct ExperimentConfig {
  std::uint64_t seed = 1;

  // protocol.*
  std::size_t clients = 3;
  std::size_t rounds = 100;
  std::size_t local_epochs = 7;
  std::size_t batch_size = 128;
  double tau = 0.0;
  std::size_t agg_iterations = 3;
  double learning_rate = 0.05;
  bool size_weighted_fedavg = false;

  // algorithm.*
  Algorithm algorithm = Algorithm::FedGaLA;
  double reweight_factor = 0.01;
  double l2_lambda = 0.0;
  double prox_mu = 0.0;

  // encoder.*, loss.*
  EncoderSpec encoder{EncoderKind::Mlp, {}};
  LossSpec loss;

  // domains.*
  std::size_t domain_count = 4;
  std::size_t features = 8;
  std::size_t samples = 2000;
  std::vector<double> rho{0.9, 0.75, 0.6, 0.45};
  double rho_spread = 0.1;
  double label_threshold = 0.0;

  // eval.*
  std::vector<double> labeled_fractions{0.1, 0.3};
  std::size_t probe_epochs = 100;
  double probe_learning_rate = 0.1;
  std::optional<std::size_t> target_domain;

  // theory.*
  TheoryProtocol theory;
  std::vector<double> cov_grid = default_cov_grid();
  std::size_t proposition_trials = 1000;
  std::size_t claim_trials = 100;
  std::size_t lemma1_samples = 100000;
  std::size_t lemma2_draws = 1000000;

  SweepConfig sweep;

  // output.*
  bool write_domains = false;
  bool write_checkpoint = true;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  /// Encoder spec with the default arch filled in when none was given.
  EncoderSpec resolved_encoder() const;
  std::size_t resolved_target() const;
  VariantConfig variant() const;
  LocalRoundOptions local_options() const;
};

/// Parses `key = value` lines; '#' starts a comment. Keys use dotted
/// section prefixes (protocol.tau). Errors carry the line number and key;
/// unknown keys list every valid key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, sorted by key, one per line.
std::string canonical_config(const ExperimentConfig& config);

std::vector<std::string> config_keys();

}  // namespace fedgala
