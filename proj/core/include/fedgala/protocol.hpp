#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "fedgala/config.hpp"
#include "fedgala/core_math.hpp"
#include "fedgala/domains.hpp"
#include "fedgala/evaluation.hpp"
#include "fedgala/params.hpp"

namespace fedgala {

struct ClientRoundRecord {
  std::size_t client_id = 0;
  std::size_t considered = 0;
  std::size_t discarded = 0;
  double discard_ratio = 0.0;
  double mean_loss = 0.0;
  std::size_t steps = 0;
};

/// Telemetry of one communication round.
struct RoundRecord {
  std::size_t round = 0;  // 1-based
  std::vector<ClientRoundRecord> clients;
  /// weight_history[k][i]: weight of client i after refinement k.
  std::vector<RealVec> weight_history;
  bool fallback_used = false;
  double global_param_norm = 0.0;

  /// Pooled discarded / considered over all clients of the round.
  double discard_ratio() const noexcept;
};

struct ProtocolResult {
  LayeredParams initial;
  LayeredParams final_global;
  std::vector<RoundRecord> records;
};

using ClientData = std::vector<std::shared_ptr<const DomainSample>>;

/// Random-stream tags. Every draw of a run derives from (seed, tag, index).
namespace stream_tag {
inline constexpr std::uint64_t kFamily = 1;
inline constexpr std::uint64_t kInit = 2;
inline constexpr std::uint64_t kAugmentation = 3;
inline constexpr std::uint64_t kShuffle = 4;
inline constexpr std::uint64_t kProbe = 5;
inline constexpr std::uint64_t kLabelRule = 6;
}  // namespace stream_tag

/// The outer training loop: broadcast, local rounds, aggregation, update.
/// Clients may run on up to `jobs` threads; every reduction happens in
/// client order, so results do not depend on `jobs`. Throws NonFiniteError
/// naming the round when the global model stops being finite.
ProtocolResult run_protocol(const ExperimentConfig& config, const ClientData& clients,
                            std::size_t jobs = 1);

/// Domain family described by the config's domains.* keys.
DomainFamily make_family(const ExperimentConfig& config);

struct ExperimentResult {
  std::size_t target_domain = 0;
  std::vector<std::size_t> training_domains;
  ProtocolResult protocol;
  std::vector<ProbeResult> probes;
};

/// Trains on the first `clients` non-target domains and probes the target
/// domain at every labeled fraction.
ExperimentResult run_experiment(const ExperimentConfig& config, const DomainFamily& family,
                                std::size_t jobs = 1);

/// One run per held-out domain with every other domain as a client.
std::vector<ExperimentResult> leave_one_domain_out(const ExperimentConfig& config,
                                                   std::size_t jobs = 1);

struct SweepRow {
  double tau = 0.0;
  std::size_t local_epochs = 0;
  std::size_t rounds = 0;
  std::size_t agg_iterations = 0;
  std::size_t batch_size = 0;
  double mean_discard_ratio = 0.0;
  ProbeResult probe;
};

/// Cartesian product of the sweep.* lists.
std::vector<SweepRow> grid_sweep(const ExperimentConfig& config, std::size_t jobs = 1);

/// For each E, T = total / E rounds (floored; the remainder is logged).
std::vector<SweepRow> communication_frequency_sweep(const ExperimentConfig& config,
                                                    std::size_t total_local_epochs,
                                                    const std::vector<std::size_t>& e_values,
                                                    std::size_t jobs = 1);

struct Verdict {
  std::string name;
  bool passed = false;
  double statistic = 0.0;
  double threshold = 0.0;
};

/// Runs every theory check, writes one CSV per check into `dir` and returns
/// the verdicts in a fixed order.
std::vector<Verdict> run_theory_suite(const ExperimentConfig& config,
                                      const std::filesystem::path& dir);

// Output writers. Every CSV starts with the "#schema=1" line.
void write_rounds_csv(const std::filesystem::path& path,
                      const std::vector<ExperimentResult>& results);
void write_probe_csv(const std::filesystem::path& path, const std::vector<ExperimentResult>& results,
                     const ExperimentConfig& config);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_verdicts_json(const std::filesystem::path& path, const std::vector<Verdict>& verdicts);
void write_resolved_config(const std::filesystem::path& dir, const ExperimentConfig& config);

}  // namespace fedgala
