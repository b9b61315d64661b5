#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "fedgala/domains.hpp"
#include "fedgala/encoders.hpp"
#include "fedgala/params.hpp"
#include "fedgala/rng.hpp"
#include "fedgala/ssl_losses.hpp"
#include "fedgala/variants.hpp"

namespace fedgala {

struct ClientState {
  std::size_t id = 0;
  LayeredParams params;
  std::shared_ptr<const DomainSample> data;
  RngStream rng;
  double learning_rate = 0.05;
};

struct LayerCounts {
  std::size_t considered = 0;
  std::size_t discarded = 0;

  friend bool operator==(const LayerCounts&, const LayerCounts&) = default;
};

/// Alignment tests performed and failed, in total and per layer.
struct DiscardStats {
  std::size_t considered = 0;
  std::size_t discarded = 0;
  std::map<std::string, LayerCounts> per_layer;

  void record(const std::string& layer, bool was_discarded);
  void merge(const DiscardStats& other);
  /// discarded / considered, or 0 when nothing was considered.
  double ratio() const noexcept;

  friend bool operator==(const DiscardStats&, const DiscardStats&) = default;
};

/// Per-layer difference of consecutive global models.
UpdateDelta compute_reference(const LayeredParams& global_now, const LayeredParams& global_prev);

/// Whether a layer gradient with this cosine to the reference is kept.
/// Strict "cos > tau", except tau <= -1 keeps everything.
bool is_aligned(double cos, double tau) noexcept;

/// One SGD step that applies each layer's gradient only if it is aligned
/// with the same layer of `reference`. A null reference (first round, no
/// previous global model) bypasses filtering and nothing is counted.
DiscardStats filtered_sgd_step(ClientState& client, const UpdateDelta& batch_grad,
                               const UpdateDelta* reference, double tau);

struct LocalRoundOptions {
  std::size_t epochs = 7;
  std::size_t batch_size = 128;
  double tau = 0.0;
  /// false gives plain SGD (fedavg_ssl, local_only).
  bool filter = true;
  VariantConfig variant;
  EncoderSpec encoder;
  LossSpec loss;
};

struct LocalRoundResult {
  LayeredParams params;
  DiscardStats stats;
  double mean_loss = 0.0;
  std::size_t steps = 0;
  std::uint64_t aug_hash = 0;
};

/// E shuffled passes over the client's data. Starts from global_now;
/// global_prev == nullptr marks the first round.
LocalRoundResult local_round(ClientState client, const LayeredParams& global_now,
                             const LayeredParams* global_prev, const LocalRoundOptions& options,
                             const AffineAug& round_aug);

/// Number of SGD steps one local round takes: ceil(N / batch) * epochs,
/// after clamping batch to N.
std::size_t local_steps(std::size_t n_samples, std::size_t batch_size, std::size_t epochs) noexcept;

}  // namespace fedgala
