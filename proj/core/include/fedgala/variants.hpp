#pragma once

#include "fedgala/params.hpp"

namespace fedgala {

struct ClientState;
struct DiscardStats;

enum class LocalMode { Discard, Reweight };

/// Local-objective ablations: what to do with unaligned layer gradients,
/// plus optional L2 and proximal penalties.
struct VariantConfig {
  LocalMode local_mode = LocalMode::Discard;
  double reweight_factor = 1.0;  // only read in Reweight mode, must be in (0, 1]
  double l2_lambda = 0.0;
  double prox_mu = 0.0;

  void validate() const;
};

/// Aligned layers step with the full gradient, unaligned ones with
/// factor * gradient. Unaligned layers are counted in stats.discarded.
DiscardStats reweight_sgd_step(ClientState& client, const UpdateDelta& batch_grad,
                               const UpdateDelta* reference, double tau, double factor);

/// Gradient of lambda * ||params||^2.
UpdateDelta l2_grad_term(const LayeredParams& params, double lambda);

/// Gradient of mu * ||params - global||^2.
UpdateDelta prox_grad_term(const LayeredParams& params, const LayeredParams& global_params,
                           double mu);

}  // namespace fedgala
