#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedgala/core_math.hpp"
#include "fedgala/params.hpp"

namespace fedgala {

/// Server-side record of one aggregation.
struct AggregationReport {
  /// One normalized weight vector (length K) per refinement iteration.
  std::vector<RealVec> weights_per_iteration;
  UpdateDelta final_update;
  /// Set when every raw weight of some iteration was zero and uniform
  /// weights were substituted.
  bool fallback_used = false;
};

inline constexpr std::size_t kDefaultAggIterations = 3;

/// g_i = client_i - global_prev for every client.
std::vector<UpdateDelta> client_updates(const std::vector<LayeredParams>& client_params,
                                        const LayeredParams& global_prev, std::size_t round = 0);

/// Weighted mean of updates; uniform when `weights` is empty. Weights are
/// used as given (callers normalize).
UpdateDelta fedavg_aggregate(const std::vector<UpdateDelta>& updates,
                             std::span<const double> weights = {});

/// Starts from the FedAVG mean, then `iterations` times sets
/// w_i = (cos(flat g_i, flat g) + 1) / 2, normalizes w, and re-aggregates.
AggregationReport aligned_aggregate(const std::vector<UpdateDelta>& updates,
                                    std::size_t iterations = kDefaultAggIterations);

LayeredParams apply_global_update(const LayeredParams& global_prev, const UpdateDelta& update);

}  // namespace fedgala
