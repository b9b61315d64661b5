#include "fedgala/global_alignment.hpp"

#include <algorithm>

#include "fedgala/errors.hpp"

namespace fedgala {

std::vector<UpdateDelta> client_updates(const std::vector<LayeredParams>& client_params,
                                        const LayeredParams& global_prev, std::size_t round) {
  std::vector<UpdateDelta> out;
  out.reserve(client_params.size());
  for (const auto& p : client_params) out.push_back(subtract(p, global_prev, round));
  return out;
}

UpdateDelta fedavg_aggregate(const std::vector<UpdateDelta>& updates,
                             std::span<const double> weights) {
  if (updates.empty()) throw EmptyRequestError("fedavg_aggregate: no client updates");
  if (!weights.empty() && weights.size() != updates.size())
    throw DimensionError("fedavg_aggregate: one weight per update required");
  const double uniform = 1.0 / static_cast<double>(updates.size());
  UpdateDelta out{updates.front().delta.zeros_like(), updates.front().round};
  // Accumulate in ascending client order so the result is schedule-independent.
  for (std::size_t i = 0; i < updates.size(); ++i) {
    const double w = weights.empty() ? uniform : weights[i];
    axpy(w, updates[i].delta, out.delta);
  }
  return out;
}

AggregationReport aligned_aggregate(const std::vector<UpdateDelta>& updates,
                                    std::size_t iterations) {
  AggregationReport report;
  report.final_update = fedavg_aggregate(updates);
  const std::size_t k = updates.size();
  for (std::size_t it = 0; it < iterations; ++it) {
    RealVec w(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      w[i] = (flat_cosine(updates[i].delta, report.final_update.delta) + 1.0) / 2.0;
      total += w[i];
    }
    if (total <= 0.0) {
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(k));
      report.fallback_used = true;
    } else {
      for (double& v : w) v /= total;
    }
    report.final_update = fedavg_aggregate(updates, w);
    report.weights_per_iteration.push_back(std::move(w));
  }
  return report;
}

LayeredParams apply_global_update(const LayeredParams& global_prev, const UpdateDelta& update) {
  return add(global_prev, update);
}

}  // namespace fedgala
