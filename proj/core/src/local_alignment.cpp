#include "fedgala/local_alignment.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "aligned_step.hpp"
#include "fedgala/errors.hpp"
#include "fedgala/io.hpp"

namespace fedgala {

namespace detail {

DiscardStats aligned_step(LayeredParams& params, const UpdateDelta& batch_grad,
                          const UpdateDelta* reference, double tau, double learning_rate,
                          double unaligned_scale) {
  params.require_same_shape(batch_grad.delta, "aligned_step");
  if (reference != nullptr) params.require_same_shape(reference->delta, "aligned_step");
  DiscardStats stats;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const auto g = batch_grad.delta.values(l);
    bool aligned = true;
    if (reference != nullptr) {
      aligned = is_aligned(cosine(g, reference->delta.values(l)), tau);
      stats.record(params.layer(l).name, !aligned);
    }
    if (aligned) {
      fedgala::axpy(-learning_rate, g, params.values(l));
    } else if (unaligned_scale != 0.0) {
      fedgala::axpy(-learning_rate * unaligned_scale, g, params.values(l));
    }
  }
  return stats;
}

}  // namespace detail

void DiscardStats::record(const std::string& layer, bool was_discarded) {
  auto& c = per_layer[layer];
  ++c.considered;
  ++considered;
  if (was_discarded) {
    ++c.discarded;
    ++discarded;
  }
}

void DiscardStats::merge(const DiscardStats& other) {
  considered += other.considered;
  discarded += other.discarded;
  for (const auto& [name, c] : other.per_layer) {
    auto& mine = per_layer[name];
    mine.considered += c.considered;
    mine.discarded += c.discarded;
  }
}

double DiscardStats::ratio() const noexcept {
  return considered == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(considered);
}

UpdateDelta compute_reference(const LayeredParams& global_now, const LayeredParams& global_prev) {
  return subtract(global_now, global_prev);
}

bool is_aligned(double cos, double tau) noexcept { return tau <= -1.0 || cos > tau; }

DiscardStats filtered_sgd_step(ClientState& client, const UpdateDelta& batch_grad,
                               const UpdateDelta* reference, double tau) {
  return detail::aligned_step(client.params, batch_grad, reference, tau, client.learning_rate,
                              0.0);
}

std::size_t local_steps(std::size_t n_samples, std::size_t batch_size,
                        std::size_t epochs) noexcept {
  if (n_samples == 0 || batch_size == 0) return 0;
  const std::size_t b = std::min(batch_size, n_samples);
  return (n_samples + b - 1) / b * epochs;
}

LocalRoundResult local_round(ClientState client, const LayeredParams& global_now,
                             const LayeredParams* global_prev, const LocalRoundOptions& options,
                             const AffineAug& round_aug) {
  if (!client.data) throw PreconditionError("local_round: client has no data");
  options.variant.validate();
  const std::size_t n = client.data->data.rows();
  client.params = global_now;

  LocalRoundResult result;
  result.aug_hash = round_aug.hash();
  if (options.epochs == 0 || n == 0) {
    result.params = std::move(client.params);
    return result;
  }

  std::size_t batch_size = options.batch_size;
  if (batch_size == 0) throw PreconditionError("local_round: batch_size must be >= 1");
  if (batch_size > n) {
    log_warning("client " + std::to_string(client.id) + ": batch_size " +
                std::to_string(batch_size) + " exceeds dataset size " + std::to_string(n) +
                ", clamping");
    batch_size = n;
  }
  const std::size_t tail = n % batch_size;
  if (tail != 0 && tail < min_batch_size(options.loss.kind))
    throw PreconditionError("local_round: final batch of " + std::to_string(tail) +
                            " sample(s) is too small for the loss; choose another batch_size");

  std::optional<UpdateDelta> reference;
  if (options.filter && global_prev != nullptr)
    reference = compute_reference(global_now, *global_prev);
  const UpdateDelta* ref = reference ? &*reference : nullptr;
  const double unaligned_scale =
      options.variant.local_mode == LocalMode::Reweight ? options.variant.reweight_factor : 0.0;

  Rng rng(client.rng);
  std::vector<std::size_t> order(n);
  double loss_sum = 0.0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(n, start + batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const ContrastiveBatch batch = make_contrastive_batch(*client.data, idx, round_aug);
      BatchGradient bg = ssl_batch_gradient(options.encoder, options.loss, client.params, batch);
      if (options.variant.l2_lambda > 0.0)
        axpy(1.0, l2_grad_term(client.params, options.variant.l2_lambda).delta, bg.grad.delta);
      if (options.variant.prox_mu > 0.0)
        axpy(1.0, prox_grad_term(client.params, global_now, options.variant.prox_mu).delta,
             bg.grad.delta);

      if (options.filter) {
        result.stats.merge(detail::aligned_step(client.params, bg.grad, ref, options.tau,
                                                client.learning_rate, unaligned_scale));
      } else {
        axpy(-client.learning_rate, bg.grad.delta, client.params);
      }
      loss_sum += bg.loss;
      ++result.steps;
    }
  }
  if (!client.params.all_finite())
    throw NonFiniteError("client " + std::to_string(client.id) +
                         ": non-finite parameters after local training");
  result.mean_loss = loss_sum / static_cast<double>(result.steps);
  result.params = std::move(client.params);
  return result;
}

}  // namespace fedgala
