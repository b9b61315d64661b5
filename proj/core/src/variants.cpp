#include "fedgala/variants.hpp"

#include <cmath>

#include "fedgala/errors.hpp"
#include "aligned_step.hpp"

namespace fedgala {

void VariantConfig::validate() const {
  if (local_mode == LocalMode::Reweight && !(reweight_factor > 0.0 && reweight_factor <= 1.0))
    throw PreconditionError("reweight factor must be in (0, 1]");
  if (!(std::isfinite(l2_lambda) && l2_lambda >= 0.0))
    throw PreconditionError("l2 lambda must be finite and >= 0");
  if (!(std::isfinite(prox_mu) && prox_mu >= 0.0))
    throw PreconditionError("prox mu must be finite and >= 0");
}

DiscardStats reweight_sgd_step(ClientState& client, const UpdateDelta& batch_grad,
                               const UpdateDelta* reference, double tau, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw PreconditionError("reweight factor must be in (0, 1]");
  return detail::aligned_step(client.params, batch_grad, reference, tau, client.learning_rate,
                              factor);
}

UpdateDelta l2_grad_term(const LayeredParams& params, double lambda) {
  if (!(lambda >= 0.0)) throw PreconditionError("l2 lambda must be >= 0");
  UpdateDelta out{params, 0};
  for (std::size_t l = 0; l < out.delta.layer_count(); ++l)
    for (double& v : out.delta.values(l)) v *= 2.0 * lambda;
  return out;
}

UpdateDelta prox_grad_term(const LayeredParams& params, const LayeredParams& global_params,
                           double mu) {
  if (!(mu >= 0.0)) throw PreconditionError("prox mu must be >= 0");
  UpdateDelta out = subtract(params, global_params);
  for (std::size_t l = 0; l < out.delta.layer_count(); ++l)
    for (double& v : out.delta.values(l)) v *= 2.0 * mu;
  return out;
}

}  // namespace fedgala
