#pragma once

#include "fedgala/local_alignment.hpp"

namespace fedgala::detail {

// Layer-wise step shared by discard and reweight modes. Aligned layers move
// by -lr * g, unaligned ones by -lr * unaligned_scale * g (0 = discard).
DiscardStats aligned_step(LayeredParams& params, const UpdateDelta& batch_grad,
                          const UpdateDelta* reference, double tau, double learning_rate,
                          double unaligned_scale);

}  // namespace fedgala::detail
