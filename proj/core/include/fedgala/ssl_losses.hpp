#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedgala/core_math.hpp"
#include "fedgala/domains.hpp"
#include "fedgala/encoders.hpp"
#include "fedgala/params.hpp"

namespace fedgala {

/// Anchors and their augmentations. positives[i] = A anchors[i] + B for
/// the round's shared augmentation, whose hash is kept for auditing.
struct ContrastiveBatch {
  Matrix anchors;
  Matrix positives;
  std::vector<std::size_t> batch_indices;
  std::uint64_t aug_hash = 0;
};

ContrastiveBatch make_contrastive_batch(const DomainSample& data,
                                        std::span<const std::size_t> indices,
                                        const AffineAug& aug);

struct VectorLoss {
  double loss = 0.0;
  RealVec grad;
};

struct MatrixLoss {
  double loss = 0.0;
  Matrix grad;
};

/// Clamp applied to sigmoid outputs before taking logs.
inline constexpr double kProbClamp = 1e-12;

/// Summed BCE over every positive pair (anchor, own augmentation; y = 1)
/// and every ordered negative pair (anchor i, anchor k != i; y = 0).
VectorLoss binary_contrastive_loss(std::span<const double> w, const ContrastiveBatch& batch);

inline constexpr double kDefaultTemperature = 0.5;

/// NT-Xent over 2B embeddings where rows 2k and 2k+1 are a positive pair.
/// Each pair contributes the mean of its two directional cross-entropy
/// terms; pairs are summed. Throws BatchTooSmallError when d == 0 or
/// fewer than 2 pairs are given.
MatrixLoss ntxent_loss(const Matrix& embeddings, double temperature = kDefaultTemperature);

enum class LossKind { BinaryContrastive, NtXent };

struct LossSpec {
  LossKind kind = LossKind::NtXent;
  double temperature = kDefaultTemperature;
};

struct BatchGradient {
  double loss = 0.0;
  UpdateDelta grad;
};

/// SSL loss and parameter gradient for one batch. binary_contrastive pairs
/// with the one-layer encoder, ntxent with the MLP.
BatchGradient ssl_batch_gradient(const EncoderSpec& encoder, const LossSpec& loss,
                                 const LayeredParams& params, const ContrastiveBatch& batch);

/// Smallest batch the loss can be evaluated on.
std::size_t min_batch_size(LossKind kind) noexcept;

}  // namespace fedgala
