#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fedgala/core_math.hpp"
#include "fedgala/params.hpp"
#include "fedgala/rng.hpp"

namespace fedgala {

/// Layer widths of the MLP encoder, input first. Dense layers with tanh
/// between them and a linear output.
struct MlpArch {
  std::vector<std::size_t> widths;

  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t dense_layers() const { return widths.size() - 1; }

  static MlpArch default_for(std::size_t feature_count) { return MlpArch{{feature_count, 32, 16}}; }

  friend bool operator==(const MlpArch&, const MlpArch&) = default;
};

enum class EncoderKind { OneLayer, Mlp };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::Mlp;
  MlpArch arch;
};

inline double sigmoid(double x) noexcept {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// One-layer sigmoid encoder: a single row vector W scoring a pair of
// inputs as sigmoid(<W, x1> - <W, x2>).

inline constexpr const char* kOneLayerName = "w";

double one_layer_forward(std::span<const double> w, std::span<const double> x1,
                         std::span<const double> x2);

/// Gradient of the pair BCE loss w.r.t. W:
/// (s - 1)(x1 - x2) for positive pairs, s (x1 - x2) for negative pairs.
RealVec one_layer_contrastive_grad(std::span<const double> w, std::span<const double> x1,
                                   std::span<const double> x2, bool is_positive);

LayeredParams init_one_layer(std::size_t feature_count, const RngStream& rng);

// MLP encoder. Parameters are stored as separate "fc{k}.weight"
// (row-major out x in) and "fc{k}.bias" layers.

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
LayeredParams init_mlp(const MlpArch& arch, const RngStream& rng);
LayeredParams zero_mlp(const MlpArch& arch);
void require_mlp_shape(const LayeredParams& params, const MlpArch& arch);

RealVec mlp_forward(const LayeredParams& params, std::span<const double> x, const MlpArch& arch);
/// Row-wise forward of a batch (rows = samples).
Matrix mlp_forward(const LayeredParams& params, const Matrix& batch, const MlpArch& arch);

/// Activations of every dense layer for a batch: front() is the input,
/// back() the embeddings.
using MlpTrace = std::vector<Matrix>;
MlpTrace mlp_trace(const LayeredParams& params, const Matrix& batch, const MlpArch& arch);

/// Exact reverse-mode gradient of sum_n <upstream[n], f(batch[n])> w.r.t.
/// every parameter layer.
UpdateDelta mlp_backward(const LayeredParams& params, const Matrix& batch,
                         const Matrix& loss_grad_at_embeddings, const MlpArch& arch);
/// Same gradient reusing a forward trace of the batch.
UpdateDelta mlp_backward(const LayeredParams& params, const MlpTrace& trace,
                         const Matrix& loss_grad_at_embeddings, const MlpArch& arch);

LayeredParams init_encoder(const EncoderSpec& spec, std::size_t feature_count,
                           const RngStream& rng);

/// Frozen-feature embedding used by the linear probe. The one-layer model
/// embeds a sample as its scalar score <W, x>.
Matrix embed(const EncoderSpec& spec, const LayeredParams& params, const Matrix& data);

}  // namespace fedgala
