#include "fedgala/encoders.hpp"

#include <cmath>
#include <string>

#include "fedgala/errors.hpp"

namespace fedgala {

namespace {

std::string weight_name(std::size_t k) { return "fc" + std::to_string(k) + ".weight"; }
std::string bias_name(std::size_t k) { return "fc" + std::to_string(k) + ".bias"; }

void require_pair(std::span<const double> w, std::span<const double> x1,
                  std::span<const double> x2) {
  if (w.size() != x1.size() || w.size() != x2.size())
    throw DimensionError("one-layer encoder: W, x1 and x2 must share a length");
}

// Activations a_0 = input, a_{k+1} = act(a_k W_k^T + b_k).

}  // namespace

MlpTrace mlp_trace(const LayeredParams& params, const Matrix& batch,
                   const MlpArch& arch) {
  require_mlp_shape(params, arch);
  if (batch.cols() != arch.input_dim())
    throw DimensionError("mlp: batch width differs from input dimension");
  std::vector<Matrix> acts;
  acts.reserve(arch.widths.size());
  acts.push_back(batch);
  const std::size_t depth = arch.dense_layers();
  for (std::size_t k = 0; k < depth; ++k) {
    const std::size_t in = arch.widths[k];
    const std::size_t out = arch.widths[k + 1];
    const auto w = params.values(2 * k);
    const auto b = params.values(2 * k + 1);
    const Matrix& prev = acts.back();
    Matrix next(prev.rows(), out);
    for (std::size_t n = 0; n < prev.rows(); ++n) {
      const auto x = prev.row(n);
      auto y = next.row(n);
      for (std::size_t o = 0; o < out; ++o) {
        double acc = b[o];
        const double* wr = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) acc += wr[i] * x[i];
        y[o] = (k + 1 < depth) ? std::tanh(acc) : acc;
      }
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

double one_layer_forward(std::span<const double> w, std::span<const double> x1,
                         std::span<const double> x2) {
  require_pair(w, x1, x2);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * (x1[i] - x2[i]);
  return sigmoid(s);
}

RealVec one_layer_contrastive_grad(std::span<const double> w, std::span<const double> x1,
                                   std::span<const double> x2, bool is_positive) {
  const double s = one_layer_forward(w, x1, x2);
  const double coeff = is_positive ? s - 1.0 : s;
  RealVec g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = coeff * (x1[i] - x2[i]);
  return g;
}

LayeredParams init_one_layer(std::size_t feature_count, const RngStream& rng) {
  if (feature_count == 0) throw EmptyRequestError("init_one_layer: feature_count is 0");
  Rng r(rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(feature_count));
  RealVec w(feature_count);
  for (double& v : w) v = r.uniform(-bound, bound);
  LayeredParams p;
  p.add_layer(kOneLayerName, std::move(w));
  return p;
}

LayeredParams zero_mlp(const MlpArch& arch) {
  if (arch.widths.size() < 2) throw DimensionError("mlp arch needs at least input and output widths");
  LayeredParams p;
  for (std::size_t k = 0; k + 1 < arch.widths.size(); ++k) {
    p.add_layer(weight_name(k), RealVec(arch.widths[k] * arch.widths[k + 1], 0.0));
    p.add_layer(bias_name(k), RealVec(arch.widths[k + 1], 0.0));
  }
  return p;
}

LayeredParams init_mlp(const MlpArch& arch, const RngStream& rng) {
  LayeredParams p = zero_mlp(arch);
  Rng r(rng);
  for (std::size_t k = 0; k + 1 < arch.widths.size(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.widths[k]));
    for (double& v : p.values(2 * k)) v = r.uniform(-bound, bound);
    for (double& v : p.values(2 * k + 1)) v = r.uniform(-bound, bound);
  }
  return p;
}

void require_mlp_shape(const LayeredParams& params, const MlpArch& arch) {
  if (arch.widths.size() < 2) throw DimensionError("mlp arch needs at least input and output widths");
  for (std::size_t w : arch.widths)
    if (w == 0) throw DimensionError("mlp arch has a zero-width layer");
  if (params.layer_count() != 2 * arch.dense_layers())
    throw DimensionError("mlp params do not match arch layer count");
  for (std::size_t k = 0; k < arch.dense_layers(); ++k) {
    const auto& w = params.layer(2 * k);
    const auto& b = params.layer(2 * k + 1);
    if (w.name != weight_name(k) || b.name != bias_name(k) ||
        w.values.size() != arch.widths[k] * arch.widths[k + 1] ||
        b.values.size() != arch.widths[k + 1])
      throw DimensionError("mlp params do not match arch at layer " + std::to_string(k));
  }
}

RealVec mlp_forward(const LayeredParams& params, std::span<const double> x, const MlpArch& arch) {
  Matrix batch(1, x.size());
  std::copy(x.begin(), x.end(), batch.row(0).begin());
  const Matrix out = mlp_forward(params, batch, arch);
  return RealVec(out.row(0).begin(), out.row(0).end());
}

Matrix mlp_forward(const LayeredParams& params, const Matrix& batch, const MlpArch& arch) {
  auto acts = mlp_trace(params, batch, arch);
  return std::move(acts.back());
}

UpdateDelta mlp_backward(const LayeredParams& params, const Matrix& batch,
                         const Matrix& loss_grad_at_embeddings, const MlpArch& arch) {
  return mlp_backward(params, mlp_trace(params, batch, arch), loss_grad_at_embeddings, arch);
}

UpdateDelta mlp_backward(const LayeredParams& params, const MlpTrace& acts,
                         const Matrix& loss_grad_at_embeddings, const MlpArch& arch) {
  require_mlp_shape(params, arch);
  if (acts.size() != arch.widths.size())
    throw DimensionError("mlp_backward: trace depth differs from the architecture");
  const Matrix& batch = acts.front();
  if (loss_grad_at_embeddings.rows() != batch.rows() ||
      loss_grad_at_embeddings.cols() != arch.output_dim())
    throw DimensionError("mlp_backward: upstream gradient shape mismatch");

  UpdateDelta grad{params.zeros_like(), 0};
  Matrix delta = loss_grad_at_embeddings;
  for (std::size_t k = arch.dense_layers(); k-- > 0;) {
    const std::size_t in = arch.widths[k];
    const std::size_t out = arch.widths[k + 1];
    const Matrix& a_in = acts[k];
    auto gw = grad.delta.values(2 * k);
    auto gb = grad.delta.values(2 * k + 1);
    for (std::size_t n = 0; n < batch.rows(); ++n) {
      const auto d = delta.row(n);
      const auto x = a_in.row(n);
      for (std::size_t o = 0; o < out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        gb[o] += dv;
        double* gr = gw.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) gr[i] += dv * x[i];
      }
    }
    if (k == 0) break;
    // Propagate through W_k and the tanh that produced a_in.
    const auto w = params.values(2 * k);
    Matrix prev(batch.rows(), in);
    for (std::size_t n = 0; n < batch.rows(); ++n) {
      const auto d = delta.row(n);
      const auto x = a_in.row(n);
      auto p = prev.row(n);
      for (std::size_t o = 0; o < out; ++o) {
        const double dv = d[o];
        const double* wr = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) p[i] += dv * wr[i];
      }
      for (std::size_t i = 0; i < in; ++i) p[i] *= 1.0 - x[i] * x[i];
    }
    delta = std::move(prev);
  }
  return grad;
}

LayeredParams init_encoder(const EncoderSpec& spec, std::size_t feature_count,
                           const RngStream& rng) {
  if (spec.kind == EncoderKind::OneLayer) return init_one_layer(feature_count, rng);
  if (spec.arch.widths.empty() || spec.arch.input_dim() != feature_count)
    throw DimensionError("mlp arch input width differs from the feature count");
  return init_mlp(spec.arch, rng);
}

Matrix embed(const EncoderSpec& spec, const LayeredParams& params, const Matrix& data) {
  if (spec.kind == EncoderKind::Mlp) return mlp_forward(params, data, spec.arch);
  const auto w = params.values(0);
  if (w.size() != data.cols()) throw DimensionError("embed: one-layer width mismatch");
  Matrix out(data.rows(), 1);
  for (std::size_t n = 0; n < data.rows(); ++n) out(n, 0) = dot(w, data.row(n));
  return out;
}

}  // namespace fedgala
