#include "fedgala/ssl_losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedgala/errors.hpp"

namespace fedgala {

namespace {

double clamped_log(double p) { return std::log(std::clamp(p, kProbClamp, 1.0 - kProbClamp)); }

}  // namespace

ContrastiveBatch make_contrastive_batch(const DomainSample& data,
                                        std::span<const std::size_t> indices,
                                        const AffineAug& aug) {
  const std::size_t f_count = data.data.cols();
  if (aug.feature_count() != f_count)
    throw DimensionError("make_contrastive_batch: augmentation width differs from data");
  ContrastiveBatch batch{Matrix(indices.size(), f_count), Matrix(indices.size(), f_count),
                         {indices.begin(), indices.end()}, aug.hash()};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= data.data.rows()) throw DimensionError("batch index out of range");
    const auto x = data.data.row(indices[r]);
    std::copy(x.begin(), x.end(), batch.anchors.row(r).begin());
    const RealVec y = apply_augmentation(x, aug);
    std::copy(y.begin(), y.end(), batch.positives.row(r).begin());
  }
  return batch;
}

VectorLoss binary_contrastive_loss(std::span<const double> w, const ContrastiveBatch& batch) {
  const std::size_t b = batch.anchors.rows();
  const std::size_t f_count = w.size();
  if (batch.anchors.cols() != f_count || batch.positives.cols() != f_count ||
      batch.positives.rows() != b)
    throw DimensionError("binary_contrastive_loss: shape mismatch");

  RealVec score(b), pos_score(b);
  for (std::size_t i = 0; i < b; ++i) {
    score[i] = dot(w, batch.anchors.row(i));
    pos_score[i] = dot(w, batch.positives.row(i));
  }

  VectorLoss out{0.0, RealVec(f_count, 0.0)};
  for (std::size_t i = 0; i < b; ++i) {
    const double s = sigmoid(score[i] - pos_score[i]);
    out.loss -= clamped_log(s);
    const auto a = batch.anchors.row(i);
    const auto p = batch.positives.row(i);
    for (std::size_t f = 0; f < f_count; ++f) out.grad[f] += (s - 1.0) * (a[f] - p[f]);
  }

  // Negative pairs: sum_{i != k} s_ik (a_i - a_k) = sum_i a_i (row_i - col_i)
  // with row_i = sum_k s_ik and col_i = sum_k s_ki.
  RealVec row_sum(b, 0.0), col_sum(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t k = 0; k < b; ++k) {
      if (k == i) continue;
      const double s = sigmoid(score[i] - score[k]);
      out.loss -= clamped_log(1.0 - s);
      row_sum[i] += s;
      col_sum[k] += s;
    }
  }
  for (std::size_t i = 0; i < b; ++i) {
    const double c = row_sum[i] - col_sum[i];
    const auto a = batch.anchors.row(i);
    for (std::size_t f = 0; f < f_count; ++f) out.grad[f] += c * a[f];
  }
  return out;
}

MatrixLoss ntxent_loss(const Matrix& embeddings, double temperature) {
  const std::size_t n = embeddings.rows();
  const std::size_t d = embeddings.cols();
  if (d == 0 || n < 4) throw BatchTooSmallError("ntxent_loss needs d >= 1 and at least 2 pairs");
  if (n % 2 != 0) throw DimensionError("ntxent_loss: embeddings must come in pairs");
  if (!(temperature > 0.0)) throw PreconditionError("ntxent_loss: temperature must be > 0");

  RealVec norms(n);
  Matrix u(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = std::max(norm(embeddings.row(i)), kZeroNormEps);
    for (std::size_t k = 0; k < d; ++k) u(i, k) = embeddings(i, k) / norms[i];
  }

  // Cosines are bounded by 1, so shifting every logit by 1/T keeps exp()
  // in [exp(-2/T), 1] and one symmetric table serves every row's softmax.
  const double shift = 1.0 / temperature;
  const double* up = u.values().data();
  Matrix ex(n, n);
  RealVec partner_sim(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ui = up + i * d;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* uj = up + j * d;
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += ui[k] * uj[k];
      const double s = acc / temperature;
      if (j == (i ^ 1U)) partner_sim[i] = partner_sim[j] = s;
      const double e = std::exp(s - shift);
      ex(i, j) = e;
      ex(j, i) = e;
    }
  }

  MatrixLoss out{0.0, Matrix(n, d)};
  RealVec inv_z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (double v : ex.row(i)) z += v;  // ex(i, i) is 0
    inv_z[i] = 1.0 / z;
    out.loss += 0.5 * (shift + std::log(z) - partner_sim[i]);
  }

  // dL/dsim(i,j) = 0.5 (P_ij + P_ji) - [j is i's partner], where
  // P_ij = ex(i, j) / z_i and ex is symmetric.
  Matrix grad_u(n, d);
  double* gp = grad_u.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* __restrict ui = up + i * d;
    double* __restrict gi = gp + i * d;
    const auto exi = ex.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      double g = 0.5 * exi[j] * (inv_z[i] + inv_z[j]);
      if (j == (i ^ 1U)) g -= 1.0;
      const double c = g / temperature;
      const double* __restrict uj = up + j * d;
      double* __restrict gj = gp + j * d;
      for (std::size_t k = 0; k < d; ++k) {
        gi[k] += c * uj[k];
        gj[k] += c * ui[k];
      }
    }
  }
  // Back through x / |x|: (I - u u^T) g / |x|.
  for (std::size_t i = 0; i < n; ++i) {
    const auto ui = u.row(i);
    const auto gi = grad_u.row(i);
    const double proj = dot(ui, gi);
    auto out_row = out.grad.row(i);
    for (std::size_t k = 0; k < d; ++k) out_row[k] = (gi[k] - proj * ui[k]) / norms[i];
  }
  return out;
}

BatchGradient ssl_batch_gradient(const EncoderSpec& encoder, const LossSpec& loss,
                                 const LayeredParams& params, const ContrastiveBatch& batch) {
  if (loss.kind == LossKind::BinaryContrastive) {
    if (encoder.kind != EncoderKind::OneLayer)
      throw PreconditionError("binary_contrastive loss requires the one_layer encoder");
    VectorLoss l = binary_contrastive_loss(params.values(0), batch);
    LayeredParams g;
    g.add_layer(kOneLayerName, std::move(l.grad));
    return BatchGradient{l.loss, UpdateDelta{std::move(g), 0}};
  }
  if (encoder.kind != EncoderKind::Mlp)
    throw PreconditionError("ntxent loss requires the mlp encoder");
  const std::size_t b = batch.anchors.rows();
  Matrix inputs(2 * b, batch.anchors.cols());
  for (std::size_t i = 0; i < b; ++i) {
    std::copy(batch.anchors.row(i).begin(), batch.anchors.row(i).end(),
              inputs.row(2 * i).begin());
    std::copy(batch.positives.row(i).begin(), batch.positives.row(i).end(),
              inputs.row(2 * i + 1).begin());
  }
  const MlpTrace trace = mlp_trace(params, inputs, encoder.arch);
  MatrixLoss l = ntxent_loss(trace.back(), loss.temperature);
  return BatchGradient{l.loss, mlp_backward(params, trace, l.grad, encoder.arch)};
}

std::size_t min_batch_size(LossKind kind) noexcept {
  return kind == LossKind::NtXent ? 2 : 1;
}

}  // namespace fedgala
