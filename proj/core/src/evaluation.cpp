#include "fedgala/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedgala/errors.hpp"
#include "fedgala/io.hpp"

namespace fedgala {

namespace {

constexpr std::size_t kClasses = 2;

bool has_both_classes(std::span<const int> labels, const std::vector<std::size_t>& idx) {
  bool seen[kClasses] = {false, false};
  for (std::size_t i : idx) seen[labels[i] != 0] = true;
  return seen[0] && seen[1];
}

ProbeResult probe_features(const Matrix& features, std::size_t target_domain,
                           std::span<const int> labels, const ProbeOptions& options,
                           const RngStream& rng) {
  if (labels.size() != features.rows())
    throw DimensionError("linear_probe: one label per target sample required");
  for (std::size_t attempt = 0; attempt <= options.max_reshuffles; ++attempt) {
    const ProbeSplit split =
        probe_split(features.rows(), options.labeled_fraction, rng.derive(attempt));
    if (!has_both_classes(labels, split.train)) {
      log_warning("probe split " + std::to_string(attempt) +
                  " has a single class in the labeled part; reshuffling");
      continue;
    }
    ProbeResult r;
    r.target_domain = target_domain;
    r.labeled_fraction = options.labeled_fraction;
    r.seed = rng.seed;
    r.accuracy = train_and_score_probe(features, labels, split, options.epochs,
                                       options.learning_rate);
    return r;
  }
  throw DegenerateSplitError("linear_probe: every labeled split contained a single class");
}

}  // namespace

ProbeSplit probe_split(std::size_t n, double labeled_fraction, const RngStream& rng) {
  if (n < 2) throw PreconditionError("probe_split: needs at least 2 samples");
  if (!(labeled_fraction > 0.0 && labeled_fraction < 1.0))
    throw PreconditionError("probe_split: labeled fraction must be in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng r(rng);
  r.shuffle(order);
  auto n_train = static_cast<std::size_t>(std::llround(labeled_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  ProbeSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

double train_and_score_probe(const Matrix& features, std::span<const int> labels,
                             const ProbeSplit& split, std::size_t epochs, double learning_rate) {
  const std::size_t d = features.cols();
  if (split.train.empty() || split.test.empty())
    throw PreconditionError("probe: train and test splits must be non-empty");

  RealVec mu(d, 0.0), sd(d, 0.0);
  for (std::size_t i : split.train) axpy(1.0, features.row(i), mu);
  for (double& v : mu) v /= static_cast<double>(split.train.size());
  for (std::size_t i : split.train)
    for (std::size_t k = 0; k < d; ++k) {
      const double c = features(i, k) - mu[k];
      sd[k] += c * c;
    }
  for (double& v : sd) {
    v = std::sqrt(v / static_cast<double>(split.train.size()));
    if (v < 1e-12) v = 1.0;
  }
  auto standardized = [&](std::size_t i, std::size_t k) { return (features(i, k) - mu[k]) / sd[k]; };

  Matrix w(kClasses, d);
  RealVec b(kClasses, 0.0);
  const double inv_n = 1.0 / static_cast<double>(split.train.size());
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    Matrix gw(kClasses, d);
    RealVec gb(kClasses, 0.0);
    for (std::size_t i : split.train) {
      double logit[kClasses];
      for (std::size_t c = 0; c < kClasses; ++c) {
        logit[c] = b[c];
        for (std::size_t k = 0; k < d; ++k) logit[c] += w(c, k) * standardized(i, k);
      }
      const double m = std::max(logit[0], logit[1]);
      const double e0 = std::exp(logit[0] - m), e1 = std::exp(logit[1] - m);
      const double p[kClasses] = {e0 / (e0 + e1), e1 / (e0 + e1)};
      for (std::size_t c = 0; c < kClasses; ++c) {
        const double err = p[c] - (static_cast<std::size_t>(labels[i] != 0) == c ? 1.0 : 0.0);
        gb[c] += err;
        for (std::size_t k = 0; k < d; ++k) gw(c, k) += err * standardized(i, k);
      }
    }
    for (std::size_t c = 0; c < kClasses; ++c) {
      b[c] -= learning_rate * inv_n * gb[c];
      for (std::size_t k = 0; k < d; ++k) w(c, k) -= learning_rate * inv_n * gw(c, k);
    }
  }

  std::size_t correct = 0;
  for (std::size_t i : split.test) {
    double logit[kClasses];
    for (std::size_t c = 0; c < kClasses; ++c) {
      logit[c] = b[c];
      for (std::size_t k = 0; k < d; ++k) logit[c] += w(c, k) * standardized(i, k);
    }
    const int predicted = logit[1] > logit[0] ? 1 : 0;
    if (predicted == (labels[i] != 0 ? 1 : 0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.test.size());
}

ProbeResult linear_probe(const EncoderSpec& spec, const LayeredParams& encoder,
                         const DomainSample& target, std::span<const int> labels,
                         const ProbeOptions& options, const RngStream& rng) {
  return probe_features(embed(spec, encoder, target.data), target.domain_id, labels, options, rng);
}

ProbeResult raw_feature_probe(const DomainSample& target, std::span<const int> labels,
                              const ProbeOptions& options, const RngStream& rng) {
  return probe_features(target.data, target.domain_id, labels, options, rng);
}

}  // namespace fedgala
