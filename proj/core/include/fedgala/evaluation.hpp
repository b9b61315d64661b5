#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedgala/domains.hpp"
#include "fedgala/encoders.hpp"
#include "fedgala/params.hpp"
#include "fedgala/rng.hpp"

namespace fedgala {

struct ProbeResult {
  std::size_t target_domain = 0;
  double labeled_fraction = 0.0;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
};

struct ProbeOptions {
  double labeled_fraction = 0.1;
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  /// Reshuffles tried before giving up on a split lacking a class.
  std::size_t max_reshuffles = 100;
};

struct ProbeSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded split of n indices with round(fraction * n) labeled ones
/// (at least 1, at most n - 1).
ProbeSplit probe_split(std::size_t n, double labeled_fraction, const RngStream& rng);

/// Softmax linear classifier on features standardized with labeled-split
/// statistics, trained by full-batch gradient descent on cross-entropy.
/// Returns test accuracy. Labels must be 0/1.
double train_and_score_probe(const Matrix& features, std::span<const int> labels,
                             const ProbeSplit& split, std::size_t epochs, double learning_rate);

/// Linear probe on the frozen encoder. A labeled split with a single class
/// is reshuffled with the next derived stream; DegenerateSplitError after
/// max_reshuffles attempts.
ProbeResult linear_probe(const EncoderSpec& spec, const LayeredParams& encoder,
                         const DomainSample& target, std::span<const int> labels,
                         const ProbeOptions& options, const RngStream& rng);

/// Same protocol applied to the raw features (the no-encoder baseline).
ProbeResult raw_feature_probe(const DomainSample& target, std::span<const int> labels,
                              const ProbeOptions& options, const RngStream& rng);

}  // namespace fedgala
