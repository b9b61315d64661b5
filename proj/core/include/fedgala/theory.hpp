#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedgala/core_math.hpp"
#include "fedgala/domains.hpp"
#include "fedgala/rng.hpp"

namespace fedgala {

/// M gradient draws (rows) from one domain. Rows of two samples with the
/// same index come from the same latent draw.
struct GradientSample {
  Matrix vectors;
  std::size_t source_domain = 0;
};

/// Scalar summary of a d x d covariance matrix.
enum class CovSummary { MeanDiag, Trace, FrobeniusSym };

double summarize(const Matrix& cov, CovSummary kind);
const char* to_string(CovSummary kind) noexcept;
CovSummary cov_summary_from_string(const std::string& name);

/// Entry (m, n) = sum_f feature_cov[f] * jac_i[m, f] * jac_j[n, f].
/// Jacobians are d x F and taken at the feature means.
Matrix taylor_cov_estimate(const Matrix& jac_i, const Matrix& jac_j,
                           std::span<const double> feature_cov);

/// Unbiased sample cross-covariance of paired rows. Throws when M < 2.
Matrix empirical_grad_cov(const GradientSample& a, const GradientSample& b);

// ---------------------------------------------------------------------------
// Training under the one-layer sigmoid / shared-affine-augmentation model.

struct TheoryProtocol {
  std::size_t feature_count = 8;
  std::size_t samples = 2000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t epochs = 1;
  std::size_t batch_size = 128;
  double learning_rate = 1e-6;
  CovSummary summary = CovSummary::MeanDiag;
};

/// Per-sample gradient of the binary contrastive loss for anchor `row`:
/// the positive pair with its augmentation plus every other row of `data`
/// as a negative. `scores` must hold <W, data[k]> for every k.
RealVec full_negative_sample_grad(std::span<const double> w, const Matrix& data,
                                  std::span<const double> scores, std::size_t row,
                                  const AffineAug& aug);

/// One communication round for two clients, FedAVG after every epoch, then
/// per-sample gradients of both clients at the shared weights.
struct PairedGradients {
  GradientSample client_i;
  GradientSample client_j;
  RealVec weights;
};
PairedGradients assumption1_round(double domain_cov, const TheoryProtocol& protocol,
                                  std::uint64_t seed);

struct TrendPoint {
  double domain_cov = 0.0;
  double grad_cov_summary = 0.0;  // seed mean
  double mi = 0.0;                // closed form over all features, nats
  double var_diff = 0.0;          // seed mean summary of Cov(g_i - g_j)
  RealVec per_seed_grad_cov;
  RealVec per_seed_var_diff;
};

/// Points sorted by domain_cov.
struct TheoremTrend {
  std::vector<TrendPoint> points;
  double spearman_rho = 0.0;
  /// Best rho after dropping any single grid point.
  double spearman_rho_one_outlier = 0.0;
};

/// Raw grid runs shared by the theorem and corollary checks.
std::vector<TrendPoint> assumption1_grid(std::span<const double> cov_grid,
                                         const TheoryProtocol& protocol);

/// Throws PreconditionError on fewer than 3 grid points or entries outside (0, 1).
TheoremTrend theorem1_experiment(std::span<const double> cov_grid, const TheoryProtocol& protocol);
TheoremTrend theorem1_trend(std::vector<TrendPoint> points);

struct CorollaryResult {
  std::vector<TrendPoint> points;
  /// Spearman(mi, var_diff); the corollary predicts a strongly negative value.
  double spearman_rho = 0.0;
};
CorollaryResult corollary1_check(std::span<const double> cov_grid, const TheoryProtocol& protocol);
CorollaryResult corollary1_trend(std::vector<TrendPoint> points);

// ---------------------------------------------------------------------------

struct Proposition1Result {
  double before = 0.0;
  double after = 0.0;
  bool holds = false;
  std::size_t removed_index = 0;
};

/// Mean-diagonal cross-covariance of paired rows with and without the one
/// row of g_j that opposes g_est (its partner row in g_i goes with it).
/// Throws PreconditionError unless exactly one g_j row has negative cosine
/// with g_est and every other row of both sets has positive cosine.
Proposition1Result proposition1_check(const GradientSample& g_i, const GradientSample& g_j,
                                      std::span<const double> g_est);

struct Proposition1Instance {
  GradientSample g_i;
  GradientSample g_j;
  RealVec g_est;
};

/// Correlated gradient pairs around a common mean direction, with the last
/// g_j row replaced by an opposing outlier; g_est is the mean of both sets.
/// Resamples until the preconditions hold.
Proposition1Instance random_proposition1_instance(Rng& rng, std::size_t dim = 8,
                                                  std::size_t vectors = 20);

/// g_i = {u, ..., u, 2u}, g_j = {u, ..., u, -u}.
Proposition1Instance constructed_proposition1_instance(std::size_t dim = 8,
                                                       std::size_t vectors = 20);

// ---------------------------------------------------------------------------

enum class ClaimMode { SslPositive, SslNegative, SupervisedLogistic };
const char* to_string(ClaimMode mode) noexcept;

struct SignCheck {
  /// Fraction of features where the two clients' derivatives have a
  /// strictly positive product.
  double fraction = 0.0;
  /// Some derivative vanished, so its sign is undefined.
  bool degenerate = false;
};

inline constexpr double kClaimStep = 1e-5;

/// Both clients share W and the augmentation. For the negative-pair mode
/// each client's derivative sums over its own dataset of negatives.
struct SslClaimInstance {
  RealVec w;
  AffineAug aug;
  Matrix negatives_i;
  Matrix negatives_j;
};
SignCheck ssl_sign_check(bool positive_pairs, const SslClaimInstance& instance);

/// Logistic regression clients; each may carry its own weights and bias.
struct SupervisedClaimInstance {
  RealVec w_i;
  RealVec w_j;
  double bias_i = 0.0;
  double bias_j = 0.0;
  int label = 1;
};
SignCheck supervised_sign_check(const SupervisedClaimInstance& instance);

/// Random instance for `mode` (F features, N negatives per client for the
/// negative-pair mode).
SignCheck claim1_sign_check(ClaimMode mode, const RngStream& rng, std::size_t feature_count = 8,
                            std::size_t negatives = 1000);

// ---------------------------------------------------------------------------

struct Lemma1Point {
  std::size_t feature_count = 0;
  double sigma = 0.0;
  double closed_form = 0.0;
  double estimated = 0.0;
};

struct Lemma1Report {
  std::vector<Lemma1Point> points;
  double max_abs_error = 0.0;
};

/// Closed-form MI on the true covariance vs. the formula applied to sample
/// correlations of generated paired domains.
Lemma1Report lemma1_vs_estimator(std::span<const double> sigma_grid,
                                 std::span<const std::size_t> feature_counts, std::size_t samples,
                                 const RngStream& rng);

struct Lemma2Report {
  Matrix taylor;
  Matrix empirical;
  /// ||empirical - taylor||_F / ||taylor||_F
  double relative_error = 0.0;
};

/// g = J x with random J (dim x F) and per-feature covariances drawn from
/// [0.1, 0.9]; the empirical cross-covariance is streamed over `draws`
/// paired samples.
Lemma2Report lemma2_linear_check(std::size_t dim, std::size_t feature_count, std::size_t draws,
                                 const RngStream& rng);

std::vector<double> default_cov_grid();

}  // namespace fedgala
