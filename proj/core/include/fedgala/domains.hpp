#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fedgala/core_math.hpp"
#include "fedgala/rng.hpp"

namespace fedgala {

/// Linear labeling hyperplane over the shared latent factors:
/// label = 1 when <weights, z> > threshold.
struct LabelRule {
  RealVec weights;
  double threshold = 0.0;
};

/// One synthetic Gaussian domain. Feature f loads onto the shared latent
/// z^f with coefficient rho[f]; the rest of its unit variance is
/// domain-private noise.
struct DomainSpec {
  std::size_t feature_count = 0;
  RealVec rho;
  LabelRule label_rule;
};

/// Standardized samples of one domain (rows = samples). Holds no labels.
struct DomainSample {
  Matrix data;
  std::size_t domain_id = 0;
};

/// Domains generated together. Row n of every domain shares latent row n,
/// which is what couples corresponding features across domains.
struct DomainFamily {
  std::vector<DomainSpec> specs;
  std::vector<DomainSample> domains;
  Matrix latent;
};

/// Shared random affine augmentation x -> A x + B.
struct AffineAug {
  Matrix a;
  RealVec b;

  std::size_t feature_count() const noexcept { return b.size(); }
  std::uint64_t hash() const noexcept;
};

DomainSpec uniform_spec(std::size_t feature_count, double rho, LabelRule rule = {});

/// Throws DimensionError on mismatched feature counts and PreconditionError
/// on rho outside [0, 1] or n_per_domain == 0.
DomainFamily generate_family(const std::vector<DomainSpec>& specs, std::size_t n_per_domain,
                             const RngStream& rng);

/// -1/2 sum ln(1 - cov^2), in nats. Throws DivergenceError if any |cov| >= 1.
double mutual_information_closed_form(std::span<const double> cov);

/// Per-feature sample correlation plugged into the closed form. Throws
/// DivergenceError when a correlation magnitude reaches 1 - 1e-9.
double mutual_information_empirical(const DomainSample& a, const DomainSample& b);

RealVec apply_augmentation(std::span<const double> x, const AffineAug& aug);

/// A = I + 0.1 * sym(G) with eigenvalues clipped so cond(A) < 100,
/// B = 0.1 * N(0, I).
AffineAug sample_augmentation(std::size_t feature_count, const RngStream& rng);
AffineAug identity_augmentation(std::size_t feature_count);
double condition_number(const Matrix& a);

/// Labels of domain `d` from its spec's rule evaluated on the latent rows.
/// Every call increments label_rule_evaluations().
std::vector<int> domain_labels(const DomainFamily& family, std::size_t d);
/// Process-wide count of label-rule evaluations, used to prove the
/// self-supervised path never reads labels.
std::uint64_t label_rule_evaluations() noexcept;

/// "#schema=1", then header "domain,sample,x0,...,x{F-1}", one row per sample.
void write_family_csv(std::ostream& out, const DomainFamily& family);

}  // namespace fedgala
