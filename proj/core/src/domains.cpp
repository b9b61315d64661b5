#include "fedgala/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "fedgala/errors.hpp"
#include "fedgala/io.hpp"

namespace fedgala {

namespace {

std::atomic<std::uint64_t> g_label_evaluations{0};

constexpr double kMaxCondition = 99.0;

}  // namespace

std::uint64_t AffineAug::hash() const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::span<const double> xs) {
    for (double x : xs) {
      const auto* p = reinterpret_cast<const unsigned char*>(&x);
      for (std::size_t i = 0; i < sizeof x; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
      }
    }
  };
  mix(a.values());
  mix(b);
  return h;
}

DomainSpec uniform_spec(std::size_t feature_count, double rho, LabelRule rule) {
  return DomainSpec{feature_count, RealVec(feature_count, rho), std::move(rule)};
}

DomainFamily generate_family(const std::vector<DomainSpec>& specs, std::size_t n_per_domain,
                             const RngStream& rng) {
  if (specs.empty()) throw EmptyRequestError("generate_family: no domain specs");
  if (n_per_domain == 0) throw PreconditionError("generate_family: n_per_domain must be >= 1");
  const std::size_t f_count = specs.front().feature_count;
  if (f_count == 0) throw PreconditionError("generate_family: feature_count must be >= 1");
  for (const auto& s : specs) {
    if (s.feature_count != f_count || s.rho.size() != f_count)
      throw DimensionError("generate_family: specs disagree on feature_count");
    for (double r : s.rho)
      if (!(r >= 0.0 && r <= 1.0)) throw PreconditionError("generate_family: rho outside [0, 1]");
  }

  DomainFamily family;
  family.specs = specs;
  family.latent = Matrix(n_per_domain, f_count);
  {
    Rng latent_rng(rng.derive(0));
    for (double& z : family.latent.values()) z = latent_rng.normal();
  }
  for (std::size_t d = 0; d < specs.size(); ++d) {
    Rng noise_rng(rng.derive(1, d));
    DomainSample sample{Matrix(n_per_domain, f_count), d};
    const auto& rho = specs[d].rho;
    for (std::size_t n = 0; n < n_per_domain; ++n) {
      for (std::size_t f = 0; f < f_count; ++f) {
        const double eps = noise_rng.normal();
        sample.data(n, f) =
            rho[f] * family.latent(n, f) + std::sqrt(std::max(0.0, 1.0 - rho[f] * rho[f])) * eps;
      }
    }
    family.domains.push_back(std::move(sample));
  }
  return family;
}

double mutual_information_closed_form(std::span<const double> cov) {
  double acc = 0.0;
  for (double c : cov) {
    if (!(std::abs(c) < 1.0))
      throw DivergenceError("mutual information diverges at |cov| >= 1");
    acc += std::log1p(-c * c);
  }
  return -0.5 * acc;
}

double mutual_information_empirical(const DomainSample& a, const DomainSample& b) {
  if (a.data.rows() != b.data.rows() || a.data.cols() != b.data.cols())
    throw DimensionError("mutual_information_empirical: samples differ in shape");
  const std::size_t n = a.data.rows();
  const std::size_t f_count = a.data.cols();
  RealVec corr(f_count);
  RealVec xa(n), xb(n);
  for (std::size_t f = 0; f < f_count; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      xa[i] = a.data(i, f);
      xb[i] = b.data(i, f);
    }
    corr[f] = sample_correlation(xa, xb);
    if (std::abs(corr[f]) >= 1.0 - 1e-9)
      throw DivergenceError("mutual information diverges: feature " + std::to_string(f) +
                            " is perfectly correlated");
  }
  return mutual_information_closed_form(corr);
}

RealVec apply_augmentation(std::span<const double> x, const AffineAug& aug) {
  if (x.size() != aug.feature_count() || aug.a.rows() != x.size() || aug.a.cols() != x.size())
    throw DimensionError("apply_augmentation: dimension mismatch");
  RealVec y = matvec(aug.a, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += aug.b[i];
  return y;
}

double condition_number(const Matrix& a) {
  // Singular values of a symmetric matrix are |eigenvalues|; for general A
  // use the eigenvalues of A^T A.
  const Matrix ata = matmul(a.transposed(), a);
  const auto eig = symmetric_eigen(ata);
  const auto [lo, hi] = std::minmax_element(eig.values.begin(), eig.values.end());
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(*hi / *lo);
}

AffineAug sample_augmentation(std::size_t feature_count, const RngStream& rng) {
  if (feature_count == 0) throw EmptyRequestError("sample_augmentation: feature_count is 0");
  Rng r(rng);
  const std::size_t n = feature_count;
  Matrix g(n, n);
  for (double& v : g.values()) v = r.normal();
  Matrix a = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) += 0.05 * (g(i, j) + g(j, i));

  auto eig = symmetric_eigen(a);
  double max_abs = 0.0;
  for (double v : eig.values) max_abs = std::max(max_abs, std::abs(v));
  const double floor_abs = max_abs / kMaxCondition;
  bool clipped = false;
  for (double& v : eig.values) {
    if (std::abs(v) < floor_abs) {
      v = v < 0.0 ? -floor_abs : floor_abs;
      clipped = true;
    }
  }
  if (clipped) {
    Matrix rebuilt(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          acc += eig.vectors(i, k) * eig.values[k] * eig.vectors(j, k);
        rebuilt(i, j) = acc;
      }
    a = std::move(rebuilt);
  }

  RealVec b(n);
  for (double& v : b) v = 0.1 * r.normal();
  return AffineAug{std::move(a), std::move(b)};
}

AffineAug identity_augmentation(std::size_t feature_count) {
  return AffineAug{Matrix::identity(feature_count), RealVec(feature_count, 0.0)};
}

std::vector<int> domain_labels(const DomainFamily& family, std::size_t d) {
  if (d >= family.specs.size()) throw DimensionError("domain_labels: no such domain");
  const auto& rule = family.specs[d].label_rule;
  if (rule.weights.size() != family.latent.cols())
    throw DimensionError("domain_labels: label rule width differs from feature count");
  g_label_evaluations.fetch_add(1, std::memory_order_relaxed);
  std::vector<int> labels(family.latent.rows());
  for (std::size_t n = 0; n < labels.size(); ++n)
    labels[n] = dot(rule.weights, family.latent.row(n)) > rule.threshold ? 1 : 0;
  return labels;
}

std::uint64_t label_rule_evaluations() noexcept {
  return g_label_evaluations.load(std::memory_order_relaxed);
}

void write_family_csv(std::ostream& out, const DomainFamily& family) {
  if (family.domains.empty()) return;
  const std::size_t f_count = family.domains.front().data.cols();
  out << "#schema=" << kCsvSchemaVersion << "\ndomain,sample";
  for (std::size_t f = 0; f < f_count; ++f) out << ",x" << f;
  out << '\n';
  for (const auto& dom : family.domains) {
    for (std::size_t n = 0; n < dom.data.rows(); ++n) {
      out << dom.domain_id << ',' << n;
      for (double v : dom.data.row(n)) out << ',' << format_real(v);
      out << '\n';
    }
  }
}

}  // namespace fedgala
