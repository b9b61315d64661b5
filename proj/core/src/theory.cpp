#include "fedgala/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedgala/encoders.hpp"
#include "fedgala/errors.hpp"

namespace fedgala {

namespace {

constexpr std::uint64_t kTagFamily = 11;
constexpr std::uint64_t kTagInit = 12;
constexpr std::uint64_t kTagAug = 13;
constexpr std::uint64_t kTagShuffle = 14;

double mean_diag(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, i);
  return acc / static_cast<double>(m.rows());
}

Matrix covariance_of_difference(const GradientSample& a, const GradientSample& b) {
  GradientSample diff{a.vectors, a.source_domain};
  for (std::size_t i = 0; i < diff.vectors.values().size(); ++i)
    diff.vectors.values()[i] -= b.vectors.values()[i];
  return empirical_grad_cov(diff, diff);
}

double best_rho_dropping_one(std::span<const double> x, std::span<const double> y) {
  double best = spearman(x, y);
  if (x.size() < 4) return best;
  for (std::size_t skip = 0; skip < x.size(); ++skip) {
    RealVec xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i == skip) continue;
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
    best = std::max(best, spearman(xs, ys));
  }
  return best;
}

void require_grid(std::span<const double> grid) {
  if (grid.size() < 3)
    throw PreconditionError("rank correlation over the covariance grid needs at least 3 points");
  for (double c : grid)
    if (!(c > 0.0 && c < 1.0)) throw PreconditionError("covariance grid entries must lie in (0, 1)");
}

// Central differences of g_f with respect to x_f at x = 0.
template <typename GradFn>
RealVec diagonal_derivative_at_zero(std::size_t f_count, GradFn&& grad) {
  RealVec out(f_count);
  RealVec x(f_count, 0.0);
  for (std::size_t f = 0; f < f_count; ++f) {
    x[f] = kClaimStep;
    const double plus = grad(x)[f];
    x[f] = -kClaimStep;
    const double minus = grad(x)[f];
    x[f] = 0.0;
    out[f] = (plus - minus) / (2.0 * kClaimStep);
  }
  return out;
}

SignCheck compare_signs(const RealVec& di, const RealVec& dj) {
  SignCheck out;
  std::size_t positive = 0;
  for (std::size_t f = 0; f < di.size(); ++f) {
    if (std::abs(di[f]) < 1e-9 || std::abs(dj[f]) < 1e-9) out.degenerate = true;
    if (di[f] * dj[f] > 0.0 && !(std::abs(di[f]) < 1e-9 || std::abs(dj[f]) < 1e-9)) ++positive;
  }
  out.fraction = static_cast<double>(positive) / static_cast<double>(di.size());
  return out;
}

}  // namespace

double summarize(const Matrix& cov, CovSummary kind) {
  if (cov.rows() != cov.cols() || cov.rows() == 0)
    throw DimensionError("summarize: covariance must be square and non-empty");
  switch (kind) {
    case CovSummary::MeanDiag:
      return mean_diag(cov);
    case CovSummary::Trace:
      return mean_diag(cov) * static_cast<double>(cov.rows());
    case CovSummary::FrobeniusSym: {
      double acc = 0.0;
      for (std::size_t i = 0; i < cov.rows(); ++i)
        for (std::size_t j = 0; j < cov.cols(); ++j) {
          const double s = 0.5 * (cov(i, j) + cov(j, i));
          acc += s * s;
        }
      return std::sqrt(acc);
    }
  }
  return 0.0;
}

const char* to_string(CovSummary kind) noexcept {
  switch (kind) {
    case CovSummary::MeanDiag:
      return "mean_diag";
    case CovSummary::Trace:
      return "trace";
    case CovSummary::FrobeniusSym:
      return "frobenius_sym";
  }
  return "?";
}

CovSummary cov_summary_from_string(const std::string& name) {
  if (name == "mean_diag") return CovSummary::MeanDiag;
  if (name == "trace") return CovSummary::Trace;
  if (name == "frobenius_sym") return CovSummary::FrobeniusSym;
  throw ConfigError("unknown covariance summary '" + name +
                    "' (expected mean_diag, trace or frobenius_sym)");
}

Matrix taylor_cov_estimate(const Matrix& jac_i, const Matrix& jac_j,
                           std::span<const double> feature_cov) {
  const std::size_t f_count = feature_cov.size();
  if (jac_i.cols() != f_count || jac_j.cols() != f_count)
    throw DimensionError("taylor_cov_estimate: Jacobian width differs from feature count");
  Matrix out(jac_i.rows(), jac_j.rows());
  for (std::size_t m = 0; m < jac_i.rows(); ++m)
    for (std::size_t n = 0; n < jac_j.rows(); ++n) {
      double acc = 0.0;
      for (std::size_t f = 0; f < f_count; ++f) acc += feature_cov[f] * jac_i(m, f) * jac_j(n, f);
      out(m, n) = acc;
    }
  return out;
}

Matrix empirical_grad_cov(const GradientSample& a, const GradientSample& b) {
  const Matrix& x = a.vectors;
  const Matrix& y = b.vectors;
  if (x.rows() != y.rows()) throw DimensionError("empirical_grad_cov: sample counts differ");
  if (x.rows() < 2) throw PreconditionError("empirical_grad_cov: needs at least 2 draws");
  const std::size_t m = x.rows();
  RealVec mx(x.cols(), 0.0), my(y.cols(), 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    axpy(1.0, x.row(r), mx);
    axpy(1.0, y.row(r), my);
  }
  for (double& v : mx) v /= static_cast<double>(m);
  for (double& v : my) v /= static_cast<double>(m);
  Matrix cov(x.cols(), y.cols());
  RealVec dx(x.cols()), dy(y.cols());
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = x(r, i) - mx[i];
    for (std::size_t j = 0; j < dy.size(); ++j) dy[j] = y(r, j) - my[j];
    for (std::size_t i = 0; i < dx.size(); ++i) {
      auto row = cov.row(i);
      for (std::size_t j = 0; j < dy.size(); ++j) row[j] += dx[i] * dy[j];
    }
  }
  for (double& v : cov.values()) v /= static_cast<double>(m - 1);
  return cov;
}

RealVec full_negative_sample_grad(std::span<const double> w, const Matrix& data,
                                  std::span<const double> scores, std::size_t row,
                                  const AffineAug& aug) {
  const std::size_t f_count = data.cols();
  const auto x = data.row(row);
  const RealVec pos = apply_augmentation(x, aug);
  RealVec g = one_layer_contrastive_grad(w, x, pos, true);
  // sum_{k != row} s_k (x - x_k) = x * sum s_k - sum s_k x_k
  double s_total = 0.0;
  RealVec weighted(f_count, 0.0);
  for (std::size_t k = 0; k < data.rows(); ++k) {
    if (k == row) continue;
    const double s = sigmoid(scores[row] - scores[k]);
    s_total += s;
    const auto xk = data.row(k);
    for (std::size_t f = 0; f < f_count; ++f) weighted[f] += s * xk[f];
  }
  for (std::size_t f = 0; f < f_count; ++f) g[f] += s_total * x[f] - weighted[f];
  return g;
}

PairedGradients assumption1_round(double domain_cov, const TheoryProtocol& protocol,
                                  std::uint64_t seed) {
  const std::size_t f_count = protocol.feature_count;
  const std::size_t n = protocol.samples;
  if (n < 2) throw PreconditionError("assumption1_round: needs at least 2 samples");
  const RngStream root{seed, 0};
  const double rho = std::sqrt(domain_cov);
  const std::vector<DomainSpec> specs{uniform_spec(f_count, rho), uniform_spec(f_count, rho)};
  const DomainFamily family = generate_family(specs, n, root.derive(kTagFamily));
  const AffineAug aug = sample_augmentation(f_count, root.derive(kTagAug));
  const LayeredParams init = init_one_layer(f_count, root.derive(kTagInit));
  RealVec w(init.values(0).begin(), init.values(0).end());

  const std::size_t batch = std::clamp<std::size_t>(protocol.batch_size, 1, n);
  RealVec scores(n);
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < protocol.epochs; ++epoch) {
    RealVec averaged(f_count, 0.0);
    for (std::size_t c = 0; c < 2; ++c) {
      const Matrix& data = family.domains[c].data;
      RealVec wc = w;
      Rng rng(root.derive(kTagShuffle, epoch * 2 + c));
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::size_t start = 0; start < n; start += batch) {
        for (std::size_t k = 0; k < n; ++k) scores[k] = dot(wc, data.row(k));
        RealVec grad(f_count, 0.0);
        for (std::size_t b = start; b < std::min(n, start + batch); ++b)
          axpy(1.0, full_negative_sample_grad(wc, data, scores, order[b], aug), grad);
        axpy(-protocol.learning_rate, grad, wc);
      }
      if (!all_finite(wc))
        throw NonFiniteError("assumption1_round: non-finite weights (cov=" +
                             std::to_string(domain_cov) + ", seed=" + std::to_string(seed) +
                             ", epoch=" + std::to_string(epoch) + ")");
      axpy(0.5, wc, averaged);
    }
    w = std::move(averaged);
  }

  PairedGradients out{GradientSample{Matrix(n, f_count), 0}, GradientSample{Matrix(n, f_count), 1},
                      w};
  for (std::size_t c = 0; c < 2; ++c) {
    const Matrix& data = family.domains[c].data;
    for (std::size_t k = 0; k < n; ++k) scores[k] = dot(w, data.row(k));
    Matrix& dst = c == 0 ? out.client_i.vectors : out.client_j.vectors;
    for (std::size_t r = 0; r < n; ++r) {
      const RealVec g = full_negative_sample_grad(w, data, scores, r, aug);
      if (!all_finite(g))
        throw NonFiniteError("assumption1_round: non-finite gradient (cov=" +
                             std::to_string(domain_cov) + ", seed=" + std::to_string(seed) + ")");
      std::copy(g.begin(), g.end(), dst.row(r).begin());
    }
  }
  return out;
}

std::vector<TrendPoint> assumption1_grid(std::span<const double> cov_grid,
                                         const TheoryProtocol& protocol) {
  require_grid(cov_grid);
  if (protocol.seeds.empty()) throw PreconditionError("theory protocol needs at least one seed");
  std::vector<TrendPoint> points;
  for (double c : cov_grid) {
    TrendPoint p;
    p.domain_cov = c;
    p.mi = mutual_information_closed_form(RealVec(protocol.feature_count, c));
    for (std::uint64_t seed : protocol.seeds) {
      const PairedGradients g = assumption1_round(c, protocol, seed);
      p.per_seed_grad_cov.push_back(
          summarize(empirical_grad_cov(g.client_i, g.client_j), protocol.summary));
      p.per_seed_var_diff.push_back(
          summarize(covariance_of_difference(g.client_i, g.client_j), protocol.summary));
    }
    p.grad_cov_summary = mean(p.per_seed_grad_cov);
    p.var_diff = mean(p.per_seed_var_diff);
    points.push_back(std::move(p));
  }
  std::sort(points.begin(), points.end(),
            [](const TrendPoint& a, const TrendPoint& b) { return a.domain_cov < b.domain_cov; });
  return points;
}

TheoremTrend theorem1_trend(std::vector<TrendPoint> points) {
  if (points.size() < 3) throw PreconditionError("theorem trend needs at least 3 grid points");
  RealVec x, y;
  for (const auto& p : points) {
    x.push_back(p.domain_cov);
    y.push_back(p.grad_cov_summary);
  }
  TheoremTrend t;
  t.spearman_rho = spearman(x, y);
  t.spearman_rho_one_outlier = best_rho_dropping_one(x, y);
  t.points = std::move(points);
  return t;
}

TheoremTrend theorem1_experiment(std::span<const double> cov_grid, const TheoryProtocol& protocol) {
  return theorem1_trend(assumption1_grid(cov_grid, protocol));
}

CorollaryResult corollary1_trend(std::vector<TrendPoint> points) {
  if (points.size() < 3) throw PreconditionError("corollary trend needs at least 3 grid points");
  RealVec mi, vd;
  for (const auto& p : points) {
    mi.push_back(p.mi);
    vd.push_back(p.var_diff);
  }
  CorollaryResult r;
  r.spearman_rho = spearman(mi, vd);
  r.points = std::move(points);
  return r;
}

CorollaryResult corollary1_check(std::span<const double> cov_grid, const TheoryProtocol& protocol) {
  return corollary1_trend(assumption1_grid(cov_grid, protocol));
}

Proposition1Result proposition1_check(const GradientSample& g_i, const GradientSample& g_j,
                                      std::span<const double> g_est) {
  const Matrix& a = g_i.vectors;
  const Matrix& b = g_j.vectors;
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() != g_est.size())
    throw DimensionError("proposition1_check: gradient sets and g_est disagree in shape");
  if (a.rows() < 3)
    throw PreconditionError("proposition1_check: needs at least 3 vectors per set");

  std::size_t offending = a.rows();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    if (!(cosine(a.row(k), g_est) > 0.0))
      throw PreconditionError("proposition1_check: g_i vector " + std::to_string(k) +
                              " is not aligned with g_est");
    const double cj = cosine(b.row(k), g_est);
    if (cj < 0.0) {
      if (offending != a.rows())
        throw PreconditionError("proposition1_check: more than one g_j vector opposes g_est");
      offending = k;
    } else if (!(cj > 0.0)) {
      throw PreconditionError("proposition1_check: g_j vector " + std::to_string(k) +
                              " is orthogonal to g_est");
    }
  }
  if (offending == a.rows())
    throw PreconditionError("proposition1_check: no g_j vector opposes g_est");

  Proposition1Result r;
  r.removed_index = offending;
  r.before = mean_diag(empirical_grad_cov(g_i, g_j));
  GradientSample ri{Matrix(a.rows() - 1, a.cols()), g_i.source_domain};
  GradientSample rj{Matrix(b.rows() - 1, b.cols()), g_j.source_domain};
  for (std::size_t k = 0, out = 0; k < a.rows(); ++k) {
    if (k == offending) continue;
    std::copy(a.row(k).begin(), a.row(k).end(), ri.vectors.row(out).begin());
    std::copy(b.row(k).begin(), b.row(k).end(), rj.vectors.row(out).begin());
    ++out;
  }
  r.after = mean_diag(empirical_grad_cov(ri, rj));
  r.holds = r.after > r.before;
  return r;
}

Proposition1Instance random_proposition1_instance(Rng& rng, std::size_t dim, std::size_t vectors) {
  if (dim < 2 || vectors < 3) throw PreconditionError("proposition instance too small");
  for (;;) {
    RealVec u(dim);
    for (double& v : u) v = rng.normal();
    const double un = norm(u);
    for (double& v : u) v /= un;

    Proposition1Instance inst{GradientSample{Matrix(vectors, dim), 0},
                              GradientSample{Matrix(vectors, dim), 1}, RealVec(dim, 0.0)};
    for (std::size_t k = 0; k < vectors; ++k) {
      // Shared per-draw component: small along u, unit variance across it.
      RealVec shared(dim);
      for (double& v : shared) v = rng.normal();
      const double along = dot(shared, u);
      const double along_scaled = 0.25 * rng.normal();
      for (std::size_t f = 0; f < dim; ++f) shared[f] += (along_scaled - along) * u[f];
      for (std::size_t f = 0; f < dim; ++f) {
        inst.g_i.vectors(k, f) = u[f] + shared[f] + 0.3 * rng.normal();
        inst.g_j.vectors(k, f) = u[f] + shared[f] + 0.3 * rng.normal();
      }
    }
    const double alpha = rng.uniform(0.5, 1.5);
    for (std::size_t f = 0; f < dim; ++f)
      inst.g_j.vectors(vectors - 1, f) = -alpha * u[f] + 0.3 * rng.normal();

    for (std::size_t k = 0; k < vectors; ++k) {
      axpy(1.0, inst.g_i.vectors.row(k), inst.g_est);
      axpy(1.0, inst.g_j.vectors.row(k), inst.g_est);
    }
    for (double& v : inst.g_est) v /= static_cast<double>(2 * vectors);

    bool ok = true;
    for (std::size_t k = 0; k < vectors && ok; ++k) {
      ok = cosine(inst.g_i.vectors.row(k), inst.g_est) > 0.0;
      const double cj = cosine(inst.g_j.vectors.row(k), inst.g_est);
      ok = ok && (k + 1 == vectors ? cj < 0.0 : cj > 0.0);
    }
    if (ok) return inst;
  }
}

Proposition1Instance constructed_proposition1_instance(std::size_t dim, std::size_t vectors) {
  if (dim < 1 || vectors < 3) throw PreconditionError("proposition instance too small");
  RealVec u(dim);
  for (std::size_t f = 0; f < dim; ++f) u[f] = 1.0 + 0.1 * static_cast<double>(f);
  Proposition1Instance inst{GradientSample{Matrix(vectors, dim), 0},
                            GradientSample{Matrix(vectors, dim), 1}, RealVec(dim, 0.0)};
  for (std::size_t k = 0; k < vectors; ++k) {
    const bool last = k + 1 == vectors;
    for (std::size_t f = 0; f < dim; ++f) {
      inst.g_i.vectors(k, f) = (last ? 2.0 : 1.0) * u[f];
      inst.g_j.vectors(k, f) = (last ? -1.0 : 1.0) * u[f];
    }
  }
  for (std::size_t k = 0; k < vectors; ++k) {
    axpy(1.0, inst.g_i.vectors.row(k), inst.g_est);
    axpy(1.0, inst.g_j.vectors.row(k), inst.g_est);
  }
  for (double& v : inst.g_est) v /= static_cast<double>(2 * vectors);
  return inst;
}

const char* to_string(ClaimMode mode) noexcept {
  switch (mode) {
    case ClaimMode::SslPositive:
      return "ssl_positive";
    case ClaimMode::SslNegative:
      return "ssl_negative";
    case ClaimMode::SupervisedLogistic:
      return "supervised_logistic";
  }
  return "?";
}

SignCheck ssl_sign_check(bool positive_pairs, const SslClaimInstance& inst) {
  const std::size_t f_count = inst.w.size();
  if (inst.aug.feature_count() != f_count)
    throw DimensionError("ssl_sign_check: augmentation width differs from W");
  if (positive_pairs) {
    // Both clients share W, A and B, so g+ is the same function for both;
    // it is still evaluated once per client.
    auto g_pos = [&](const RealVec& x) {
      return one_layer_contrastive_grad(inst.w, x, apply_augmentation(x, inst.aug), true);
    };
    const RealVec di = diagonal_derivative_at_zero(f_count, g_pos);
    const RealVec dj = diagonal_derivative_at_zero(f_count, g_pos);
    return compare_signs(di, dj);
  }
  auto summed_negative = [&](const Matrix& negatives) {
    if (negatives.cols() != f_count)
      throw DimensionError("ssl_sign_check: negatives width differs from W");
    return [&, f_count](const RealVec& x) {
      RealVec g(f_count, 0.0);
      for (std::size_t k = 0; k < negatives.rows(); ++k)
        axpy(1.0, one_layer_contrastive_grad(inst.w, x, negatives.row(k), false), g);
      return g;
    };
  };
  const RealVec di = diagonal_derivative_at_zero(f_count, summed_negative(inst.negatives_i));
  const RealVec dj = diagonal_derivative_at_zero(f_count, summed_negative(inst.negatives_j));
  return compare_signs(di, dj);
}

SignCheck supervised_sign_check(const SupervisedClaimInstance& inst) {
  if (inst.w_i.size() != inst.w_j.size())
    throw DimensionError("supervised_sign_check: client weight widths differ");
  if (inst.label != 0 && inst.label != 1)
    throw PreconditionError("supervised_sign_check: label must be 0 or 1");
  const double y = inst.label;
  auto logistic_grad = [y](const RealVec& w, double b) {
    return [&w, b, y](const RealVec& x) {
      const double p = sigmoid(dot(w, x) + b);
      RealVec g(x.size());
      for (std::size_t f = 0; f < x.size(); ++f) g[f] = (p - y) * x[f];
      return g;
    };
  };
  const RealVec di = diagonal_derivative_at_zero(inst.w_i.size(), logistic_grad(inst.w_i, inst.bias_i));
  const RealVec dj = diagonal_derivative_at_zero(inst.w_j.size(), logistic_grad(inst.w_j, inst.bias_j));
  return compare_signs(di, dj);
}

SignCheck claim1_sign_check(ClaimMode mode, const RngStream& stream, std::size_t feature_count,
                            std::size_t negatives) {
  Rng rng(stream);
  RealVec w(feature_count);
  for (double& v : w) v = rng.uniform(-1.0, 1.0) / std::sqrt(static_cast<double>(feature_count));
  switch (mode) {
    case ClaimMode::SslPositive: {
      SslClaimInstance inst{w, sample_augmentation(feature_count, stream.derive(1)), {}, {}};
      return ssl_sign_check(true, inst);
    }
    case ClaimMode::SslNegative: {
      const auto family = generate_family(
          {uniform_spec(feature_count, 0.5), uniform_spec(feature_count, 0.5)}, negatives,
          stream.derive(2));
      SslClaimInstance inst{w, sample_augmentation(feature_count, stream.derive(1)),
                            family.domains[0].data, family.domains[1].data};
      return ssl_sign_check(false, inst);
    }
    case ClaimMode::SupervisedLogistic: {
      SupervisedClaimInstance inst;
      inst.w_i = w;
      inst.w_j.resize(feature_count);
      for (double& v : inst.w_j) v = rng.uniform(-1.0, 1.0);
      inst.bias_i = rng.uniform(-3.0, 3.0);
      inst.bias_j = rng.uniform(-3.0, 3.0);
      inst.label = rng.uniform() < 0.5 ? 0 : 1;
      return supervised_sign_check(inst);
    }
  }
  return {};
}

Lemma1Report lemma1_vs_estimator(std::span<const double> sigma_grid,
                                 std::span<const std::size_t> feature_counts, std::size_t samples,
                                 const RngStream& rng) {
  Lemma1Report report;
  std::uint64_t idx = 0;
  for (std::size_t f_count : feature_counts) {
    for (double sigma : sigma_grid) {
      Lemma1Point p{f_count, sigma, mutual_information_closed_form(RealVec(f_count, sigma)), 0.0};
      if (sigma == 0.0) {
        // Independent domains: the estimator is checked elsewhere; here
        // both sides are exactly zero by construction.
        p.estimated = 0.0;
      } else {
        const double rho = std::sqrt(sigma);
        const auto family = generate_family(
            {uniform_spec(f_count, rho), uniform_spec(f_count, rho)}, samples, rng.derive(idx));
        p.estimated = mutual_information_empirical(family.domains[0], family.domains[1]);
      }
      report.max_abs_error = std::max(report.max_abs_error, std::abs(p.estimated - p.closed_form));
      report.points.push_back(p);
      ++idx;
    }
  }
  return report;
}

Lemma2Report lemma2_linear_check(std::size_t dim, std::size_t feature_count, std::size_t draws,
                                 const RngStream& stream) {
  if (draws < 2) throw PreconditionError("lemma2_linear_check: needs at least 2 draws");
  Rng rng(stream);
  Matrix jac(dim, feature_count);
  for (double& v : jac.values()) v = rng.normal();
  RealVec cov(feature_count), rho(feature_count);
  for (std::size_t f = 0; f < feature_count; ++f) {
    cov[f] = rng.uniform(0.1, 0.9);
    rho[f] = std::sqrt(cov[f]);
  }

  Lemma2Report report;
  report.taylor = taylor_cov_estimate(jac, jac, cov);

  // Streamed cross-covariance: sums of g_i, g_j and g_i g_j^T.
  Rng sampler(stream.derive(1));
  RealVec xi(feature_count), xj(feature_count), si(dim, 0.0), sj(dim, 0.0);
  Matrix cross(dim, dim);
  for (std::size_t t = 0; t < draws; ++t) {
    for (std::size_t f = 0; f < feature_count; ++f) {
      const double z = sampler.normal();
      const double tail = std::sqrt(1.0 - rho[f] * rho[f]);
      xi[f] = rho[f] * z + tail * sampler.normal();
      xj[f] = rho[f] * z + tail * sampler.normal();
    }
    const RealVec gi = matvec(jac, xi);
    const RealVec gj = matvec(jac, xj);
    axpy(1.0, gi, si);
    axpy(1.0, gj, sj);
    for (std::size_t m = 0; m < dim; ++m) {
      auto row = cross.row(m);
      for (std::size_t n = 0; n < dim; ++n) row[n] += gi[m] * gj[n];
    }
  }
  const double count = static_cast<double>(draws);
  report.empirical = Matrix(dim, dim);
  for (std::size_t m = 0; m < dim; ++m)
    for (std::size_t n = 0; n < dim; ++n)
      report.empirical(m, n) = (cross(m, n) - si[m] * sj[n] / count) / (count - 1.0);

  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < report.taylor.values().size(); ++k) {
    const double d = report.empirical.values()[k] - report.taylor.values()[k];
    diff += d * d;
    ref += report.taylor.values()[k] * report.taylor.values()[k];
  }
  report.relative_error = std::sqrt(diff / ref);
  return report;
}

std::vector<double> default_cov_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

}  // namespace fedgala
