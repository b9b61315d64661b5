#include "fedgala/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedgala/errors.hpp"

namespace fedgala {

namespace {

void require_same_length(std::span<const double> u, std::span<const double> v, const char* op) {
  if (u.size() != v.size()) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()) + ")");
  }
}

RealVec average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  RealVec ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double dot(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "cosine");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  if (nu < kZeroNormEps || nv < kZeroNormEps) return 0.0;
  return std::clamp(uv / (nu * nv), -1.0, 1.0);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same_length(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

RealVec matvec(const Matrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw DimensionError("matvec: matrix columns do not match vector");
  RealVec y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

bool all_finite(std::span<const double> u) noexcept {
  return std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); });
}

double mean(std::span<const double> u) {
  if (u.empty()) throw EmptyRequestError("mean of empty series");
  return std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
}

double sample_covariance(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "sample_covariance");
  if (u.size() < 2) throw EmptyRequestError("sample covariance needs at least 2 points");
  const double mu = mean(u);
  const double mv = mean(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += (u[i] - mu) * (v[i] - mv);
  return acc / static_cast<double>(u.size() - 1);
}

double sample_variance(std::span<const double> u) { return sample_covariance(u, u); }

double sample_correlation(std::span<const double> u, std::span<const double> v) {
  const double su = std::sqrt(sample_variance(u));
  const double sv = std::sqrt(sample_variance(v));
  if (su < kZeroNormEps || sv < kZeroNormEps) return 0.0;
  // Rounding can push a perfect correlation just past +-1.
  return std::clamp(sample_covariance(u, v) / (su * sv), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "spearman");
  if (x.size() < 3) throw PreconditionError("spearman rank correlation needs at least 3 points");
  const RealVec rx = average_ranks(x);
  const RealVec ry = average_ranks(y);
  return sample_correlation(rx, ry);
}

SymmetricEigen symmetric_eigen(const Matrix& sym) {
  if (sym.rows() != sym.cols()) throw DimensionError("symmetric_eigen: matrix is not square");
  const std::size_t n = sym.rows();
  Matrix a = sym;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  SymmetricEigen out{RealVec(n), std::move(v)};
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  return out;
}

}  // namespace fedgala
