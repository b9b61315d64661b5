#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedgala {

using RealVec = std::vector<double>;

/// Norms below this are treated as zero by cosine().
inline constexpr double kZeroNormEps = 1e-12;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

/// Cosine similarity in [-1, 1]. Returns exactly 0 when either norm is
/// below kZeroNormEps. Throws DimensionError on length mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

/// y = M x
RealVec matvec(const Matrix& m, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);

bool all_finite(std::span<const double> u) noexcept;

double mean(std::span<const double> u);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> u);
/// Unbiased sample covariance of two equally long series.
double sample_covariance(std::span<const double> u, std::span<const double> v);
double sample_correlation(std::span<const double> u, std::span<const double> v);

/// Spearman rank correlation with average ranks for ties. Needs >= 3 points.
double spearman(std::span<const double> x, std::span<const double> y);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Columns of `vectors` are the eigenvectors matching `values`.
struct SymmetricEigen {
  RealVec values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& sym);

}  // namespace fedgala
