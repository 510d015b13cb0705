#pragma once

// Dense kernels for the small symmetric problems in this library
// (dimensions up to a few hundred).

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace matns {

using Vector = std::vector<double>;

/// Row-major dense matrix with at least one row and one column.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major data; throws on shape mismatch or non-finite entries.
  DenseMatrix(std::size_t rows, std::size_t cols, Vector data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  DenseMatrix transpose() const;
  Vector diag() const;
  double trace() const;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(DenseMatrix a, double s);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, std::span<const double> x);

double frobenius_norm(const DenseMatrix& m);
double max_abs(const DenseMatrix& m);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
/// max |m - m^T| / max(1, max|m|)
double asymmetry(const DenseMatrix& m);
DenseMatrix symmetrize(const DenseMatrix& m);

/// Principal submatrix picking the given rows and columns.
DenseMatrix submatrix(const DenseMatrix& m, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols);

/// Lower-triangular L with L L^T = m. Throws NotPositiveDefinite on a pivot <= 0.
DenseMatrix cholesky(const DenseMatrix& m);

/// Solves L L^T x = b given the Cholesky factor.
Vector cholesky_solve(const DenseMatrix& chol, std::span<const double> b);

/// Inverse of an SPD matrix from its Cholesky factor; output symmetrized.
DenseMatrix cholesky_inverse(const DenseMatrix& chol);

struct SymEigen {
  Vector values;         // descending
  DenseMatrix vectors;   // column k pairs with values[k]
};

/// Cyclic Jacobi rotations. Throws NonConvergence after max_sweeps.
SymEigen sym_eigen(const DenseMatrix& m, int max_sweeps = 100);

/// Spectral norm of a symmetric matrix.
double sym_spectral_norm(const DenseMatrix& m);

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

/// Column-stacking vec().
Vector vec(const DenseMatrix& m);

/// Symmetric positive-definite matrix. Construction symmetrizes the input
/// and keeps its Cholesky factor.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  /// Throws NotSymmetric if asymmetry exceeds 1e-12, NotPositiveDefinite
  /// if the factorization fails.
  explicit SpdMatrix(const DenseMatrix& m);

  const DenseMatrix& matrix() const noexcept { return m_; }
  const DenseMatrix& cholesky_factor() const noexcept { return chol_; }
  std::size_t dim() const noexcept { return m_.rows(); }

  DenseMatrix inverse() const { return cholesky_inverse(chol_); }
  Vector solve(std::span<const double> b) const { return cholesky_solve(chol_, b); }

  /// (lambda_min, lambda_max)
  std::pair<double, double> eigen_bounds() const;

 private:
  DenseMatrix m_;
  DenseMatrix chol_;
};

inline constexpr double kSymmetryTolerance = 1e-12;

}  // namespace matns
