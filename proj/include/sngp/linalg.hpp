#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sngp {

using Vector = std::vector<double>;

/// Raised when a caller breaks an operation's documented precondition
/// (dimension mismatch, out-of-range hyperparameter, stale tape, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the Cholesky factorization when a pivot is not positive.
class NotSpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message);

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Matrix transposed() const;
  Matrix& operator*=(double s);
  Matrix& operator+=(const Matrix& other);
  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double frobenius_norm(const Matrix& m);

Vector matvec(const Matrix& m, std::span<const double> v);
/// mᵀ·v without forming the transpose.
Vector matvec_transposed(const Matrix& m, std::span<const double> v);
Matrix matmul(const Matrix& a, const Matrix& b);

/// Lower-triangular L with a = L·Lᵀ. Throws NotSpdError on a pivot <= 0.
Matrix cholesky(const Matrix& a);
/// Solves L·y = b for lower-triangular L.
Vector forward_substitute(const Matrix& lower, std::span<const double> b);
/// Solves Lᵀ·x = y for lower-triangular L.
Vector backward_substitute_transposed(const Matrix& lower, std::span<const double> y);
/// Solves a·x = b through the Cholesky factor of a.
Vector solve_spd(const Matrix& a, std::span<const double> b);

struct PowerIterationResult {
  double sigma = 0.0;
  Vector u;
};

/// Estimates the largest singular value of w by `iters` rounds of
/// u <- W Wᵀ u / |W Wᵀ u|, warm-started from u0 (length w.rows()).
/// The returned u is the unit left-singular estimate to feed back next call.
/// A zero matrix (or u0 in the null space of wᵀ) gives sigma = 0 and u0 back.
PowerIterationResult power_iteration(const Matrix& w, int iters, std::span<const double> u0);

}  // namespace sngp
