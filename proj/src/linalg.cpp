#include "sngp/linalg.hpp"

#include <cmath>

namespace sngp {

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows * cols, "Matrix: data length does not match rows*cols");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double frobenius_norm(const Matrix& m) { return norm2(m.flat()); }

Vector matvec(const Matrix& m, std::span<const double> v) {
  require(m.cols() == v.size(), "matvec: m.cols != v.len");
  Vector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
  require(m.rows() == v.size(), "matvec_transposed: m.rows != v.len");
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c] * v[r];
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix cholesky(const Matrix& a) {
  require(a.rows() == a.cols(), "cholesky: matrix not square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    const auto lj = l.row(j);
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > 0.0)) {
      throw NotSpdError("matrix is not SPD: pivot " + std::to_string(j) + " = " + std::to_string(d));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const auto li = l.row(i);
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Vector forward_substitute(const Matrix& lower, std::span<const double> b) {
  require(lower.rows() == b.size(), "forward_substitute: size mismatch");
  const std::size_t n = b.size();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = lower.row(i);
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * y[k];
    y[i] = s / li[i];
  }
  return y;
}

Vector backward_substitute_transposed(const Matrix& lower, std::span<const double> y) {
  require(lower.rows() == y.size(), "backward_substitute_transposed: size mismatch");
  const std::size_t n = y.size();
  Vector x(y.begin(), y.end());
  for (std::size_t ii = n; ii-- > 0;) {
    x[ii] /= lower(ii, ii);
    const double xi = x[ii];
    const auto li = lower.row(ii);
    for (std::size_t k = 0; k < ii; ++k) x[k] -= li[k] * xi;
  }
  return x;
}

Vector solve_spd(const Matrix& a, std::span<const double> b) {
  require(a.rows() == b.size(), "solve_spd: a.rows != b.len");
  const Matrix l = cholesky(a);
  return backward_substitute_transposed(l, forward_substitute(l, b));
}

PowerIterationResult power_iteration(const Matrix& w, int iters, std::span<const double> u0) {
  require(u0.size() == w.rows(), "power_iteration: u0 length must equal w.rows");
  require(iters >= 1, "power_iteration: iters must be >= 1");
  PowerIterationResult result{0.0, Vector(u0.begin(), u0.end())};
  const double u0_norm = norm2(u0);
  require(u0_norm > 0.0, "power_iteration: u0 must be nonzero");

  Vector u(u0.begin(), u0.end());
  for (double& x : u) x /= u0_norm;
  for (int it = 0; it < iters; ++it) {
    Vector v = matvec_transposed(w, u);
    const double vn = norm2(v);
    if (vn == 0.0) return result;
    for (double& x : v) x /= vn;
    Vector wu = matvec(w, v);
    const double sigma = norm2(wu);
    if (sigma == 0.0) return result;
    for (double& x : wu) x /= sigma;
    u = std::move(wu);
    result.sigma = sigma;
  }
  result.u = std::move(u);
  return result;
}

}  // namespace sngp
