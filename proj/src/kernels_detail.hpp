#pragma once

// Per-element bodies shared by the serial and OpenMP kernels.

#include <cmath>
#include <span>

#include "sngp/linalg.hpp"

namespace sngp::kernels::detail {

inline void check_affine(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  require(x.cols() == w.cols(), "affine: input width does not match weight columns");
  require(bias.empty() || bias.size() == w.rows(), "affine: bias length mismatch");
}

inline void affine_row(const Matrix& x, const Matrix& w, std::span<const double> bias,
                       std::size_t i, Matrix& out) {
  const auto xi = x.row(i);
  auto dst = out.row(i);
  for (std::size_t j = 0; j < w.rows(); ++j) {
    const auto wj = w.row(j);
    double s = bias.empty() ? 0.0 : bias[j];
    for (std::size_t k = 0; k < xi.size(); ++k) s += wj[k] * xi[k];
    dst[j] = s;
  }
}

inline void check_features(const Matrix& h, const Matrix& w, std::span<const double> b) {
  require(h.cols() == w.cols(), "random_features: input width does not match weight columns");
  require(b.size() == w.rows(), "random_features: bias length mismatch");
}

inline void feature_row(const Matrix& h, const Matrix& w, std::span<const double> b,
                        double inv_scale, double amplitude, std::size_t i, Matrix& out) {
  const auto hi = h.row(i);
  auto dst = out.row(i);
  for (std::size_t j = 0; j < w.rows(); ++j) {
    const auto wj = w.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < hi.size(); ++k) s += wj[k] * hi[k];
    dst[j] = amplitude * std::cos(-inv_scale * s + b[j]);
  }
}

inline void check_outer(const Matrix& p, const Matrix& phi, std::span<const double> weights) {
  require(p.rows() == p.cols() && p.rows() == phi.cols(), "accumulate_weighted_outer: shape mismatch");
  require(weights.size() == phi.rows(), "accumulate_weighted_outer: weight count mismatch");
}

/// Row a of the upper triangle: p(a, b) += scale * sum_i (w_i phiT(a, i)) phiT(b, i), b >= a.
inline void outer_row(Matrix& p, const Matrix& phi_t, std::span<const double> weights,
                      double scale, std::size_t a) {
  const auto pa = phi_t.row(a);
  const std::size_t n = weights.size();
  for (std::size_t b = a; b < p.cols(); ++b) {
    const auto pb = phi_t.row(b);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (weights[i] * pa[i]) * pb[i];
    p(a, b) += scale * s;
  }
}

inline void mirror_upper(Matrix& p) {
  for (std::size_t a = 0; a < p.rows(); ++a)
    for (std::size_t b = a + 1; b < p.cols(); ++b) p(b, a) = p(a, b);
}

inline double quadratic_form(const Matrix& lower, std::span<const double> phi, std::span<double> work) {
  const std::size_t n = phi.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = lower.row(i);
    double s = phi[i];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * work[k];
    work[i] = s / li[i];
    total += work[i] * work[i];
  }
  return total;
}

}  // namespace sngp::kernels::detail
