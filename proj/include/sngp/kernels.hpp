#pragma once

// Data-parallel batch kernels. Every kernel exists twice: a plain serial
// reference and an OpenMP version. Both evaluate each output element with
// the same arithmetic in the same order, so results are bit-identical and
// independent of the thread count.

#include <span>

#include "sngp/linalg.hpp"

namespace sngp::kernels {

namespace serial {

/// out(i, :) = W x_i + bias. bias may be empty.
Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias);

/// out(i, j) = sqrt(2/D) cos(-inv_scale * <w_j, h_i> + b_j).
Matrix random_features(const Matrix& h, const Matrix& w, std::span<const double> b,
                       double inv_scale);

/// p += scale * sum_i weights[i] phi_i phi_iᵀ. Upper triangle is computed
/// and mirrored, so p stays exactly symmetric.
void accumulate_weighted_outer(Matrix& p, const Matrix& phi, std::span<const double> weights,
                               double scale);

/// out[i] = |L^{-1} phi_i|^2 for lower-triangular L (i.e. phi_iᵀ (L Lᵀ)^{-1} phi_i).
Vector quadratic_forms(const Matrix& lower, const Matrix& phi);

}  // namespace serial

namespace omp {

Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias);
Matrix random_features(const Matrix& h, const Matrix& w, std::span<const double> b,
                       double inv_scale);
void accumulate_weighted_outer(Matrix& p, const Matrix& phi, std::span<const double> weights,
                               double scale);
Vector quadratic_forms(const Matrix& lower, const Matrix& phi);

}  // namespace omp

using omp::accumulate_weighted_outer;
using omp::affine;
using omp::quadratic_forms;
using omp::random_features;

}  // namespace sngp::kernels
