#include <omp.h>

#include "kernels_detail.hpp"
#include "sngp/kernels.hpp"

namespace sngp::kernels::omp {

namespace {
using index_t = long long;
index_t as_index(std::size_t n) { return static_cast<index_t>(n); }
}  // namespace

Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  detail::check_affine(x, w, bias);
  Matrix out(x.rows(), w.rows());
  const index_t n = as_index(x.rows());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) detail::affine_row(x, w, bias, static_cast<std::size_t>(i), out);
  return out;
}

Matrix random_features(const Matrix& h, const Matrix& w, std::span<const double> b,
                       double inv_scale) {
  detail::check_features(h, w, b);
  Matrix out(h.rows(), w.rows());
  const double amplitude = std::sqrt(2.0 / static_cast<double>(w.rows()));
  const index_t n = as_index(h.rows());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i)
    detail::feature_row(h, w, b, inv_scale, amplitude, static_cast<std::size_t>(i), out);
  return out;
}

void accumulate_weighted_outer(Matrix& p, const Matrix& phi, std::span<const double> weights,
                               double scale) {
  detail::check_outer(p, phi, weights);
  if (phi.rows() == 0) return;
  const Matrix phi_t = phi.transposed();
  const index_t d = as_index(p.rows());
  // Row a holds d - a entries; dynamic scheduling balances the triangle.
#pragma omp parallel for schedule(dynamic, 8)
  for (index_t a = 0; a < d; ++a)
    detail::outer_row(p, phi_t, weights, scale, static_cast<std::size_t>(a));
  detail::mirror_upper(p);
}

Vector quadratic_forms(const Matrix& lower, const Matrix& phi) {
  require(lower.rows() == lower.cols() && lower.rows() == phi.cols(),
          "quadratic_forms: shape mismatch");
  Vector out(phi.rows());
  const index_t n = as_index(phi.rows());
#pragma omp parallel
  {
    Vector work(phi.cols());
#pragma omp for schedule(static)
    for (index_t i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] =
          detail::quadratic_form(lower, phi.row(static_cast<std::size_t>(i)), work);
  }
  return out;
}

}  // namespace sngp::kernels::omp
