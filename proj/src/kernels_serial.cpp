#include "kernels_detail.hpp"
#include "sngp/kernels.hpp"

namespace sngp::kernels::serial {

Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  detail::check_affine(x, w, bias);
  Matrix out(x.rows(), w.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) detail::affine_row(x, w, bias, i, out);
  return out;
}

Matrix random_features(const Matrix& h, const Matrix& w, std::span<const double> b,
                       double inv_scale) {
  detail::check_features(h, w, b);
  Matrix out(h.rows(), w.rows());
  const double amplitude = std::sqrt(2.0 / static_cast<double>(w.rows()));
  for (std::size_t i = 0; i < h.rows(); ++i)
    detail::feature_row(h, w, b, inv_scale, amplitude, i, out);
  return out;
}

void accumulate_weighted_outer(Matrix& p, const Matrix& phi, std::span<const double> weights,
                               double scale) {
  detail::check_outer(p, phi, weights);
  if (phi.rows() == 0) return;
  const Matrix phi_t = phi.transposed();
  for (std::size_t a = 0; a < p.rows(); ++a) detail::outer_row(p, phi_t, weights, scale, a);
  detail::mirror_upper(p);
}

Vector quadratic_forms(const Matrix& lower, const Matrix& phi) {
  require(lower.rows() == lower.cols() && lower.rows() == phi.cols(),
          "quadratic_forms: shape mismatch");
  Vector out(phi.rows());
  Vector work(phi.cols());
  for (std::size_t i = 0; i < phi.rows(); ++i)
    out[i] = detail::quadratic_form(lower, phi.row(i), work);
  return out;
}

}  // namespace sngp::kernels::serial
