#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sngp/kernels.hpp"
#include "sngp/rng.hpp"

using namespace sngp;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.flat()) x = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("serial and OpenMP kernels are bit-identical") {
  Rng rng(17);
  const Matrix x = random_matrix(97, 13, rng);
  const Matrix w = random_matrix(31, 13, rng);
  const Vector b = sample_normal(rng, 31);
  CHECK(kernels::serial::affine(x, w, b) == kernels::omp::affine(x, w, b));
  CHECK(kernels::serial::affine(x, w, {}) == kernels::omp::affine(x, w, {}));
  CHECK(kernels::serial::random_features(x, w, b, 0.7) == kernels::omp::random_features(x, w, b, 0.7));

  const Matrix phi = random_matrix(50, 31, rng);
  Vector weights(50);
  for (double& v : weights) v = rng.uniform01();
  Matrix p1 = Matrix::identity(31), p2 = Matrix::identity(31);
  kernels::serial::accumulate_weighted_outer(p1, phi, weights, 0.3);
  kernels::omp::accumulate_weighted_outer(p2, phi, weights, 0.3);
  CHECK(p1 == p2);

  const Matrix l = cholesky(p1);
  CHECK(kernels::serial::quadratic_forms(l, phi) == kernels::omp::quadratic_forms(l, phi));
}

TEST_CASE("affine matches matmul plus bias") {
  Rng rng(18);
  const Matrix x = random_matrix(5, 4, rng);
  const Matrix w = random_matrix(3, 4, rng);
  const Vector b{1.0, -2.0, 0.5};
  const Matrix y = kernels::affine(x, w, b);
  const Matrix ref = matmul(x, w.transposed());
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(y(i, j) == doctest::Approx(ref(i, j) + b[j]).epsilon(1e-13));
  CHECK_THROWS_AS(kernels::affine(x, Matrix(3, 5), b), ContractError);
}

TEST_CASE("weighted outer accumulation is symmetric and matches the explicit sum") {
  Rng rng(19);
  const Matrix phi = random_matrix(20, 6, rng);
  Vector w(20);
  for (double& v : w) v = rng.uniform01();
  Matrix p(6, 6);
  kernels::accumulate_weighted_outer(p, phi, w, 2.0);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) {
      double ref = 0.0;
      for (std::size_t i = 0; i < 20; ++i) ref += 2.0 * w[i] * phi(i, a) * phi(i, b);
      CHECK(p(a, b) == doctest::Approx(ref).epsilon(1e-12));
      CHECK(p(a, b) == p(b, a));
    }
}

TEST_CASE("quadratic forms equal phiᵀ A⁻¹ phi") {
  Rng rng(20);
  const Matrix g = random_matrix(8, 8, rng);
  Matrix a = matmul(g, g.transposed());
  for (std::size_t i = 0; i < 8; ++i) a(i, i) += 1.0;
  const Matrix phi = random_matrix(4, 8, rng);
  const Vector q = kernels::quadratic_forms(cholesky(a), phi);
  const Matrix inv = oracle::inverse(a);
  for (std::size_t i = 0; i < 4; ++i) {
    const Vector y = matvec(inv, phi.row(i));
    CHECK(q[i] == doctest::Approx(dot(phi.row(i), y)).epsilon(1e-10));
  }
}
