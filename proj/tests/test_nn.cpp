#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sngp/nn.hpp"

using namespace sngp;

namespace {

NetworkConfig small_config() {
  NetworkConfig c;
  c.input_dim = 3;
  c.width = 6;
  c.depth = 3;
  c.dropout_rate = 0.0;
  c.activation = Activation::tanh;
  return c;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.flat()) x = rng.normal();
  return m;
}

Matrix project(const DenseLayer& l, const Matrix& x) {
  Matrix out(x.rows(), l.out_dim());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t o = 0; o < l.out_dim(); ++o) {
      double s = l.bias[o];
      for (std::size_t k = 0; k < x.cols(); ++k) s += l.weight(o, k) * x(i, k);
      out(i, o) = s;
    }
  return out;
}

double weighted_sum(const Matrix& h, const Matrix& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += h.flat()[i] * c.flat()[i];
  return s;
}

}  // namespace

TEST_CASE("activation names round-trip") {
  for (Activation a : {Activation::relu, Activation::identity, Activation::tanh})
    CHECK(parse_activation(to_string(a)) == a);
  CHECK(parse_activation("linear") == Activation::identity);
  CHECK_THROWS_AS(parse_activation("gelu"), ContractError);
}

TEST_CASE("zero residual weights make the stack equal the input projection") {
  Rng rng(1);
  ResFfnNetwork net = make_network(small_config(), rng);
  for (auto& b : net.blocks) b.layer.weight = Matrix(6, 6);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix h = forward_eval(net, x);
  const Matrix ref = project(net.input_projection, x);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h.flat()[i] == doctest::Approx(ref.flat()[i]).epsilon(1e-14));
}

TEST_CASE("residual block computes x + act(W x + b)") {
  Rng rng(2);
  NetworkConfig cfg = small_config();
  cfg.depth = 1;
  ResFfnNetwork net = make_network(cfg, rng);
  const Matrix x = random_matrix(2, 3, rng);
  const Matrix p = project(net.input_projection, x);
  const Matrix pre = project(net.blocks[0].layer, p);
  const Matrix h = forward_eval(net, x);
  for (std::size_t i = 0; i < h.size(); ++i)
    CHECK(h.flat()[i] == doctest::Approx(p.flat()[i] + std::tanh(pre.flat()[i])).epsilon(1e-13));
}

TEST_CASE("dropout only acts in train mode and is inverted") {
  Rng rng(3);
  NetworkConfig cfg = small_config();
  cfg.dropout_rate = 0.5;
  const ResFfnNetwork net = make_network(cfg, rng);
  const Matrix x = random_matrix(5, 3, rng);
  Rng r1(9), r2(9);
  CHECK(forward(net, x, false, r1).h == forward_eval(net, x));
  CHECK(r1.next_u64() == r2.next_u64());  // eval mode draws nothing

  const ForwardResult tr = forward(net, x, true, r1);
  for (const auto& bt : tr.tape.blocks)
    for (double m : bt.mask.flat()) CHECK((m == 0.0 || m == 2.0));
}

TEST_CASE("network initialization scales") {
  Rng rng(4);
  NetworkConfig cfg;
  cfg.input_dim = 2;
  cfg.width = 256;
  cfg.depth = 1;
  const ResFfnNetwork net = make_network(cfg, rng);
  double s2 = 0.0;
  for (double w : net.blocks[0].layer.weight.flat()) s2 += w * w;
  CHECK(s2 / static_cast<double>(net.blocks[0].layer.weight.size()) ==
        doctest::Approx(2.0 / 256.0).epsilon(0.02));
  double p2 = 0.0;
  for (double w : net.input_projection.weight.flat()) p2 += w * w;
  CHECK(p2 / static_cast<double>(net.input_projection.weight.size()) == doctest::Approx(1.0 / 256.0).epsilon(0.1));
  CHECK(norm2(net.blocks[0].layer.sn_u) == doctest::Approx(1.0));
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(5);
  NetworkConfig cfg = small_config();
  cfg.train_input_projection = true;
  ResFfnNetwork net = make_network(cfg, rng);
  for (auto& b : net.blocks)
    for (double& v : b.layer.bias) v = 0.1 * rng.normal();
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix c = random_matrix(4, 6, rng);

  Rng unused(0);
  const ForwardResult fwd = forward(net, x, true, unused);
  Matrix grad_x;
  NetworkGrads g = backward(net, fwd.tape, c, &grad_x);

  const auto params = parameter_views(net);
  const auto grads = gradient_views(net, g);
  const double eps = 1e-6;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double orig = params[t][i];
      params[t][i] = orig + eps;
      const double up = weighted_sum(forward_eval(net, x), c);
      params[t][i] = orig - eps;
      const double down = weighted_sum(forward_eval(net, x), c);
      params[t][i] = orig;
      const double fd = (up - down) / (2 * eps);
      CHECK(oracle::rel_error(fd, grads[t][i]) < 1e-6);
    }
  }
  Matrix xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = xp.flat()[i];
    xp.flat()[i] = orig + eps;
    const double up = weighted_sum(forward_eval(net, xp), c);
    xp.flat()[i] = orig - eps;
    const double down = weighted_sum(forward_eval(net, xp), c);
    xp.flat()[i] = orig;
    CHECK(oracle::rel_error((up - down) / (2 * eps), grad_x.flat()[i]) < 1e-6);
  }
}

TEST_CASE("backward rejects a tape from a different network") {
  Rng rng(6);
  const ResFfnNetwork a = make_network(small_config(), rng);
  NetworkConfig other = small_config();
  other.depth = 2;
  const ResFfnNetwork b = make_network(other, rng);
  Rng unused(0);
  const ForwardResult fwd = forward(b, random_matrix(2, 3, rng), false, unused);
  CHECK_THROWS_AS(backward(a, fwd.tape, Matrix(2, 6)), ContractError);
}

TEST_CASE("frozen input projection is excluded from the parameters") {
  Rng rng(7);
  ResFfnNetwork net = make_network(small_config(), rng);
  CHECK(parameter_views(net).size() == 2 * net.depth());
  net.train_input_projection = true;
  CHECK(parameter_views(net).size() == 2 * net.depth() + 2);
}

TEST_CASE("spectral normalization rescales only when the estimate exceeds the bound") {
  Rng rng(8);
  DenseLayer l = make_dense_layer(10, 10, 1.0, rng);
  l.sn_bound = 0.9;
  const double before = oracle::sigma_max(l.weight);
  REQUIRE(before > 0.9);
  const double lambda = spectral_normalize(l, 200);
  CHECK(lambda == doctest::Approx(before).epsilon(1e-8));
  CHECK(oracle::sigma_max(l.weight) == doctest::Approx(0.9).epsilon(1e-8));

  DenseLayer small = make_dense_layer(10, 10, 0.01, rng);
  small.sn_bound = 0.9;
  const Matrix w0 = small.weight;
  spectral_normalize(small, 5);
  CHECK(small.weight == w0);
}

TEST_CASE("spectral normalization persists u between calls") {
  Rng rng(9);
  DenseLayer l = make_dense_layer(6, 6, 1.0, rng);
  const Vector u0 = l.sn_u;
  spectral_normalize(l, 1);
  CHECK(l.sn_u != u0);
  CHECK(norm2(l.sn_u) == doctest::Approx(1.0));
}

TEST_CASE("distance ratios respect the residual Lipschitz bounds") {
  Rng rng(10);
  NetworkConfig cfg = small_config();
  cfg.width = 16;
  cfg.activation = Activation::relu;
  ResFfnNetwork net = make_network(cfg, rng);
  for (auto& b : net.blocks) {
    b.layer.sn_bound = 0.5;
    spectral_normalize(b.layer, 300);
  }
  std::vector<std::pair<Vector, Vector>> pairs;
  for (int i = 0; i < 300; ++i) pairs.emplace_back(sample_normal(rng, 3), sample_normal(rng, 3));
  pairs.emplace_back(Vector{1, 2, 3}, Vector{1, 2, 3});
  const LipschitzProbe p = lipschitz_probe(net, pairs);
  CHECK(p.pairs_skipped == 1);
  CHECK(p.pairs_used == 300);
  CHECK(p.min_ratio >= std::pow(0.5, 3.0));
  CHECK(p.max_ratio <= std::pow(1.5, 3.0));
}

TEST_CASE("SGD with momentum follows v = mu v + g, p -= lr v") {
  SgdMomentum opt(0.1, 0.5);
  Vector p{1.0, -1.0};
  Vector g{2.0, 4.0};
  std::vector<std::span<double>> params{p};
  std::vector<std::span<double>> grads{g};
  opt.step(params, grads);
  CHECK(p[0] == doctest::Approx(0.8));
  CHECK(p[1] == doctest::Approx(-1.4));
  opt.step(params, grads);
  // v = 0.5 * 2 + 2 = 3; p = 0.8 - 0.3
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(SgdMomentum(0.0, 0.5), ContractError);
  CHECK_THROWS_AS(SgdMomentum(0.1, 1.0), ContractError);
}
