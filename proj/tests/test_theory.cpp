#include <doctest.h>

#include <cmath>

#include "sngp/rng.hpp"
#include "sngp/theory.hpp"

using namespace sngp;
using namespace sngp::theory;

namespace {

Vector random_simplex(Rng& rng, std::size_t k) {
  Vector p(k);
  double s = 0.0;
  for (double& v : p) s += (v = -std::log(1.0 - rng.uniform01()));
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

TEST_CASE("pointwise scores reduce to Brier and log loss") {
  const Vector p{0.2, 0.5, 0.3};
  const Vector e1{0.0, 1.0, 0.0};
  CHECK(bregman_score(p, e1, brier_rule(3)) == doctest::Approx(0.04 + 0.25 + 0.09));
  CHECK(bregman_score(p, e1, log_rule()) == doctest::Approx(-std::log(0.5)));
}

TEST_CASE("score at p = p* is the entropy") {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Vector p = random_simplex(rng, 3);
    for (const auto& rule : {brier_rule(3), log_rule()})
      CHECK(bregman_score(p, p, rule) == doctest::Approx(bregman_entropy(p, rule)).epsilon(1e-12));
  }
}

TEST_CASE("entropy closed forms") {
  CHECK(bregman_entropy(Vector{0.5, 0.5}, brier_rule(2)) == doctest::Approx(0.5));
  CHECK(bregman_entropy(Vector{1.0, 0.0}, brier_rule(2)) == doctest::Approx(0.0));
  CHECK(bregman_entropy(Vector(4, 0.25), log_rule()) == doctest::Approx(std::log(4.0)));
  for (std::size_t k : {2u, 3u, 5u})
    CHECK(bregman_entropy(Vector(k, 1.0 / k), brier_rule(k)) == doctest::Approx((k - 1.0) / k));
}

TEST_CASE("expected score decomposition matches Monte Carlo") {
  Rng rng(2);
  const Vector p = random_simplex(rng, 3), q = random_simplex(rng, 3);
  for (const auto& rule : {brier_rule(3), log_rule()}) {
    double mc = 0.0;
    const int n = 1000000;
    Vector e(3, 0.0);
    double s_by_class[3];
    for (int y = 0; y < 3; ++y) {
      e.assign(3, 0.0);
      e[y] = 1.0;
      s_by_class[y] = bregman_score(p, e, rule);
    }
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform01();
      const int y = u < q[0] ? 0 : (u < q[0] + q[1] ? 1 : 2);
      mc += s_by_class[y];
    }
    mc /= n;
    CHECK(std::abs(mc - bregman_score(p, q, rule)) < 1e-3);
    CHECK(expected_pointwise_score(p, q, rule) == doctest::Approx(bregman_score(p, q, rule)).epsilon(1e-12));
  }
}

TEST_CASE("strict propriety on random pairs") {
  Rng rng(3);
  for (const auto& rule : {brier_rule(4), log_rule()}) {
    for (int t = 0; t < 100; ++t) {
      const Vector p = random_simplex(rng, 4), q = random_simplex(rng, 4);
      CHECK(expected_pointwise_score(p, q, rule) > expected_pointwise_score(q, q, rule));
    }
  }
}

TEST_CASE("entropy generator is strictly concave") {
  CHECK(entropy_generator_concave(brier_rule(3)));
  CHECK(entropy_generator_concave(log_rule()));
  const ScoringRule wrong{"flipped", [](double p) { return -p * p; }, [](double p) { return -2 * p; }};
  CHECK_FALSE(entropy_generator_concave(wrong));
}

TEST_CASE("off-simplex input is rejected") {
  CHECK_THROWS_AS(bregman_score(Vector{0.5, 0.6}, Vector{0.5, 0.5}, brier_rule(2)), ContractError);
  CHECK_THROWS_AS(bregman_entropy(Vector{-0.1, 1.1}, brier_rule(2)), ContractError);
  CHECK_THROWS_AS(make_rule("spherical", 2), ContractError);
}

TEST_CASE("simplex grid enumeration is exact") {
  const SimplexGrid g(3, 0.05);
  CHECK(g.size() == 231);
  CHECK(SimplexGrid::count_points(3, 20) == 231.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    unsigned total = 0;
    for (unsigned c : g.counts(i)) total += c;
    REQUIRE(total == 20u);
  }
  const SimplexGrid h(2, 0.5);
  CHECK(h.size() == 3);
  CHECK(h.point(1) == Vector{0.5, 0.5});
  CHECK_THROWS_AS(SimplexGrid(2, 0.3), ContractError);
}

TEST_CASE("minimax and max-entropy oracles return the uniform point") {
  CHECK(minimax_oracle(2, 0.05, brier_rule(2)).point == Vector{0.5, 0.5});
  CHECK(minimax_oracle(2, 0.5, log_rule()).point == Vector{0.5, 0.5});
  CHECK(max_entropy_oracle(2, 0.01, brier_rule(2)).point == Vector{0.5, 0.5});
  for (const auto& rule : {brier_rule(3), log_rule()}) {
    const auto mm = minimax_oracle(3, 0.05, rule);
    const auto me = max_entropy_oracle(3, 0.05, rule);
    CHECK(mm.point == me.point);
    for (double v : mm.point) CHECK(std::abs(v - 1.0 / 3.0) <= 0.05);
  }
  const auto me4 = max_entropy_oracle(4, 0.05, log_rule());
  for (double v : me4.point) CHECK(std::abs(v - 0.25) <= 0.05);
}

TEST_CASE("log-rule minimax tie is broken towards the flatter point") {
  // (0.35, 0.35, 0.30) and (0.40, 0.30, 0.30) share the worst-case score -log 0.3.
  const auto mm = minimax_oracle(3, 0.05, log_rule());
  CHECK(mm.ties > 1);
  double mx = 0.0;
  for (double v : mm.point) mx = std::max(mx, v);
  CHECK(mx == doctest::Approx(0.35));
}

TEST_CASE("entropy at uniform beats every vertex") {
  for (const auto& rule : {brier_rule(3), log_rule()}) {
    const double hu = bregman_entropy(Vector(3, 1.0 / 3.0), rule);
    for (int v = 0; v < 3; ++v) {
      Vector e(3, 0.0);
      e[v] = 1.0;
      CHECK(hu > bregman_entropy(e, rule));
    }
  }
}

TEST_CASE("oversized grids are refused with a size estimate") {
  try {
    minimax_oracle(6, 0.01, brier_rule(6));
    FAIL("expected refusal");
  } catch (const GridTooLargeError& e) {
    CHECK(std::string(e.what()).find("points") != std::string::npos);
  }
}

TEST_CASE("mixture predictive") {
  CHECK(mixture_predictive(Vector{1.0, 0.0}, 0.5, 2) == Vector{0.75, 0.25});
  CHECK(mixture_predictive(Vector{0.2, 0.8}, 1.0, 2) == Vector{0.2, 0.8});
  CHECK(mixture_predictive(Vector{0.2, 0.8}, 0.0, 2) == Vector{0.5, 0.5});
  CHECK_THROWS_AS(mixture_predictive(Vector{0.2, 0.8}, 1.5, 2), ContractError);
}

TEST_CASE("L1 bound on ECE") {
  Rng rng(5);
  const std::size_t n = 100000;
  SUBCASE("model equals truth") {
    Matrix p(1000, 2);
    for (std::size_t i = 0; i < 1000; ++i) {
      const double q = rng.uniform01();
      p(i, 0) = q;
      p(i, 1) = 1 - q;
    }
    const auto r = l1_ece_bound_check(p, p, n, rng);
    CHECK(r.l1 == 0.0);
    CHECK(r.holds);
  }
  SUBCASE("systematic overconfidence of 0.2") {
    Matrix truth(1000, 2), model(1000, 2);
    for (std::size_t i = 0; i < 1000; ++i) {
      const double q = 0.55 + 0.2 * rng.uniform01();
      truth(i, 0) = q;
      truth(i, 1) = 1 - q;
      model(i, 0) = q + 0.2;
      model(i, 1) = 0.8 - q;
    }
    const auto r = l1_ece_bound_check(model, truth, n, rng);
    CHECK(r.l1 == doctest::Approx(0.2));
    CHECK(r.ece == doctest::Approx(0.2).epsilon(0.1));
    CHECK(r.holds);
  }
}
