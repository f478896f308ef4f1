#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sngp/metrics.hpp"
#include "sngp/rng.hpp"

using namespace sngp;
using namespace sngp::metrics;

TEST_CASE("accuracy, NLL and Brier on a hand example") {
  const Matrix p{{0.9, 0.1}, {0.4, 0.6}, {0.7, 0.3}};
  const std::vector<int> y{0, 1, 1};
  CHECK(accuracy(p, y) == doctest::Approx(2.0 / 3.0));
  CHECK(nll(p, y) == doctest::Approx(-(std::log(0.9) + std::log(0.6) + std::log(0.3)) / 3.0));
  CHECK(brier(p, y) == doctest::Approx((0.02 + 0.32 + 0.98) / 3.0));
  CHECK(nll(Matrix{{1.0, 0.0}}, std::vector<int>{1}) == doctest::Approx(-std::log(kNllFloor)));
  CHECK_THROWS_AS(accuracy(p, std::vector<int>{0, 1}), ContractError);
}

TEST_CASE("ECE on a hand example") {
  // Confidences 0.9, 0.9 (one right), 0.6 (right); 10 bins.
  const Matrix p{{0.9, 0.1}, {0.1, 0.9}, {0.6, 0.4}};
  const std::vector<int> y{0, 0, 0};
  // bin (0.8, 0.9]: conf 0.9, acc 0.5 -> weight 2/3 * 0.4; bin (0.5, 0.6]: conf 0.6, acc 1 -> 1/3 * 0.4
  CHECK(ece(p, y, 10) == doctest::Approx(0.4));
}

TEST_CASE("ECE bin edges are right-closed") {
  const auto bins = reliability_bins(Matrix{{0.6, 0.4}}, std::vector<int>{0}, 5);
  CHECK(bins[2].count == 1);  // 0.6 lies in (0.4, 0.6]
  const auto edge = reliability_bins(Matrix{{1.0, 0.0}}, std::vector<int>{0}, 15);
  CHECK(edge[14].count == 1);
}

TEST_CASE("ECE of a perfectly calibrated predictor vanishes with n") {
  Rng rng(3);
  const std::size_t n = 100000;
  Matrix p(n, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = rng.uniform01();
    p(i, 0) = q;
    p(i, 1) = 1 - q;
    y[i] = rng.uniform01() < q ? 0 : 1;
  }
  CHECK(ece(p, y) < 0.02);
}

TEST_CASE("AUROC matches the pairwise oracle, including ties") {
  Rng rng(4);
  std::vector<double> s(60);
  std::vector<bool> pos(60);
  for (std::size_t i = 0; i < 60; ++i) {
    s[i] = std::round(rng.normal() * 3.0) / 3.0;  // force ties
    pos[i] = rng.uniform01() < 0.4;
  }
  CHECK(auroc(s, pos) == doctest::Approx(oracle::pairwise_auroc(s, pos)).epsilon(1e-12));
  CHECK(auroc(std::vector<double>{1, 2, 3, 4}, {false, false, true, true}) == 1.0);
  CHECK(auroc(std::vector<double>{1, 1, 1, 1}, {false, true, false, true}) == 0.5);
  CHECK_THROWS_AS(auroc(std::vector<double>{1, 2}, {true, true}), ContractError);
}

TEST_CASE("AUPR matches the brute-force threshold sweep") {
  Rng rng(5);
  std::vector<double> s(80);
  std::vector<bool> pos(80);
  for (std::size_t i = 0; i < 80; ++i) {
    s[i] = std::round(rng.normal() * 4.0) / 4.0;
    pos[i] = rng.uniform01() < 0.3;
  }
  CHECK(aupr(s, pos) == doctest::Approx(oracle::brute_average_precision(s, pos)).epsilon(1e-12));
  CHECK(aupr(std::vector<double>{0.1, 0.9}, {false, true}) == 1.0);
  // One positive ranked last among four: precision 1/4 at full recall.
  CHECK(aupr(std::vector<double>{4, 3, 2, 1}, {false, false, false, true}) == doctest::Approx(0.25));
}

TEST_CASE("Dempster-Shafer score") {
  CHECK(dempster_shafer(std::vector<double>{0.0, 0.0}) == doctest::Approx(0.5));
  CHECK(dempster_shafer(std::vector<double>{1.0, -1.0}) == doctest::Approx(2.0 / (2.0 + std::exp(1.0) + std::exp(-1.0))));
  CHECK(dempster_shafer(std::vector<double>{1000.0, 0.0}) == doctest::Approx(0.0));
  CHECK(dempster_shafer(std::vector<double>{-1000.0, -1000.0}) == doctest::Approx(1.0));
  CHECK(dempster_shafer(std::vector<double>{2.0, 1.0}) < dempster_shafer(std::vector<double>{1.0, 0.5}));
}

TEST_CASE("Spearman matches the counting oracle and is rank based") {
  Rng rng(6);
  std::vector<double> a(50), b(50);
  for (std::size_t i = 0; i < 50; ++i) {
    a[i] = std::round(rng.normal() * 2.0);
    b[i] = a[i] + rng.normal();
  }
  CHECK(spearman(a, b) == doctest::Approx(oracle::spearman_by_counting(a, b)).epsilon(1e-12));
  std::vector<double> c(50);
  for (std::size_t i = 0; i < 50; ++i) c[i] = std::exp(b[i]);
  CHECK(spearman(a, c) == doctest::Approx(spearman(a, b)).epsilon(1e-12));
  CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("report formatting") {
  CHECK(format_report({{"accuracy", 0.5}, {"ece", 0.125}}) == "accuracy=0.5\nece=0.125\n");
}
