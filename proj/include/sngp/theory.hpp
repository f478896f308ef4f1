#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sngp/linalg.hpp"
#include "sngp/rng.hpp"

namespace sngp::theory {

/// Separable Bregman scoring rule generated by a convex psi.
///
/// Score of forecast p when the data distribution is p*:
///   s(p, p*) = sum_k [ -psi(p_k) - psi'(p_k) (p*_k - p_k) ]
/// Lower is better. The score is affine in p*, its minimum over p is at
/// p = p*, and the minimum value is the entropy H(p*) = -sum_k psi(p*_k).
///
///   rule   psi(p)        pointwise score s(p, e_y)
///   brier  p^2 - 1/K     |p - e_y|^2
///   log    p log p       -log p_y
///
/// The log rule clips its argument at 1e-9 so zero entries stay finite.
struct ScoringRule {
  std::string name;
  std::function<double(double)> psi;
  std::function<double(double)> psi_prime;
};

ScoringRule brier_rule(std::size_t num_classes);
ScoringRule log_rule();
/// "brier" or "log".
ScoringRule make_rule(const std::string& name, std::size_t num_classes);

inline constexpr double kLogClip = 1e-9;

/// Checks that the entropy generator -psi is strictly concave on (0, 1) by
/// second differences on an evenly spaced grid of `points` interior values.
bool entropy_generator_concave(const ScoringRule& rule, std::size_t points = 999);

/// All points on the K-simplex whose coordinates are multiples of 1/divisions.
/// Points are stored as integer counts; coordinates are counts / divisions,
/// so every point sums to exactly 1.
class SimplexGrid {
 public:
  SimplexGrid(std::size_t num_classes, double step);

  std::size_t num_classes() const { return k_; }
  std::size_t divisions() const { return divisions_; }
  double step() const { return 1.0 / static_cast<double>(divisions_); }
  std::size_t size() const { return counts_.size() / k_; }
  Vector point(std::size_t i) const;
  std::span<const unsigned> counts(std::size_t i) const { return {counts_.data() + i * k_, k_}; }

  /// Number of grid points for (K, divisions), without enumerating.
  static double count_points(std::size_t num_classes, std::size_t divisions);

 private:
  std::size_t k_;
  std::size_t divisions_;
  std::vector<unsigned> counts_;
};

/// Refusal threshold for brute-force enumeration (grid points x grid points).
inline constexpr double kMaxOraclePairs = 1e9;

class GridTooLargeError : public ContractError {
 public:
  using ContractError::ContractError;
};

double bregman_score(std::span<const double> p, std::span<const double> p_star, const ScoringRule& rule);
double bregman_entropy(std::span<const double> p, const ScoringRule& rule);
/// Expected score under p*, as sum_y p*_y s(p, e_y).
double expected_pointwise_score(std::span<const double> p, std::span<const double> p_star, const ScoringRule& rule);

struct OracleResult {
  Vector point;
  double value = 0.0;     // worst-case score (minimax) or entropy (max entropy)
  std::size_t index = 0;  // position in the grid enumeration
  std::size_t ties = 0;   // grid points sharing the optimal value within tolerance
};

inline constexpr double kOracleTieTolerance = 1e-12;

/// argmin over grid p of max over grid p* of s(p, p*).
///
/// Points whose worst-case scores tie (within kOracleTieTolerance) are ranked
/// by their score vector over the simplex vertices, sorted in descending order
/// and compared lexicographically; remaining ties go to the first point in
/// enumeration order. Throws GridTooLargeError above kMaxOraclePairs.
OracleResult minimax_oracle(std::size_t num_classes, double step, const ScoringRule& rule);
/// argmax over grid p of H(p), with the same tie rule.
OracleResult max_entropy_oracle(std::size_t num_classes, double step, const ScoringRule& rule);

/// p_domain * p_ind + (1 - p_domain) / K.
Vector mixture_predictive(std::span<const double> p_ind, double p_domain, std::size_t num_classes);

struct L1EceCheck {
  double ece = 0.0;
  double l1 = 0.0;
  double tolerance = 0.0;
  bool holds = false;
};

/// Draws n_draws labels y ~ true_probs (cycling over the rows), computes the
/// ECE of model_probs against them, and the mean |p*(yhat) - p(yhat)| over
/// the same rows, yhat being the model's argmax. holds = ece <= l1 + 3/sqrt(n).
L1EceCheck l1_ece_bound_check(const Matrix& model_probs, const Matrix& true_probs, std::size_t n_draws, Rng& rng,
                              int num_bins = 15);

}  // namespace sngp::theory
