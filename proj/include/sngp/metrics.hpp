#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sngp/linalg.hpp"

namespace sngp::metrics {

/// Predicted class probabilities with true labels; optional OOD flags and
/// per-sample uncertainty scores (higher = more uncertain / more OOD).
struct PredictionSet {
  Matrix probs;  // N x K
  std::vector<int> labels;
  std::vector<bool> ood_flags;
  Vector uncertainty_scores;
};

inline constexpr int kDefaultEceBins = 15;

double accuracy(const Matrix& probs, std::span<const int> labels);

/// Equal-width bins on max-probability over [0, 1]; bin m holds confidences
/// in (m/M, (m+1)/M], with confidence 0 falling in the first bin.
double ece(const Matrix& probs, std::span<const int> labels, int num_bins = kDefaultEceBins);
double ece(const PredictionSet& preds, int num_bins = kDefaultEceBins);

struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;
  double confidence = 0.0;
};
std::vector<ReliabilityBin> reliability_bins(const Matrix& probs, std::span<const int> labels,
                                             int num_bins = kDefaultEceBins);

inline constexpr double kNllFloor = 1e-12;
double nll(const Matrix& probs, std::span<const int> labels);
double brier(const Matrix& probs, std::span<const int> labels);

/// Rank-statistic AUROC with half credit for ties. Positives are the flagged
/// (OOD) samples; a higher score should mean "more OOD".
double auroc(std::span<const double> scores, const std::vector<bool>& positive);
/// Average precision: sum over distinct thresholds (descending) of
/// (recall_t - recall_{t-1}) * precision_t.
double aupr(std::span<const double> scores, const std::vector<bool>& positive);

/// K / (K + sum_k exp(logit_k)).
double dempster_shafer(std::span<const double> logits);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// `metric=value` lines.
std::string format_report(const std::vector<std::pair<std::string, double>>& entries);

}  // namespace sngp::metrics
