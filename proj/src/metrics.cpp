#include "sngp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace sngp::metrics {

namespace {

void check_labels(const Matrix& probs, std::span<const int> labels) {
  require(probs.rows() == labels.size(), "metrics: probs rows must equal label count");
  for (int y : labels)
    require(y >= 0 && static_cast<std::size_t>(y) < probs.cols(), "metrics: label out of range");
}

std::size_t argmax(std::span<const double> p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void check_binary(std::span<const double> scores, const std::vector<bool>& positive) {
  require(scores.size() == positive.size(), "auroc/aupr: score and flag counts differ");
  const auto n_pos = std::count(positive.begin(), positive.end(), true);
  require(n_pos > 0 && static_cast<std::size_t>(n_pos) < positive.size(),
          "auroc/aupr: need at least one positive and one negative sample");
}

Vector average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  Vector ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double accuracy(const Matrix& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (argmax(probs.row(i)) == static_cast<std::size_t>(labels[i])) ++correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::vector<ReliabilityBin> reliability_bins(const Matrix& probs, std::span<const int> labels, int num_bins) {
  require(num_bins >= 1, "ece: num_bins must be >= 1");
  check_labels(probs, labels);
  std::vector<ReliabilityBin> bins(static_cast<std::size_t>(num_bins));
  for (int m = 0; m < num_bins; ++m) {
    bins[m].lower = static_cast<double>(m) / num_bins;
    bins[m].upper = static_cast<double>(m + 1) / num_bins;
  }
  std::vector<double> conf_sum(bins.size(), 0.0), acc_sum(bins.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto p = probs.row(i);
    const std::size_t pred = argmax(p);
    const double conf = p[pred];
    int m = static_cast<int>(std::ceil(conf * num_bins)) - 1;
    m = std::clamp(m, 0, num_bins - 1);
    bins[m].count += 1;
    conf_sum[m] += conf;
    acc_sum[m] += pred == static_cast<std::size_t>(labels[i]) ? 1.0 : 0.0;
  }
  for (std::size_t m = 0; m < bins.size(); ++m) {
    if (bins[m].count == 0) continue;
    bins[m].accuracy = acc_sum[m] / static_cast<double>(bins[m].count);
    bins[m].confidence = conf_sum[m] / static_cast<double>(bins[m].count);
  }
  return bins;
}

double ece(const Matrix& probs, std::span<const int> labels, int num_bins) {
  const auto bins = reliability_bins(probs, labels, num_bins);
  if (labels.empty()) return 0.0;
  const double n = static_cast<double>(labels.size());
  double total = 0.0;
  for (const auto& b : bins)
    if (b.count > 0) total += (static_cast<double>(b.count) / n) * std::abs(b.accuracy - b.confidence);
  return total;
}

double ece(const PredictionSet& preds, int num_bins) { return ece(preds.probs, preds.labels, num_bins); }

double nll(const Matrix& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    total -= std::log(std::max(probs(i, static_cast<std::size_t>(labels[i])), kNllFloor));
  return total / static_cast<double>(labels.size());
}

double brier(const Matrix& probs, std::span<const int> labels) {
  check_labels(probs, labels);
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t k = 0; k < probs.cols(); ++k) {
      const double target = static_cast<std::size_t>(labels[i]) == k ? 1.0 : 0.0;
      const double d = probs(i, k) - target;
      total += d * d;
    }
  }
  return total / static_cast<double>(labels.size());
}

double auroc(std::span<const double> scores, const std::vector<bool>& positive) {
  check_binary(scores, positive);
  const Vector ranks = average_ranks(scores);
  double n_pos = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    n_pos += 1.0;
    rank_sum += ranks[i];
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double aupr(std::span<const double> scores, const std::vector<bool>& positive) {
  check_binary(scores, positive);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  double tp = 0.0, fp = 0.0, prev_recall = 0.0, area = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Consume every sample tied at this threshold before scoring it.
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (positive[order[j]]) tp += 1.0; else fp += 1.0;
      ++j;
    }
    const double recall = tp / n_pos;
    const double precision = tp / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double dempster_shafer(std::span<const double> logits) {
  require(!logits.empty(), "dempster_shafer: empty logits");
  const double k = static_cast<double>(logits.size());
  // K / (K + sum exp(z)) evaluated with a shift so large logits do not overflow.
  const double mx = *std::max_element(logits.begin(), logits.end());
  if (mx <= 0.0) {
    double s = 0.0;
    for (double z : logits) s += std::exp(z);
    return k / (k + s);
  }
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  return k * std::exp(-mx) / (k * std::exp(-mx) + s);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2, "spearman: need two equal-length samples");
  const Vector ra = average_ranks(a);
  const Vector rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::string format_report(const std::vector<std::pair<std::string, double>>& entries) {
  std::string out;
  char buf[64];
  for (const auto& [key, value] : entries) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out += key + "=" + buf + "\n";
  }
  return out;
}

}  // namespace sngp::metrics
