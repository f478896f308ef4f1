#include "sngp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sngp/metrics.hpp"

namespace sngp::theory {

namespace {

void require_simplex(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    require(std::isfinite(v) && v >= -1e-12 && v <= 1.0 + 1e-12, std::string(what) + ": entry outside [0, 1]");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= 1e-9, std::string(what) + ": entries do not sum to 1");
}

std::vector<double> vertex_scores(std::span<const double> p, const ScoringRule& rule) {
  const std::size_t k = p.size();
  double base = 0.0;
  Vector d(k);
  for (std::size_t j = 0; j < k; ++j) {
    d[j] = rule.psi_prime(p[j]);
    base += -rule.psi(p[j]) + d[j] * p[j];
  }
  // s(p, e_y) = base - psi'(p_y)
  Vector out(k);
  for (std::size_t y = 0; y < k; ++y) out[y] = base - d[y];
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// -1 if a ranks strictly better, +1 if b does, 0 for a tie.
int compare_leximax(const Vector& a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - kOracleTieTolerance) return -1;
    if (a[i] > b[i] + kOracleTieTolerance) return 1;
  }
  return 0;
}

// `pairwise` is true when every grid point is scored against every other.
void check_grid_size(std::size_t num_classes, double step, bool pairwise) {
  require(num_classes >= 2, "oracle: need K >= 2");
  require(step > 0.0 && step <= 1.0, "oracle: step must be in (0, 1]");
  const double divisions = std::round(1.0 / step);
  const double points = SimplexGrid::count_points(num_classes, static_cast<std::size_t>(divisions));
  const double work = pairwise ? points * points : points;
  if (work > kMaxOraclePairs) {
    char msg[200];
    std::snprintf(msg, sizeof msg,
                  "oracle: grid too large to enumerate (K=%zu, step=%g: %.3g points, %.3g pairs; limit %.3g)",
                  num_classes, step, points, points * points, kMaxOraclePairs);
    throw GridTooLargeError(msg);
  }
}

struct Candidate {
  double value;
  Vector tie_key;
  std::size_t index;
};

// `sign` = +1 minimizes value, -1 maximizes.
OracleResult select(const SimplexGrid& grid, std::vector<Candidate>& cands, double sign) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double diff = sign * (cands[i].value - cands[best].value);
    if (diff < -kOracleTieTolerance) {
      best = i;
    } else if (diff <= kOracleTieTolerance && compare_leximax(cands[i].tie_key, cands[best].tie_key) < 0) {
      best = i;
    }
  }
  OracleResult r;
  r.point = grid.point(cands[best].index);
  r.value = cands[best].value;
  r.index = cands[best].index;
  for (const auto& c : cands)
    if (std::abs(c.value - r.value) <= kOracleTieTolerance) ++r.ties;
  return r;
}

}  // namespace

ScoringRule brier_rule(std::size_t num_classes) {
  require(num_classes >= 2, "brier_rule: need K >= 2");
  const double inv_k = 1.0 / static_cast<double>(num_classes);
  return {"brier", [inv_k](double p) { return p * p - inv_k; }, [](double p) { return 2.0 * p; }};
}

ScoringRule log_rule() {
  return {"log",
          [](double p) {
            const double q = std::max(p, kLogClip);
            return q * std::log(q);
          },
          [](double p) { return std::log(std::max(p, kLogClip)) + 1.0; }};
}

ScoringRule make_rule(const std::string& name, std::size_t num_classes) {
  if (name == "brier") return brier_rule(num_classes);
  if (name == "log") return log_rule();
  throw ContractError("unknown scoring rule: " + name);
}

bool entropy_generator_concave(const ScoringRule& rule, std::size_t points) {
  require(points >= 3, "entropy_generator_concave: need at least 3 points");
  const double h = 1.0 / static_cast<double>(points + 1);
  for (std::size_t i = 2; i < points; ++i) {
    const double x = h * static_cast<double>(i);
    // Second difference of -psi.
    const double second = -rule.psi(x - h) + 2.0 * rule.psi(x) - rule.psi(x + h);
    if (!(second < 0.0)) return false;
  }
  return true;
}

SimplexGrid::SimplexGrid(std::size_t num_classes, double step) : k_(num_classes) {
  require(num_classes >= 2, "SimplexGrid: need K >= 2");
  require(step > 0.0 && step <= 1.0, "SimplexGrid: step must be in (0, 1]");
  const double d = std::round(1.0 / step);
  require(std::abs(d * step - 1.0) <= 1e-9, "SimplexGrid: step must divide 1");
  divisions_ = static_cast<std::size_t>(d);

  std::vector<unsigned> cur(k_, 0);
  // Lexicographic enumeration of compositions of `divisions_` into K parts.
  auto rec = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
    if (pos + 1 == k_) {
      cur[pos] = remaining;
      counts_.insert(counts_.end(), cur.begin(), cur.end());
      return;
    }
    for (unsigned c = 0; c <= remaining; ++c) {
      cur[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  rec(rec, 0, static_cast<unsigned>(divisions_));
}

Vector SimplexGrid::point(std::size_t i) const {
  Vector p(k_);
  const auto c = counts(i);
  for (std::size_t j = 0; j < k_; ++j) p[j] = static_cast<double>(c[j]) / static_cast<double>(divisions_);
  return p;
}

double SimplexGrid::count_points(std::size_t num_classes, std::size_t divisions) {
  // C(divisions + K - 1, K - 1)
  double c = 1.0;
  for (std::size_t i = 1; i < num_classes; ++i)
    c = c * static_cast<double>(divisions + i) / static_cast<double>(i);
  return std::round(c);
}

double bregman_score(std::span<const double> p, std::span<const double> p_star, const ScoringRule& rule) {
  require(p.size() == p_star.size() && p.size() >= 2, "bregman_score: size mismatch");
  require_simplex(p, "bregman_score");
  require_simplex(p_star, "bregman_score");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += -rule.psi(p[k]) - rule.psi_prime(p[k]) * (p_star[k] - p[k]);
  return s;
}

double bregman_entropy(std::span<const double> p, const ScoringRule& rule) {
  require_simplex(p, "bregman_entropy");
  double h = 0.0;
  for (double v : p) h -= rule.psi(v);
  return h;
}

double expected_pointwise_score(std::span<const double> p, std::span<const double> p_star, const ScoringRule& rule) {
  require(p.size() == p_star.size(), "expected_pointwise_score: size mismatch");
  Vector e(p.size(), 0.0);
  double s = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    e[y] = 1.0;
    s += p_star[y] * bregman_score(p, e, rule);
    e[y] = 0.0;
  }
  return s;
}

OracleResult minimax_oracle(std::size_t num_classes, double step, const ScoringRule& rule) {
  check_grid_size(num_classes, step, true);
  const SimplexGrid grid(num_classes, step);
  const std::size_t n = grid.size();
  std::vector<Vector> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = grid.point(i);

  std::vector<Candidate> cands(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) {
    const Vector& p = points[i];
    // Per-p constants so each p* costs one dot product.
    double base = 0.0;
    Vector d(num_classes);
    for (std::size_t j = 0; j < num_classes; ++j) {
      d[j] = rule.psi_prime(p[j]);
      base += -rule.psi(p[j]) + d[j] * p[j];
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n; ++q) worst = std::max(worst, base - dot(d, points[q]));
    cands[i] = {worst, vertex_scores(p, rule), i};
  }
  return select(grid, cands, 1.0);
}

OracleResult max_entropy_oracle(std::size_t num_classes, double step, const ScoringRule& rule) {
  check_grid_size(num_classes, step, false);
  const SimplexGrid grid(num_classes, step);
  std::vector<Candidate> cands(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector p = grid.point(i);
    cands[i] = {bregman_entropy(p, rule), vertex_scores(p, rule), i};
  }
  return select(grid, cands, -1.0);
}

Vector mixture_predictive(std::span<const double> p_ind, double p_domain, std::size_t num_classes) {
  require(p_ind.size() == num_classes, "mixture_predictive: size mismatch");
  require(p_domain >= 0.0 && p_domain <= 1.0, "mixture_predictive: p_domain must be in [0, 1]");
  require_simplex(p_ind, "mixture_predictive");
  const double u = (1.0 - p_domain) / static_cast<double>(num_classes);
  Vector p(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) p[k] = p_domain * p_ind[k] + u;
  return p;
}

L1EceCheck l1_ece_bound_check(const Matrix& model_probs, const Matrix& true_probs, std::size_t n_draws, Rng& rng,
                              int num_bins) {
  require(model_probs.rows() == true_probs.rows() && model_probs.cols() == true_probs.cols(),
          "l1_ece_bound_check: probability arrays are not aligned");
  require(model_probs.rows() > 0 && n_draws > 0, "l1_ece_bound_check: empty input");
  const std::size_t rows = model_probs.rows();
  const std::size_t k_count = model_probs.cols();

  Matrix probs(n_draws, k_count);
  std::vector<int> labels(n_draws);
  double l1 = 0.0;
  for (std::size_t d = 0; d < n_draws; ++d) {
    const std::size_t r = d % rows;
    std::copy(model_probs.row(r).begin(), model_probs.row(r).end(), probs.row(d).begin());
    const auto truth = true_probs.row(r);
    const double u = rng.uniform01();
    double acc = 0.0;
    int y = static_cast<int>(k_count) - 1;
    for (std::size_t k = 0; k < k_count; ++k) {
      acc += truth[k];
      if (u < acc) {
        y = static_cast<int>(k);
        break;
      }
    }
    labels[d] = y;
    const auto mp = model_probs.row(r);
    const std::size_t yhat = static_cast<std::size_t>(std::max_element(mp.begin(), mp.end()) - mp.begin());
    l1 += std::abs(truth[yhat] - mp[yhat]);
  }
  L1EceCheck out;
  out.ece = metrics::ece(probs, labels, num_bins);
  out.l1 = l1 / static_cast<double>(n_draws);
  out.tolerance = 3.0 / std::sqrt(static_cast<double>(n_draws));
  out.holds = out.ece <= out.l1 + out.tolerance;
  return out;
}

}  // namespace sngp::theory
