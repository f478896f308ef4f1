#pragma once

// Independent reference computations used only by the tests. None of these
// share code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sngp/linalg.hpp"

namespace oracle {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(sngp::Matrix a, int sweeps = 100) {
  const std::size_t n = a.rows();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Largest singular value via the eigenvalues of Wᵀ W.
inline double sigma_max(const sngp::Matrix& w) {
  const std::size_t n = w.cols();
  sngp::Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, i) * w(r, j);
      g(i, j) = s;
    }
  return std::sqrt(std::max(0.0, jacobi_eigenvalues(g).back()));
}

/// Gauss-Jordan inverse with partial pivoting.
inline sngp::Matrix inverse(const sngp::Matrix& a) {
  const std::size_t n = a.rows();
  sngp::Matrix m = a;
  sngp::Matrix inv = sngp::Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(m(c, k), m(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const double d = m(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      m(c, k) /= d;
      inv(c, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        m(r, k) -= f * m(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

/// AUROC as the fraction of (positive, negative) pairs ranked correctly,
/// ties counting one half.
inline double pairwise_auroc(const std::vector<double>& scores, const std::vector<bool>& pos) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!pos[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (pos[j]) continue;
      den += 1.0;
      if (scores[i] > scores[j]) num += 1.0;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  return num / den;
}

/// Average precision by sweeping every distinct threshold from the top.
inline double brute_average_precision(const std::vector<double>& scores, const std::vector<bool>& pos) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double total_pos = 0.0;
  for (bool p : pos) total_pos += p ? 1.0 : 0.0;
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, sel = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= t) {
        sel += 1.0;
        tp += pos[i] ? 1.0 : 0.0;
      }
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * (tp / sel);
    prev_recall = recall;
  }
  return ap;
}

/// Pearson correlation of average ranks, ranks found by counting.
inline double spearman_by_counting(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0.0, equal = 0.0;
      for (double w : v) {
        if (w < v[i]) less += 1.0;
        else if (w == v[i]) equal += 1.0;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

}  // namespace oracle
