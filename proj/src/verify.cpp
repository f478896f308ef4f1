#include "sngp/verify.hpp"

#include <cmath>
#include <cstdio>

#include "sngp/gp_layer.hpp"
#include "sngp/nn.hpp"
#include "sngp/rng.hpp"
#include "sngp/theory.hpp"

namespace sngp::verify {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Vector random_simplex(Rng& rng, std::size_t k) {
  Vector p(k);
  double s = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - rng.uniform01());
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

std::vector<Check> theory_suite() {
  std::vector<Check> out;
  const double step = 0.05;
  for (std::size_t k : {2u, 3u}) {
    for (const char* rule_name : {"brier", "log"}) {
      const theory::ScoringRule rule = theory::make_rule(rule_name, k);
      const auto mm = theory::minimax_oracle(k, step, rule);
      const auto me = theory::max_entropy_oracle(k, step, rule);
      double dev = 0.0;
      double gap = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        dev = std::max(dev, std::abs(mm.point[j] - 1.0 / static_cast<double>(k)));
        gap = std::max(gap, std::abs(mm.point[j] - me.point[j]));
      }
      Check c;
      c.name = std::string("minimax=max_entropy=uniform K=") + std::to_string(k) + " rule=" + rule_name;
      c.passed = gap == 0.0 && dev <= step + 1e-12;
      c.detail = fmt("max |p - 1/K| = %.4g, |minimax - max_entropy| = %.3g", dev, gap);
      out.push_back(std::move(c));
    }
  }

  Rng rng(20200617);
  for (const char* rule_name : {"brier", "log"}) {
    double min_margin = INFINITY;
    for (int t = 0; t < 100; ++t) {
      const Vector p = random_simplex(rng, 3);
      const Vector q = random_simplex(rng, 3);
      const theory::ScoringRule rule = theory::make_rule(rule_name, 3);
      min_margin = std::min(min_margin, theory::expected_pointwise_score(p, q, rule) -
                                            theory::expected_pointwise_score(q, q, rule));
    }
    out.push_back({std::string("strict propriety rule=") + rule_name, min_margin > 0.0,
                   fmt("min margin over 100 pairs = %.3g", min_margin)});
  }

  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Vector p = random_simplex(rng, 4);
    const Vector m = theory::mixture_predictive(p, rng.uniform01(), 4);
    double s = 0.0;
    for (double v : m) {
      s += v;
      if (v < 0.0) worst = 1.0;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  out.push_back({"mixture predictive stays on the simplex", worst <= 1e-12, fmt("max |sum - 1| = %.3g", worst)});
  return out;
}

std::vector<Check> lipschitz_suite() {
  const double c = 0.9;
  const std::size_t depth = 3;
  NetworkConfig cfg;
  cfg.width = 32;
  cfg.depth = depth;
  cfg.sn_bound = c;
  cfg.dropout_rate = 0.0;
  Rng rng(7);
  ResFfnNetwork net = make_network(cfg, rng);

  std::vector<Check> out;
  double worst_sigma = 0.0;
  for (auto& b : net.blocks) {
    spectral_normalize(b.layer, 200);
    worst_sigma = std::max(worst_sigma, power_iteration(b.layer.weight, 500, b.layer.sn_u).sigma);
  }
  out.push_back({"sigma_max(W) <= c after normalization", worst_sigma <= c + 1e-6,
                 fmt("max sigma = %.9g, c = %.3g", worst_sigma, c)});

  std::vector<std::pair<Vector, Vector>> pairs;
  for (int i = 0; i < 1000; ++i) pairs.emplace_back(sample_uniform(rng, 2, -3, 3), sample_uniform(rng, 2, -3, 3));
  const LipschitzProbe probe = lipschitz_probe(net, pairs);
  const double lo = std::pow(1.0 - c, static_cast<double>(depth));
  const double hi = std::pow(1.0 + c, static_cast<double>(depth));
  out.push_back({"distance ratio within (1-c)^L and (1+c)^L", probe.min_ratio >= lo && probe.max_ratio <= hi,
                 fmt("ratio range [%.4g, %.4g], bounds [%.4g", probe.min_ratio, probe.max_ratio, lo) +
                     fmt(", %.4g]", hi)});
  return out;
}

std::vector<Check> kernel_suite() {
  GpLayerConfig cfg;
  cfg.num_features = 4096;
  cfg.length_scale = 1.0;
  cfg.layer_norm = false;
  Rng rng(11);
  const RffGpLayer layer = make_gp_layer(cfg, 2, rng);
  Rng pts = rng.derive("pairs");
  int within = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector a = sample_uniform(pts, 2, -2, 2);
    const Vector b = sample_uniform(pts, 2, -2, 2);
    const double approx = dot(rff_features(layer, a), rff_features(layer, b));
    const double d2 = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
    const double err = std::abs(approx - std::exp(-d2 / 2.0));
    worst = std::max(worst, err);
    if (err <= 0.05) ++within;
  }
  return {{"RFF kernel within 0.05 on >= 95 of 100 pairs", within >= 95,
           fmt("%.0f/100 within tolerance, worst error %.4g", within, worst)}};
}

std::vector<Check> run_suite(const std::string& name) {
  if (name == "theory") return theory_suite();
  if (name == "lipschitz") return lipschitz_suite();
  if (name == "kernel") return kernel_suite();
  throw ContractError("unknown verify suite: " + name);
}

}  // namespace sngp::verify
