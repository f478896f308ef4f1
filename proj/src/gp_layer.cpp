#include "sngp/gp_layer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sngp/kernels.hpp"

namespace sngp {

RffGpLayer make_gp_layer(const GpLayerConfig& config, std::size_t input_dim, Rng& rng) {
  require(config.num_features > 0, "gp layer: num_features must be positive");
  require(config.num_classes >= 1, "gp layer: num_classes must be positive");
  require(config.length_scale > 0.0, "gp layer: length_scale must be positive");
  require(config.ridge > 0.0, "gp layer: ridge must be positive");
  require(config.discount >= 0.0 && config.discount < 1.0, "gp layer: discount must be in [0,1)");
  require(input_dim > 0, "gp layer: input_dim must be positive");

  RffGpLayer layer;
  layer.input_dim = input_dim;
  layer.length_scale = config.length_scale;
  layer.ridge = config.ridge;
  layer.discount = config.discount;
  layer.layer_norm = config.layer_norm;
  layer.shared_precision = config.shared_precision;

  std::size_t feature_in = input_dim;
  if (config.projection_dim > 0) {
    Rng proj_rng = rng.derive("gp-projection");
    Matrix p(config.projection_dim, input_dim);
    const double sd = 1.0 / std::sqrt(static_cast<double>(config.projection_dim));
    for (double& x : p.flat()) x = sd * proj_rng.normal();
    layer.projection = std::move(p);
    feature_in = config.projection_dim;
  }

  Rng w_rng = rng.derive("rff-weights");
  layer.w_fixed = Matrix(config.num_features, feature_in);
  for (double& x : layer.w_fixed.flat()) x = w_rng.normal();
  Rng b_rng = rng.derive("rff-phases");
  layer.b_fixed = sample_uniform(b_rng, config.num_features, 0.0, 2.0 * std::numbers::pi);

  layer.beta = Matrix(config.num_classes, config.num_features);
  layer.precision.resize(config.shared_precision ? 1 : config.num_classes);
  reset_precision(layer);
  return layer;
}

namespace {

double amplitude(const RffGpLayer& layer) {
  return std::sqrt(2.0 / static_cast<double>(layer.num_features()));
}

// Applies the optional layer norm and projection; fills the tape if given.
Matrix prepare_input(const RffGpLayer& layer, const Matrix& h, FeatureTape* tape) {
  require(h.cols() == layer.input_dim, "rff_features: input dimension mismatch");
  Matrix x = h;
  if (layer.layer_norm) {
    Vector inv_std(h.rows());
    const double n = static_cast<double>(h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i) {
      auto r = x.row(i);
      double mean = 0.0;
      for (double v : r) mean += v;
      mean /= n;
      double var = 0.0;
      for (double v : r) var += (v - mean) * (v - mean);
      var /= n;
      inv_std[i] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
      for (double& v : r) v = (v - mean) * inv_std[i];
    }
    if (tape != nullptr) {
      tape->inv_std = std::move(inv_std);
      tape->normalized = x;
    }
  }
  if (layer.projection) x = kernels::affine(x, *layer.projection, {});
  return x;
}

}  // namespace

Matrix rff_features_batch(const RffGpLayer& layer, const Matrix& h, FeatureTape* tape) {
  if (tape == nullptr) {
    const Matrix x = prepare_input(layer, h, nullptr);
    return kernels::random_features(x, layer.w_fixed, layer.b_fixed, 1.0 / layer.length_scale);
  }
  tape->input = h;
  tape->projected = prepare_input(layer, h, tape);
  const Matrix& x = tape->projected;
  const double inv_l = 1.0 / layer.length_scale;
  const double amp = amplitude(layer);
  const std::size_t d = layer.num_features();
  tape->phase = Matrix(x.rows(), d);
  Matrix phi(x.rows(), d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const auto wj = layer.w_fixed.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) s += wj[k] * xi[k];
      const double z = -inv_l * s + layer.b_fixed[j];
      tape->phase(i, j) = z;
      phi(i, j) = amp * std::cos(z);
    }
  }
  return phi;
}

Vector rff_features(const RffGpLayer& layer, std::span<const double> h) {
  Matrix m(1, h.size(), Vector(h.begin(), h.end()));
  const Matrix phi = rff_features_batch(layer, m);
  return Vector(phi.flat().begin(), phi.flat().end());
}

Matrix rff_features_backward(const RffGpLayer& layer, const FeatureTape& tape, const Matrix& grad_phi) {
  require(grad_phi.rows() == tape.phase.rows() && grad_phi.cols() == tape.phase.cols(),
          "rff_features_backward: gradient shape does not match tape");
  const double scale = amplitude(layer) / layer.length_scale;
  // dphi_j/dx = amp sin(z_j) (1/l) w_j
  Matrix g_x(grad_phi.rows(), tape.projected.cols());
  for (std::size_t i = 0; i < grad_phi.rows(); ++i) {
    auto gx = g_x.row(i);
    for (std::size_t j = 0; j < grad_phi.cols(); ++j) {
      const double c = grad_phi(i, j) * scale * std::sin(tape.phase(i, j));
      if (c == 0.0) continue;
      const auto wj = layer.w_fixed.row(j);
      for (std::size_t k = 0; k < gx.size(); ++k) gx[k] += c * wj[k];
    }
  }
  if (layer.projection) g_x = matmul(g_x, *layer.projection);
  if (!layer.layer_norm) return g_x;

  const double n = static_cast<double>(layer.input_dim);
  Matrix g_h(g_x.rows(), g_x.cols());
  for (std::size_t i = 0; i < g_x.rows(); ++i) {
    const auto g = g_x.row(i);
    const auto y = tape.normalized.row(i);
    double mean_g = 0.0, mean_gy = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      mean_g += g[k];
      mean_gy += g[k] * y[k];
    }
    mean_g /= n;
    mean_gy /= n;
    auto out = g_h.row(i);
    for (std::size_t k = 0; k < g.size(); ++k)
      out[k] = tape.inv_std[i] * (g[k] - mean_g - y[k] * mean_gy);
  }
  return g_h;
}

Vector logits(const RffGpLayer& layer, std::span<const double> phi) {
  require(phi.size() == layer.num_features(), "logits: phi length must equal D_L");
  return matvec(layer.beta, phi);
}

Matrix logits_batch(const RffGpLayer& layer, const Matrix& phi) {
  require(phi.cols() == layer.num_features(), "logits_batch: phi width must equal D_L");
  return kernels::affine(phi, layer.beta, {});
}

void reset_precision(RffGpLayer& layer) {
  require(layer.ridge > 0.0, "reset_precision: ridge must be positive");
  const std::size_t d = layer.num_features();
  for (auto& p : layer.precision) {
    p = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) p(i, i) = layer.ridge;
  }
}

namespace {

void check_update_shapes(const RffGpLayer& layer, const Matrix& phi, const Matrix& probs) {
  require(phi.rows() == probs.rows(), "precision update: phi and probs row counts differ");
  require(phi.rows() == 0 || phi.cols() == layer.num_features(), "precision update: phi width must equal D_L");
  require(probs.rows() == 0 || probs.cols() == layer.num_classes(), "precision update: probs width must equal K");
}

Vector fisher_weights(const Matrix& probs, std::size_t k) {
  Vector w(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) w[i] = probs(i, k) * (1.0 - probs(i, k));
  return w;
}

Vector shared_fisher_weights(const Matrix& probs) {
  Vector w(probs.rows(), 0.0);
  const double inv_k = 1.0 / static_cast<double>(probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    for (std::size_t k = 0; k < probs.cols(); ++k) w[i] += probs(i, k) * (1.0 - probs(i, k));
    w[i] *= inv_k;
  }
  return w;
}

void accumulate_fisher(RffGpLayer& layer, const Matrix& phi, const Matrix& probs, double scale) {
  if (phi.rows() == 0) return;
  if (layer.shared_precision) {
    kernels::accumulate_weighted_outer(layer.precision.front(), phi, shared_fisher_weights(probs), scale);
    return;
  }
  for (std::size_t k = 0; k < layer.num_classes(); ++k)
    kernels::accumulate_weighted_outer(layer.precision[k], phi, fisher_weights(probs, k), scale);
}

}  // namespace

void update_precision_minibatch(RffGpLayer& layer, const Matrix& phi_batch, const Matrix& probs_batch) {
  check_update_shapes(layer, phi_batch, probs_batch);
  for (auto& p : layer.precision) p *= layer.discount;
  accumulate_fisher(layer, phi_batch, probs_batch, 1.0 - layer.discount);
}

void update_precision_exact(RffGpLayer& layer, const Matrix& phi_all, const Matrix& probs_all) {
  check_update_shapes(layer, phi_all, probs_all);
  reset_precision(layer);
  accumulate_fisher(layer, phi_all, probs_all, 1.0);
}

double predictive_variance(const RffGpLayer& layer, std::span<const double> phi, std::size_t k) {
  require(phi.size() == layer.num_features(), "predictive_variance: phi length must equal D_L");
  require(k < layer.num_classes(), "predictive_variance: class index out of range");
  const Vector x = solve_spd(layer.precision_for(k), phi);
  return std::max(0.0, dot(phi, x));
}

PosteriorFactors factor_precision(const RffGpLayer& layer) {
  PosteriorFactors f;
  f.shared = layer.shared_precision;
  for (const auto& p : layer.precision) f.lower.push_back(cholesky(p));
  return f;
}

Matrix predictive_variance_batch(const RffGpLayer& layer, const PosteriorFactors& factors, const Matrix& phi) {
  require(phi.cols() == layer.num_features(), "predictive_variance_batch: phi width must equal D_L");
  const std::size_t k_count = layer.num_classes();
  Matrix var(phi.rows(), k_count);
  if (factors.shared) {
    const Vector v = kernels::quadratic_forms(factors.lower.front(), phi);
    for (std::size_t i = 0; i < phi.rows(); ++i)
      for (std::size_t k = 0; k < k_count; ++k) var(i, k) = v[i];
    return var;
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    const Vector v = kernels::quadratic_forms(factors.for_class(k), phi);
    for (std::size_t i = 0; i < phi.rows(); ++i) var(i, k) = v[i];
  }
  return var;
}

Vector softmax(std::span<const double> z) {
  require(!z.empty(), "softmax: empty input");
  const double mx = *std::max_element(z.begin(), z.end());
  Vector p(z.size());
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    p[k] = std::exp(z[k] - mx);
    total += p[k];
  }
  for (double& x : p) x /= total;
  return p;
}

Vector mc_softmax(std::span<const double> mean, std::span<const double> variance, int n_samples, Rng& rng) {
  require(mean.size() == variance.size(), "mc_softmax: mean/variance length mismatch");
  require(n_samples >= 1, "mc_softmax: n_samples must be >= 1");
  for (double v : variance) require(v >= 0.0, "mc_softmax: variance must be non-negative");
  if (std::all_of(variance.begin(), variance.end(), [](double v) { return v == 0.0; }))
    return softmax(mean);

  const std::size_t k = mean.size();
  Vector acc(k, 0.0);
  Vector z(k);
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t c = 0; c < k; ++c) z[c] = mean[c] + std::sqrt(variance[c]) * rng.normal();
    const Vector p = softmax(z);
    for (std::size_t c = 0; c < k; ++c) acc[c] += p[c];
  }
  double total = 0.0;
  for (double& a : acc) {
    a /= static_cast<double>(n_samples);
    total += a;
  }
  for (double& a : acc) a /= total;
  return acc;
}

}  // namespace sngp
