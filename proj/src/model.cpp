#include "sngp/model.hpp"

#include <cmath>

#include "sngp/kernels.hpp"
#include "sngp/metrics.hpp"

namespace sngp {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::deterministic: return "deterministic";
    case Variant::deep_ensemble: return "deep_ensemble";
    case Variant::shallow_gp: return "shallow_gp";
    case Variant::dnn_gp: return "dnn_gp";
    case Variant::dnn_sn: return "dnn_sn";
    case Variant::sngp: return "sngp";
  }
  return "sngp";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::deterministic, Variant::deep_ensemble, Variant::shallow_gp, Variant::dnn_gp,
                    Variant::dnn_sn, Variant::sngp})
    if (to_string(v) == name) return v;
  throw ContractError("unknown model variant: " + std::string(name));
}

std::string_view to_string(HeadKind h) { return h == HeadKind::gp ? "gp" : "dense"; }

SngpModel make_model(const ModelConfig& config, std::uint64_t seed) {
  require(config.num_classes >= 2, "make_model: need at least two classes");
  SngpModel model;
  model.variant = config.variant;
  model.num_classes = config.num_classes;
  model.input_dim = config.network.input_dim;

  switch (config.variant) {
    case Variant::sngp:
      model.spectral_norm_enabled = true;
      model.head = HeadKind::gp;
      break;
    case Variant::dnn_gp:
      model.spectral_norm_enabled = false;
      model.head = HeadKind::gp;
      break;
    case Variant::dnn_sn:
      model.spectral_norm_enabled = true;
      model.head = HeadKind::dense;
      break;
    case Variant::deterministic:
    case Variant::deep_ensemble:
      model.spectral_norm_enabled = false;
      model.head = HeadKind::dense;
      break;
    case Variant::shallow_gp:
      model.spectral_norm_enabled = false;
      model.head = HeadKind::gp;
      model.identity_hidden = true;
      break;
  }

  const Rng root(seed);
  Rng init = root.derive("init");
  if (!model.identity_hidden) {
    model.network = make_network(config.network, init);
  } else {
    // Keeps the checkpoint layout uniform; never evaluated.
    NetworkConfig empty = config.network;
    empty.depth = 0;
    empty.width = config.network.input_dim;
    model.network = make_network(empty, init);
  }

  Rng head_rng = root.derive("head");
  if (model.head == HeadKind::gp) {
    GpLayerConfig gp = config.gp;
    gp.num_classes = config.num_classes;
    if (model.identity_hidden) gp.layer_norm = false;
    model.gp = make_gp_layer(gp, model.hidden_dim(), head_rng);
  } else {
    model.dense = make_dense_layer(model.hidden_dim(), config.num_classes,
                                   1.0 / std::sqrt(static_cast<double>(model.hidden_dim())), head_rng);
  }
  return model;
}

Matrix hidden(const SngpModel& model, const Matrix& x) {
  require(x.cols() == model.input_dim, "hidden: input dimension mismatch");
  if (model.identity_hidden) return x;
  return forward_eval(model.network, x);
}

Matrix mean_logits(const SngpModel& model, const Matrix& x) {
  const Matrix h = hidden(model, x);
  if (model.head == HeadKind::gp) return logits_batch(model.gp, rff_features_batch(model.gp, h));
  return kernels::affine(h, model.dense.weight, model.dense.bias);
}

LossResult loss_and_grads(const SngpModel& model, const Matrix& x, std::span<const int> labels,
                          const LossOptions& options, Rng& rng) {
  require(x.rows() == labels.size(), "loss_and_grads: batch and label counts differ");
  require(x.rows() > 0, "loss_and_grads: empty batch");
  require(options.n_scale > 0.0, "loss_and_grads: n_scale must be positive");
  for (int y : labels)
    require(y >= 0 && static_cast<std::size_t>(y) < model.num_classes, "loss_and_grads: label out of range");

  ForwardResult fwd;
  if (model.identity_hidden) {
    fwd.h = x;
  } else {
    fwd = forward(model.network, x, options.train_mode, rng);
  }

  FeatureTape ftape;
  Matrix phi;
  Matrix z;
  if (model.head == HeadKind::gp) {
    phi = rff_features_batch(model.gp, fwd.h, &ftape);
    z = logits_batch(model.gp, phi);
  } else {
    z = kernels::affine(fwd.h, model.dense.weight, model.dense.bias);
  }

  const std::size_t batch = x.rows();
  const std::size_t k_count = model.num_classes;
  LossResult result;
  result.probs = Matrix(batch, k_count);
  Matrix grad_z(batch, k_count);
  double ce = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const Vector p = softmax(z.row(i));
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    // log-sum-exp form keeps saturated logits finite.
    double mx = z(i, 0);
    for (std::size_t k = 1; k < k_count; ++k) mx = std::max(mx, z(i, k));
    double se = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) se += std::exp(z(i, k) - mx);
    ce += (mx + std::log(se)) - z(i, y);
    for (std::size_t k = 0; k < k_count; ++k) {
      result.probs(i, k) = p[k];
      grad_z(i, k) = (p[k] - (k == y ? 1.0 : 0.0)) * inv_b;
    }
  }
  result.loss = ce * inv_b;

  const double l2 = options.l2_beta / options.n_scale;
  Matrix grad_h;
  if (model.head == HeadKind::gp) {
    const Matrix& beta = model.gp.beta;
    result.grads.beta = matmul(grad_z.transposed(), phi);
    if (l2 > 0.0) {
      double sq = 0.0;
      for (std::size_t i = 0; i < beta.size(); ++i) {
        sq += beta.flat()[i] * beta.flat()[i];
        result.grads.beta.flat()[i] += l2 * beta.flat()[i];
      }
      result.loss += 0.5 * l2 * sq;
    }
    const Matrix grad_phi = matmul(grad_z, beta);
    grad_h = rff_features_backward(model.gp, ftape, grad_phi);
  } else {
    const Matrix& w = model.dense.weight;
    result.grads.dense.weight = matmul(grad_z.transposed(), fwd.h);
    result.grads.dense.bias = Vector(k_count, 0.0);
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t k = 0; k < k_count; ++k) result.grads.dense.bias[k] += grad_z(i, k);
    if (l2 > 0.0) {
      double sq = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        sq += w.flat()[i] * w.flat()[i];
        result.grads.dense.weight.flat()[i] += l2 * w.flat()[i];
      }
      result.loss += 0.5 * l2 * sq;
    }
    grad_h = matmul(grad_z, w);
  }

  if (!model.identity_hidden) result.grads.network = backward(model.network, fwd.tape, grad_h);
  return result;
}

std::vector<std::span<double>> parameter_views(SngpModel& model) {
  std::vector<std::span<double>> views;
  if (!model.identity_hidden) views = parameter_views(model.network);
  if (model.head == HeadKind::gp) {
    views.push_back(model.gp.beta.flat());
  } else {
    views.push_back(model.dense.weight.flat());
    views.push_back(model.dense.bias);
  }
  return views;
}

std::vector<std::span<double>> gradient_views(const SngpModel& model, ModelGrads& grads) {
  std::vector<std::span<double>> views;
  if (!model.identity_hidden) views = gradient_views(model.network, grads.network);
  if (model.head == HeadKind::gp) {
    views.push_back(grads.beta.flat());
  } else {
    views.push_back(grads.dense.weight.flat());
    views.push_back(grads.dense.bias);
  }
  return views;
}

PredictionBatch predict_batch(const SngpModel& model, const Matrix& x, int mc_samples, Rng& rng) {
  require(mc_samples >= 1, "predict: mc_samples must be >= 1");
  const Matrix h = hidden(model, x);
  const std::size_t n = x.rows();
  const std::size_t k_count = model.num_classes;
  PredictionBatch out;
  out.variance = Matrix(n, k_count);
  if (model.head == HeadKind::gp) {
    const Matrix phi = rff_features_batch(model.gp, h);
    out.mean_logits = logits_batch(model.gp, phi);
    out.variance = predictive_variance_batch(model.gp, factor_precision(model.gp), phi);
  } else {
    out.mean_logits = kernels::affine(h, model.dense.weight, model.dense.bias);
  }
  out.probs = Matrix(n, k_count);
  out.uncertainty_ds = Vector(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector p = mc_softmax(out.mean_logits.row(i), out.variance.row(i), mc_samples, rng);
    std::copy(p.begin(), p.end(), out.probs.row(i).begin());
    out.uncertainty_ds[i] = metrics::dempster_shafer(out.mean_logits.row(i));
  }
  return out;
}

GpPrediction predict(const SngpModel& model, std::span<const double> x, int mc_samples, Rng& rng) {
  require(x.size() == model.input_dim, "predict: input dimension mismatch");
  const Matrix xm(1, x.size(), Vector(x.begin(), x.end()));
  const PredictionBatch b = predict_batch(model, xm, mc_samples, rng);
  GpPrediction p;
  p.mean_logits.assign(b.mean_logits.row(0).begin(), b.mean_logits.row(0).end());
  p.variance_logits.assign(b.variance.row(0).begin(), b.variance.row(0).end());
  p.probs.assign(b.probs.row(0).begin(), b.probs.row(0).end());
  p.uncertainty_ds = b.uncertainty_ds[0];
  return p;
}

double logit_variance_uncertainty(const GpPrediction& pred) {
  require(!pred.variance_logits.empty(), "logit_variance_uncertainty: empty prediction");
  double s = 0.0;
  for (double v : pred.variance_logits) s += v;
  return s / static_cast<double>(pred.variance_logits.size());
}

double prob_margin_uncertainty(std::span<const double> probs) {
  require(probs.size() == 2, "prob_margin_uncertainty: defined for binary predictions only");
  return 1.0 - 2.0 * std::abs(probs[1] - 0.5);
}

double prob_margin_uncertainty(const GpPrediction& pred) { return prob_margin_uncertainty(pred.probs); }

}  // namespace sngp
