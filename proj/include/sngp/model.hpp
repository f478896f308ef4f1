#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sngp/gp_layer.hpp"
#include "sngp/linalg.hpp"
#include "sngp/nn.hpp"
#include "sngp/rng.hpp"

namespace sngp {

/// Model family. Toggles per tag:
///   sngp          spectral norm + GP head
///   dnn_gp        GP head only
///   dnn_sn        spectral norm + dense head
///   deterministic dense head, no spectral norm
///   deep_ensemble members are `deterministic` models
///   shallow_gp    GP head on the raw input (identity hidden map)
enum class Variant { deterministic, deep_ensemble, shallow_gp, dnn_gp, dnn_sn, sngp };
enum class HeadKind { gp, dense };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
std::string_view to_string(HeadKind h);

struct ModelConfig {
  Variant variant = Variant::sngp;
  NetworkConfig network;
  GpLayerConfig gp;
  std::size_t num_classes = 2;
};

struct SngpModel {
  Variant variant = Variant::sngp;
  std::size_t num_classes = 2;
  std::size_t input_dim = 2;
  bool identity_hidden = false;
  bool spectral_norm_enabled = true;
  HeadKind head = HeadKind::gp;
  ResFfnNetwork network;  // unused when identity_hidden
  RffGpLayer gp;          // valid when head == gp
  DenseLayer dense;       // valid when head == dense

  std::size_t hidden_dim() const { return identity_hidden ? input_dim : network.width(); }
};

/// Builds one model with the variant's toggles; all randomness comes from
/// `seed`. deep_ensemble builds a single deterministic member.
SngpModel make_model(const ModelConfig& config, std::uint64_t seed);

/// Evaluation-mode hidden representation h(x).
Matrix hidden(const SngpModel& model, const Matrix& x);
/// Posterior-mean (MAP) logits, N x K.
Matrix mean_logits(const SngpModel& model, const Matrix& x);

struct ModelGrads {
  NetworkGrads network;
  Matrix beta;
  DenseGrad dense;
};

struct LossOptions {
  double l2_beta = 0.0;
  double n_scale = 1.0;  // the ½|beta|² prior term is divided by this
  bool train_mode = true;
};

struct LossResult {
  double loss = 0.0;
  ModelGrads grads;
  Matrix probs;  // batch x K softmax of the logits used for the loss
};

/// Mean cross-entropy over the batch plus l2_beta ½|beta|² / n_scale, with
/// gradients for every trainable parameter.
LossResult loss_and_grads(const SngpModel& model, const Matrix& x, std::span<const int> labels,
                          const LossOptions& options, Rng& rng);

std::vector<std::span<double>> parameter_views(SngpModel& model);
std::vector<std::span<double>> gradient_views(const SngpModel& model, ModelGrads& grads);

struct PredictionBatch {
  Matrix mean_logits;  // N x K
  Matrix variance;     // N x K, zero for dense heads
  Matrix probs;        // N x K
  Vector uncertainty_ds;
};

/// Prediction for a batch of inputs: eval-mode forward,
/// features, posterior mean and variance, MC-averaged softmax, and the
/// Dempster-Shafer score of the mean logits.
PredictionBatch predict_batch(const SngpModel& model, const Matrix& x, int mc_samples, Rng& rng);
GpPrediction predict(const SngpModel& model, std::span<const double> x, int mc_samples, Rng& rng);

/// Logit variance averaged over classes (the binary logit variance for K = 2).
double logit_variance_uncertainty(const GpPrediction& pred);
/// 1 - 2|p - 0.5| for binary predictions; throws ContractError when K != 2.
double prob_margin_uncertainty(const GpPrediction& pred);
double prob_margin_uncertainty(std::span<const double> probs);

}  // namespace sngp
