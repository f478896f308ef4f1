#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sngp/linalg.hpp"
#include "sngp/rng.hpp"

namespace sngp {

struct GpLayerConfig {
  std::size_t num_features = 1024;  // D_L
  std::size_t num_classes = 2;
  double length_scale = 2.0;
  double ridge = 0.001;             // s: precision reset to s I
  double discount = 0.999;          // m: weight on the previous precision
  bool layer_norm = true;
  std::size_t projection_dim = 0;   // 0 disables the frozen input projection
  bool shared_precision = false;
};

/// Random-Fourier-feature GP output layer with a Laplace posterior per class.
///
/// Features: phi(h) = sqrt(2/D) cos(-(1/l) W h' + b) with W ~ N(0,1) and
/// b ~ U(0, 2pi) frozen at construction; h' is h after the optional
/// (parameter-free) layer normalization and the optional frozen projection.
/// Logits are beta phi. Each precision matrix starts at s I.
struct RffGpLayer {
  Matrix w_fixed;                  // D x D_in'
  Vector b_fixed;                  // D
  Matrix beta;                     // K x D
  std::vector<Matrix> precision;   // K matrices, or one when shared
  std::optional<Matrix> projection;  // D_in' x D_in
  std::size_t input_dim = 0;
  double length_scale = 1.0;
  double ridge = 0.001;
  double discount = 0.999;
  bool layer_norm = false;
  bool shared_precision = false;

  std::size_t num_features() const { return w_fixed.rows(); }
  std::size_t num_classes() const { return beta.rows(); }
  const Matrix& precision_for(std::size_t k) const {
    return shared_precision ? precision.front() : precision.at(k);
  }
};

RffGpLayer make_gp_layer(const GpLayerConfig& config, std::size_t input_dim, Rng& rng);

inline constexpr double kLayerNormEpsilon = 1e-6;

/// Cached intermediate values of the feature map, for backpropagation.
struct FeatureTape {
  Matrix input;        // raw h, batch x D_in
  Vector inv_std;      // per-row 1/sqrt(var + eps) when layer norm is on
  Matrix normalized;   // after layer norm (empty if off)
  Matrix projected;    // argument fed to W (after norm and projection)
  Matrix phase;        // -(1/l) W h' + b, batch x D
};

Vector rff_features(const RffGpLayer& layer, std::span<const double> h);
Matrix rff_features_batch(const RffGpLayer& layer, const Matrix& h, FeatureTape* tape = nullptr);
/// dL/dh given dL/dphi and the tape of the matching rff_features_batch call.
Matrix rff_features_backward(const RffGpLayer& layer, const FeatureTape& tape, const Matrix& grad_phi);

Vector logits(const RffGpLayer& layer, std::span<const double> phi);
Matrix logits_batch(const RffGpLayer& layer, const Matrix& phi);

void reset_precision(RffGpLayer& layer);
/// P_k <- m P_k + (1 - m) sum_i p_ik (1 - p_ik) phi_i phi_iᵀ.
void update_precision_minibatch(RffGpLayer& layer, const Matrix& phi_batch, const Matrix& probs_batch);
/// P_k <- s I + sum_i p_ik (1 - p_ik) phi_i phi_iᵀ over the whole dataset.
void update_precision_exact(RffGpLayer& layer, const Matrix& phi_all, const Matrix& probs_all);

/// phiᵀ P_k^{-1} phi via an SPD solve. Throws NotSpdError for a broken precision.
double predictive_variance(const RffGpLayer& layer, std::span<const double> phi, std::size_t k);

/// Cholesky factors of every class precision, reusable across many queries.
struct PosteriorFactors {
  std::vector<Matrix> lower;  // one per class (or one if shared)
  bool shared = false;
  const Matrix& for_class(std::size_t k) const { return shared ? lower.front() : lower.at(k); }
};
PosteriorFactors factor_precision(const RffGpLayer& layer);
/// batch x K matrix of per-class predictive variances.
Matrix predictive_variance_batch(const RffGpLayer& layer, const PosteriorFactors& factors, const Matrix& phi);

Vector softmax(std::span<const double> logits);
/// Mean over n_samples of softmax(mean + sqrt(variance) * eps), eps ~ N(0, I).
Vector mc_softmax(std::span<const double> mean, std::span<const double> variance, int n_samples, Rng& rng);

struct GpPrediction {
  Vector mean_logits;
  Vector variance_logits;
  Vector probs;
  double uncertainty_ds = 0.0;
};

}  // namespace sngp
