#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sngp/linalg.hpp"
#include "sngp/rng.hpp"

namespace sngp {

enum class Activation { relu, identity, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Fully connected layer y = W x + b with persisted spectral-norm state.
struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Vector sn_u;    // left-singular estimate, out
  double sn_bound = 1.0;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
};

/// h(x) = x + dropout(act(W x + b)).
struct ResidualBlock {
  DenseLayer layer;
  Activation activation = Activation::relu;
  double dropout_rate = 0.0;
};

/// Input projection (d -> width, not residual) followed by `depth` residual
/// blocks of equal width.
struct ResFfnNetwork {
  DenseLayer input_projection;
  std::vector<ResidualBlock> blocks;
  bool train_input_projection = false;

  std::size_t input_dim() const { return input_projection.in_dim(); }
  std::size_t width() const { return input_projection.out_dim(); }
  std::size_t depth() const { return blocks.size(); }
};

struct NetworkConfig {
  std::size_t input_dim = 2;
  std::size_t width = 128;
  std::size_t depth = 12;
  Activation activation = Activation::relu;
  double dropout_rate = 0.01;
  double sn_bound = 0.9;
  bool train_input_projection = false;
};

/// Residual weights ~ N(0, 2/fan_in) (He); projection ~ N(0, 1/width) so the
/// frozen projection roughly preserves Euclidean distances; biases zero;
/// sn_u ~ N(0, 1) normalized.
ResFfnNetwork make_network(const NetworkConfig& config, Rng& rng);
DenseLayer make_dense_layer(std::size_t in, std::size_t out, double weight_sd, Rng& rng);

struct BlockTape {
  Matrix input;           // batch x width
  Matrix pre_activation;  // batch x width
  Matrix mask;            // inverted-dropout mask; empty when dropout was off
};

struct ForwardTape {
  std::size_t input_dim = 0;
  std::size_t width = 0;
  Matrix input;
  std::vector<BlockTape> blocks;
};

struct ForwardResult {
  Matrix h;
  ForwardTape tape;
};

/// Batch forward pass. Dropout masks are drawn from `rng` only in train mode.
ForwardResult forward(const ResFfnNetwork& net, const Matrix& x, bool train_mode, Rng& rng);
/// Evaluation-mode forward without a tape.
Matrix forward_eval(const ResFfnNetwork& net, const Matrix& x);

struct DenseGrad {
  Matrix weight;
  Vector bias;
};

struct NetworkGrads {
  DenseGrad input_projection;
  std::vector<DenseGrad> blocks;
};

/// Reverse-mode gradients of a scalar loss L given dL/dh. Also returns dL/dx
/// through `grad_input` when non-null.
NetworkGrads backward(const ResFfnNetwork& net, const ForwardTape& tape, const Matrix& grad_h,
                      Matrix* grad_input = nullptr);

/// One normalization step: `power_iters` rounds of power iteration warm-started
/// from sn_u, then W <- c W / lambda if c < lambda. Returns lambda.
double spectral_normalize(DenseLayer& layer, int power_iters = 1);

struct LipschitzProbe {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;
};

/// Ratios |h(x) - h(x')| / |P x - P x'| across the residual stack, where P is
/// the input projection. Coincident pairs are skipped and counted.
LipschitzProbe lipschitz_probe(const ResFfnNetwork& net,
                               std::span<const std::pair<Vector, Vector>> pairs);

/// Flat views over parameters, in a fixed order shared with gradient_views.
std::vector<std::span<double>> parameter_views(ResFfnNetwork& net);
std::vector<std::span<double>> gradient_views(const ResFfnNetwork& net, NetworkGrads& grads);

/// SGD with heavy-ball momentum: v <- momentum v + g; p <- p - lr v.
class SgdMomentum {
 public:
  SgdMomentum(double learning_rate, double momentum);

  void step(std::span<const std::span<double>> params, std::span<const std::span<double>> grads);

  double learning_rate() const { return learning_rate_; }
  double momentum() const { return momentum_; }

 private:
  double learning_rate_;
  double momentum_;
  std::vector<Vector> velocity_;
};

void sgd_step(ResFfnNetwork& net, NetworkGrads& grads, SgdMomentum& optimizer);

}  // namespace sngp
