#include "sngp/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sngp/kernels.hpp"

namespace sngp {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
  }
  return "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity" || name == "linear") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  throw ContractError("unknown activation: " + std::string(name));
}

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::identity: return x;
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::identity: return 1.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

Vector random_unit(std::size_t n, Rng& rng) {
  Vector u = sample_normal(rng, n);
  const double nu = norm2(u);
  for (double& x : u) x /= nu;
  return u;
}

// gradT (batch x out) and input (batch x in): dW = gradTᵀ input, db = column sums.
DenseGrad dense_param_grad(const Matrix& grad, const Matrix& input) {
  DenseGrad g{Matrix(grad.cols(), input.cols()), Vector(grad.cols(), 0.0)};
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    const auto gi = grad.row(i);
    const auto xi = input.row(i);
    for (std::size_t o = 0; o < grad.cols(); ++o) {
      const double go = gi[o];
      if (go == 0.0) continue;
      g.bias[o] += go;
      auto wrow = g.weight.row(o);
      for (std::size_t k = 0; k < xi.size(); ++k) wrow[k] += go * xi[k];
    }
  }
  return g;
}

// grad (batch x out) · W (out x in) -> batch x in.
Matrix grad_through_weight(const Matrix& grad, const Matrix& w) {
  return matmul(grad, w);
}

}  // namespace

DenseLayer make_dense_layer(std::size_t in, std::size_t out, double weight_sd, Rng& rng) {
  DenseLayer layer;
  layer.weight = Matrix(out, in);
  for (double& w : layer.weight.flat()) w = weight_sd * rng.normal();
  layer.bias = Vector(out, 0.0);
  layer.sn_u = random_unit(out, rng);
  return layer;
}

ResFfnNetwork make_network(const NetworkConfig& config, Rng& rng) {
  require(config.input_dim > 0 && config.width > 0, "make_network: dimensions must be positive");
  require(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0, "make_network: dropout must be in [0,1)");
  require(config.sn_bound > 0.0, "make_network: sn_bound must be positive");
  ResFfnNetwork net;
  net.train_input_projection = config.train_input_projection;
  net.input_projection = make_dense_layer(config.input_dim, config.width,
                                          1.0 / std::sqrt(static_cast<double>(config.width)), rng);
  net.input_projection.sn_bound = config.sn_bound;
  const double he_sd = std::sqrt(2.0 / static_cast<double>(config.width));
  for (std::size_t l = 0; l < config.depth; ++l) {
    ResidualBlock block;
    block.layer = make_dense_layer(config.width, config.width, he_sd, rng);
    block.layer.sn_bound = config.sn_bound;
    block.activation = config.activation;
    block.dropout_rate = config.dropout_rate;
    net.blocks.push_back(std::move(block));
  }
  return net;
}

ForwardResult forward(const ResFfnNetwork& net, const Matrix& x, bool train_mode, Rng& rng) {
  require(x.cols() == net.input_dim(), "forward: input columns do not match network input dim");
  ForwardResult result;
  result.tape.input_dim = net.input_dim();
  result.tape.width = net.width();
  result.tape.input = x;
  Matrix h = kernels::affine(x, net.input_projection.weight, net.input_projection.bias);
  for (const auto& block : net.blocks) {
    BlockTape bt;
    bt.input = h;
    bt.pre_activation = kernels::affine(h, block.layer.weight, block.layer.bias);
    const bool use_dropout = train_mode && block.dropout_rate > 0.0;
    if (use_dropout) {
      bt.mask = Matrix(h.rows(), h.cols());
      const double keep = 1.0 - block.dropout_rate;
      for (double& m : bt.mask.flat()) m = rng.uniform01() < keep ? 1.0 / keep : 0.0;
    }
    auto hv = h.flat();
    const auto pre = bt.pre_activation.flat();
    for (std::size_t i = 0; i < hv.size(); ++i) {
      double a = activate(block.activation, pre[i]);
      if (use_dropout) a *= bt.mask.flat()[i];
      hv[i] += a;
    }
    result.tape.blocks.push_back(std::move(bt));
  }
  result.h = std::move(h);
  return result;
}

Matrix forward_eval(const ResFfnNetwork& net, const Matrix& x) {
  require(x.cols() == net.input_dim(), "forward_eval: input columns do not match network input dim");
  Matrix h = kernels::affine(x, net.input_projection.weight, net.input_projection.bias);
  for (const auto& block : net.blocks) {
    const Matrix pre = kernels::affine(h, block.layer.weight, block.layer.bias);
    auto hv = h.flat();
    const auto pv = pre.flat();
    for (std::size_t i = 0; i < hv.size(); ++i) hv[i] += activate(block.activation, pv[i]);
  }
  return h;
}

NetworkGrads backward(const ResFfnNetwork& net, const ForwardTape& tape, const Matrix& grad_h,
                      Matrix* grad_input) {
  require(tape.input_dim == net.input_dim() && tape.width == net.width() &&
              tape.blocks.size() == net.depth(),
          "backward: tape does not match network");
  require(grad_h.rows() == tape.input.rows() && grad_h.cols() == net.width(),
          "backward: grad_h shape mismatch");

  NetworkGrads grads;
  grads.blocks.resize(net.depth());
  Matrix g = grad_h;
  for (std::size_t l = net.depth(); l-- > 0;) {
    const auto& block = net.blocks[l];
    const auto& bt = tape.blocks[l];
    require(bt.pre_activation.rows() == g.rows(), "backward: stale tape");
    Matrix g_pre(g.rows(), g.cols());
    auto gp = g_pre.flat();
    const auto gv = g.flat();
    const auto pre = bt.pre_activation.flat();
    const bool has_mask = !bt.mask.empty();
    for (std::size_t i = 0; i < gp.size(); ++i) {
      double d = gv[i] * activate_grad(block.activation, pre[i]);
      if (has_mask) d *= bt.mask.flat()[i];
      gp[i] = d;
    }
    grads.blocks[l] = dense_param_grad(g_pre, bt.input);
    g += grad_through_weight(g_pre, block.layer.weight);
  }
  grads.input_projection = dense_param_grad(g, tape.input);
  if (grad_input != nullptr) *grad_input = grad_through_weight(g, net.input_projection.weight);
  return grads;
}

double spectral_normalize(DenseLayer& layer, int power_iters) {
  require(layer.sn_bound > 0.0, "spectral_normalize: bound must be positive");
  const auto pi = power_iteration(layer.weight, power_iters, layer.sn_u);
  layer.sn_u = pi.u;
  const double lambda = pi.sigma;
  if (layer.sn_bound < lambda) layer.weight *= layer.sn_bound / lambda;
  return lambda;
}

LipschitzProbe lipschitz_probe(const ResFfnNetwork& net,
                               std::span<const std::pair<Vector, Vector>> pairs) {
  LipschitzProbe probe;
  probe.min_ratio = std::numeric_limits<double>::infinity();
  probe.max_ratio = 0.0;
  if (pairs.empty()) {
    probe.min_ratio = 0.0;
    return probe;
  }
  const std::size_t d = net.input_dim();
  Matrix xa(pairs.size(), d), xb(pairs.size(), d);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    require(pairs[i].first.size() == d && pairs[i].second.size() == d,
            "lipschitz_probe: point dimension mismatch");
    std::copy(pairs[i].first.begin(), pairs[i].first.end(), xa.row(i).begin());
    std::copy(pairs[i].second.begin(), pairs[i].second.end(), xb.row(i).begin());
  }
  const auto& proj = net.input_projection;
  const Matrix pa = kernels::affine(xa, proj.weight, proj.bias);
  const Matrix pb = kernels::affine(xb, proj.weight, proj.bias);
  const Matrix ha = forward_eval(net, xa);
  const Matrix hb = forward_eval(net, xb);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    double in2 = 0.0, out2 = 0.0;
    for (std::size_t k = 0; k < net.width(); ++k) {
      const double dp = pa(i, k) - pb(i, k);
      const double dh = ha(i, k) - hb(i, k);
      in2 += dp * dp;
      out2 += dh * dh;
    }
    if (in2 == 0.0) {
      ++probe.pairs_skipped;
      continue;
    }
    const double ratio = std::sqrt(out2 / in2);
    probe.min_ratio = std::min(probe.min_ratio, ratio);
    probe.max_ratio = std::max(probe.max_ratio, ratio);
    ++probe.pairs_used;
  }
  if (probe.pairs_used == 0) probe.min_ratio = 0.0;
  return probe;
}

std::vector<std::span<double>> parameter_views(ResFfnNetwork& net) {
  std::vector<std::span<double>> views;
  if (net.train_input_projection) {
    views.push_back(net.input_projection.weight.flat());
    views.push_back(net.input_projection.bias);
  }
  for (auto& block : net.blocks) {
    views.push_back(block.layer.weight.flat());
    views.push_back(block.layer.bias);
  }
  return views;
}

std::vector<std::span<double>> gradient_views(const ResFfnNetwork& net, NetworkGrads& grads) {
  require(grads.blocks.size() == net.depth(), "gradient_views: gradient depth mismatch");
  std::vector<std::span<double>> views;
  if (net.train_input_projection) {
    views.push_back(grads.input_projection.weight.flat());
    views.push_back(grads.input_projection.bias);
  }
  for (auto& g : grads.blocks) {
    views.push_back(g.weight.flat());
    views.push_back(g.bias);
  }
  return views;
}

SgdMomentum::SgdMomentum(double learning_rate, double momentum)
    : learning_rate_(learning_rate), momentum_(momentum) {
  require(learning_rate > 0.0, "SGD: learning rate must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "SGD: momentum must be in [0,1)");
}

void SgdMomentum::step(std::span<const std::span<double>> params,
                       std::span<const std::span<double>> grads) {
  require(params.size() == grads.size(), "SGD: parameter/gradient count mismatch");
  if (velocity_.empty()) {
    velocity_.reserve(params.size());
    for (const auto& p : params) velocity_.emplace_back(p.size(), 0.0);
  }
  require(velocity_.size() == params.size(), "SGD: parameter set changed between steps");
  for (std::size_t t = 0; t < params.size(); ++t) {
    require(params[t].size() == grads[t].size() && velocity_[t].size() == params[t].size(),
            "SGD: tensor size mismatch");
    auto& v = velocity_[t];
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = momentum_ * v[i] + grads[t][i];
      params[t][i] -= learning_rate_ * v[i];
    }
  }
}

void sgd_step(ResFfnNetwork& net, NetworkGrads& grads, SgdMomentum& optimizer) {
  const auto params = parameter_views(net);
  const auto g = gradient_views(net, grads);
  optimizer.step(params, g);
}

}  // namespace sngp
