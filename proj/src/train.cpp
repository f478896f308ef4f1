#include "sngp/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sngp/metrics.hpp"

namespace sngp {

std::string_view to_string(PrecisionUpdate p) {
  return p == PrecisionUpdate::exact ? "exact" : "moving_average";
}

PrecisionUpdate parse_precision_update(std::string_view name) {
  if (name == "moving_average") return PrecisionUpdate::moving_average;
  if (name == "exact") return PrecisionUpdate::exact;
  throw ContractError("unknown precision update mode: " + std::string(name));
}

namespace {

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = x.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix softmax_rows(const Matrix& z) {
  Matrix p(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const Vector r = softmax(z.row(i));
    std::copy(r.begin(), r.end(), p.row(i).begin());
  }
  return p;
}

// Eval-mode features and MAP probabilities for the precision update.
std::pair<Matrix, Matrix> features_and_probs(const SngpModel& model, const Matrix& x) {
  const Matrix phi = rff_features_batch(model.gp, hidden(model, x));
  return {phi, softmax_rows(logits_batch(model.gp, phi))};
}

void notify(const TrainHooks* hooks, std::string_view stage, int epoch, std::size_t step) {
  if (hooks != nullptr && hooks->on_stage) hooks->on_stage(stage, epoch, step);
}

}  // namespace

void refit_precision_exact(SngpModel& model, const Matrix& x) {
  require(model.head == HeadKind::gp, "refit_precision_exact: model has no GP head");
  const auto [phi, probs] = features_and_probs(model, x);
  update_precision_exact(model.gp, phi, probs);
}

TrainReport train(SngpModel& model, const Matrix& x, std::span<const int> labels, const TrainConfig& config,
                  const TrainHooks* hooks) {
  require(x.rows() > 0, "train: dataset is empty");
  require(x.rows() == labels.size(), "train: point and label counts differ");
  require(x.cols() == model.input_dim, "train: input dimension mismatch");
  require(config.epochs >= 0, "train: epochs must be >= 0");
  require(config.batch_size >= 1, "train: batch_size must be >= 1");
  require(config.mc_samples >= 1, "train: mc_samples must be >= 1");
  require(config.sn_power_iters >= 1, "train: sn_power_iters must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  report.config = config;

  const Rng root(config.seed);
  Rng shuffle_rng = root.derive("shuffle");
  Rng dropout_rng = root.derive("dropout");
  SgdMomentum optimizer(config.learning_rate, config.momentum);

  const std::size_t n = x.rows();
  const int precision_epoch = config.precision_update_epoch < 0 ? config.epochs - 1 : config.precision_update_epoch;
  const bool has_gp = model.head == HeadKind::gp;
  LossOptions loss_opts{config.l2_beta, static_cast<double>(n), true};

  if (has_gp) reset_precision(model.gp);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    const bool precision_now = has_gp && epoch == precision_epoch;
    if (precision_now) reset_precision(model.gp);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = gather_rows(x, idx);
      std::vector<int> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = labels[idx[i]];

      LossResult lr = loss_and_grads(model, xb, yb, loss_opts, dropout_rng);
      if (!std::isfinite(lr.loss) || lr.loss > config.divergence_threshold) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "training diverged at epoch %d step %zu: loss=%g", epoch, report.steps, lr.loss);
        throw DivergenceError(msg);
      }
      loss_sum += lr.loss;
      ++batches;

      const auto params = parameter_views(model);
      const auto grads = gradient_views(model, lr.grads);
      optimizer.step(params, grads);
      notify(hooks, "sgd", epoch, report.steps);

      if (model.spectral_norm_enabled && !model.identity_hidden) {
        for (auto& block : model.network.blocks) spectral_normalize(block.layer, config.sn_power_iters);
        notify(hooks, "spectral_norm", epoch, report.steps);
      }

      if (precision_now && config.precision_update == PrecisionUpdate::moving_average) {
        const auto [phi, probs] = features_and_probs(model, xb);
        update_precision_minibatch(model.gp, phi, probs);
        notify(hooks, "precision", epoch, report.steps);
      }
      ++report.steps;
    }
    if (precision_now && config.precision_update == PrecisionUpdate::exact) {
      refit_precision_exact(model, x);
      notify(hooks, "precision_exact", epoch, report.steps);
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }

  // Accuracy of the MAP logits on the training set.
  report.train_accuracy = metrics::accuracy(softmax_rows(mean_logits(model, x)), labels);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string format_train_report(const TrainReport& report, bool include_timing) {
  const TrainConfig& c = report.config;
  std::string out;
  char buf[128];
  auto line = [&](const char* key, const char* fmt, auto value) {
    std::snprintf(buf, sizeof buf, fmt, value);
    out += key;
    out += '=';
    out += buf;
    out += '\n';
  };
  line("epochs", "%d", c.epochs);
  line("batch_size", "%zu", c.batch_size);
  line("learning_rate", "%.17g", c.learning_rate);
  line("momentum", "%.17g", c.momentum);
  line("l2_beta", "%.17g", c.l2_beta);
  line("seed", "%llu", static_cast<unsigned long long>(c.seed));
  line("mc_samples", "%d", c.mc_samples);
  line("precision_update", "%s", std::string(to_string(c.precision_update)).c_str());
  line("precision_update_epoch", "%d", c.precision_update_epoch);
  line("sn_power_iters", "%d", c.sn_power_iters);
  line("steps", "%zu", report.steps);
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
    std::snprintf(buf, sizeof buf, "loss_epoch_%zu=%.17g\n", e, report.epoch_loss[e]);
    out += buf;
  }
  line("final_loss", "%.17g", report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back());
  line("train_accuracy", "%.17g", report.train_accuracy);
  if (include_timing) line("wall_seconds", "%.6f", report.wall_seconds);
  return out;
}

}  // namespace sngp
