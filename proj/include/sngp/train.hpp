#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sngp/linalg.hpp"
#include "sngp/model.hpp"

namespace sngp {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PrecisionUpdate { moving_average, exact };

std::string_view to_string(PrecisionUpdate p);
PrecisionUpdate parse_precision_update(std::string_view name);

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double l2_beta = 0.0;
  std::uint64_t seed = 0;
  int mc_samples = 10;
  /// Epoch whose minibatches update the precision; -1 means the final epoch.
  int precision_update_epoch = -1;
  PrecisionUpdate precision_update = PrecisionUpdate::moving_average;
  int sn_power_iters = 1;
  double divergence_threshold = 1e6;
};

/// Instrumentation: called with "sgd", "spectral_norm" or "precision" after
/// each sub-step of a minibatch, plus "precision_exact" after an exact pass.
struct TrainHooks {
  std::function<void(std::string_view stage, int epoch, std::size_t step)> on_stage;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;
  double wall_seconds = 0.0;
  std::size_t steps = 0;
  TrainConfig config;
};

/// For every minibatch: an SGD step on the MAP loss, then
/// spectral normalization of each residual layer (when enabled), then during
/// the precision epoch a moving-average precision update using eval-mode
/// features and MAP probabilities. Shuffling and dropout use their own
/// streams derived from config.seed.
TrainReport train(SngpModel& model, const Matrix& x, std::span<const int> labels, const TrainConfig& config,
                  const TrainHooks* hooks = nullptr);

/// Exact one-pass precision over a dataset with the current MAP estimate.
void refit_precision_exact(SngpModel& model, const Matrix& x);

/// Flat `key=value` block; wall-clock is included only when requested.
std::string format_train_report(const TrainReport& report, bool include_timing = true);

}  // namespace sngp
