#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sngp/linalg.hpp"
#include "sngp/model.hpp"
#include "sngp/train.hpp"

namespace sngp {

/// Model for a variant tag; shallow_gp computes features on the raw input.
SngpModel build_variant(std::string_view tag, const ModelConfig& base, std::uint64_t seed);

/// Deterministic members (dense head, no spectral norm) of equal architecture.
struct EnsembleModel {
  std::vector<SngpModel> members;
  std::size_t size() const { return members.size(); }
};

struct EnsembleOptions {
  std::size_t size = 10;
  /// Test mode: every member gets the base seed instead of seed + i.
  bool same_seed = false;
};

/// Trains members independently, in parallel, with seeds seed + i for both
/// initialization and training. A diverging member aborts the whole call with
/// a DivergenceError naming its index.
EnsembleModel train_ensemble(const ModelConfig& config, const TrainConfig& train_config, const EnsembleOptions& options,
                             const Matrix& x, std::span<const int> labels,
                             std::vector<TrainReport>* reports = nullptr);

/// Arithmetic mean of member softmax outputs.
Matrix ensemble_predict(const EnsembleModel& ensemble, const Matrix& x);

}  // namespace sngp
