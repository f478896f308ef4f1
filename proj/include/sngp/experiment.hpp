#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sngp/checkpoint.hpp"
#include "sngp/config.hpp"
#include "sngp/data.hpp"
#include "sngp/train.hpp"

namespace sngp {

/// A surface metric or uncertainty that the model cannot provide (variance
/// for a dense head, margin for K > 2).
class IncompatibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training data for a config: generated from (dataset, n_per_class, noise,
/// data_seed) or read from data_path.
data::Dataset2D load_dataset(const RunConfig& config);
/// Held-out IND points from the same generator with seed data_seed + 1; for a
/// CSV dataset the training data itself.
data::Dataset2D load_test_set(const RunConfig& config);

std::size_t num_classes_of(const data::Dataset2D& ds);

/// Trains the configured variant (E members for deep_ensemble, one otherwise).
Checkpoint train_run(const RunConfig& config, const data::Dataset2D& train_data,
                     std::vector<TrainReport>* reports = nullptr);

struct RunPredictions {
  Matrix probs;          // N x K; MC-averaged for GP heads, member mean for ensembles
  Vector variance;       // mean logit variance over classes; empty for dense heads
  Vector dempster_shafer;  // averaged over members for ensembles
};

/// MC sampling uses Rng(seed).derive("predict").
RunPredictions predict_run(const Checkpoint& ckpt, const Matrix& x, std::uint64_t seed = 0);

/// "variance" | "margin" | "ds". Throws IncompatibleError when the model
/// cannot provide the metric, ContractError for an unknown name.
Vector surface_values(const Checkpoint& ckpt, const RunPredictions& preds, const std::string& metric);
/// Logit variance for GP heads; 1 - 2|p - 0.5| otherwise (1 - max p for K > 2).
Vector native_uncertainty(const Checkpoint& ckpt, const RunPredictions& preds);
std::string native_uncertainty_name(const Checkpoint& ckpt);

using Report = std::vector<std::pair<std::string, double>>;

/// accuracy, ece, nll, brier on the IND data; auroc/aupr for IND vs OOD with
/// the native uncertainty and with Dempster-Shafer; mean uncertainties.
Report evaluate(const Checkpoint& ckpt, const data::Dataset2D& ind, const Matrix& ood, std::uint64_t seed = 0);

inline constexpr const char* kCompareColumns =
    "variant,accuracy,ece,nll,brier,auroc,aupr,auroc_ds,aupr_ds,spearman_distance";

struct CompareRow {
  std::string variant;
  Report metrics;  // same keys and order as kCompareColumns after `variant`
};

/// Trains every variant on config's dataset (other keys shared) and reports
/// test metrics plus the Spearman correlation between native uncertainty and
/// distance-to-training-set over `grid`. Rows follow the order of `variants`.
std::vector<CompareRow> compare_variants(const RunConfig& base, const std::vector<std::string>& variants,
                                         const data::EvalGrid& grid);
std::string format_compare_csv(const std::vector<CompareRow>& rows);

}  // namespace sngp
