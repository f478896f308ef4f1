#include "sngp/baselines.hpp"

#include <exception>
#include <string>

namespace sngp {

SngpModel build_variant(std::string_view tag, const ModelConfig& base, std::uint64_t seed) {
  ModelConfig config = base;
  config.variant = parse_variant(tag);
  return make_model(config, seed);
}

EnsembleModel train_ensemble(const ModelConfig& config, const TrainConfig& train_config, const EnsembleOptions& options,
                             const Matrix& x, std::span<const int> labels, std::vector<TrainReport>* reports) {
  require(options.size >= 1, "train_ensemble: ensemble size must be >= 1");
  ModelConfig member_config = config;
  member_config.variant = Variant::deep_ensemble;

  const std::size_t e = options.size;
  EnsembleModel ens;
  ens.members.resize(e);
  std::vector<TrainReport> member_reports(e);
  std::vector<std::exception_ptr> errors(e);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < e; ++i) {
    try {
      const std::uint64_t seed = options.same_seed ? train_config.seed : train_config.seed + i;
      TrainConfig tc = train_config;
      tc.seed = seed;
      ens.members[i] = make_model(member_config, seed);
      member_reports[i] = train(ens.members[i], x, labels, tc);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  for (std::size_t i = 0; i < e; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const DivergenceError& err) {
      throw DivergenceError("ensemble member " + std::to_string(i) + ": " + err.what());
    }
  }
  if (reports != nullptr) *reports = std::move(member_reports);
  return ens;
}

Matrix ensemble_predict(const EnsembleModel& ensemble, const Matrix& x) {
  require(ensemble.size() >= 1, "ensemble_predict: empty ensemble");
  const std::size_t k_count = ensemble.members.front().num_classes;
  Matrix out(x.rows(), k_count);
  for (const auto& m : ensemble.members) {
    require(m.num_classes == k_count, "ensemble_predict: members disagree on K");
    const Matrix z = mean_logits(m, x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const Vector p = softmax(z.row(i));
      for (std::size_t k = 0; k < k_count; ++k) out(i, k) += p[k];
    }
  }
  out *= 1.0 / static_cast<double>(ensemble.size());
  return out;
}

}  // namespace sngp
