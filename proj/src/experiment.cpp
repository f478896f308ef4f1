#include "sngp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sngp/baselines.hpp"
#include "sngp/metrics.hpp"

namespace sngp {

data::Dataset2D load_dataset(const RunConfig& config) {
  if (config.dataset == "two_moons") return data::gen_two_moons(config.n_per_class, config.noise, config.data_seed);
  if (config.dataset == "two_ovals") return data::gen_two_ovals(config.n_per_class, config.data_seed);
  if (config.dataset == "csv") return data::read_dataset_csv_file(config.data_path);
  throw ConfigError("unknown dataset: " + config.dataset);
}

data::Dataset2D load_test_set(const RunConfig& config) {
  if (config.dataset == "csv") return load_dataset(config);
  RunConfig c = config;
  c.data_seed = config.data_seed + 1;
  return load_dataset(c);
}

std::size_t num_classes_of(const data::Dataset2D& ds) {
  require(!ds.labels.empty(), "dataset has no labels");
  const int mx = *std::max_element(ds.labels.begin(), ds.labels.end());
  return std::max<std::size_t>(2, static_cast<std::size_t>(mx) + 1);
}

Checkpoint train_run(const RunConfig& config, const data::Dataset2D& train_data, std::vector<TrainReport>* reports) {
  validate(config);
  const ModelConfig mc = to_model_config(config, train_data.points.cols(), num_classes_of(train_data));
  const TrainConfig tc = to_train_config(config);
  Checkpoint ckpt;
  ckpt.config = config;
  if (mc.variant == Variant::deep_ensemble) {
    EnsembleOptions opts;
    opts.size = config.ensemble_size;
    EnsembleModel ens = train_ensemble(mc, tc, opts, train_data.points, train_data.labels, reports);
    ckpt.members = std::move(ens.members);
  } else {
    SngpModel model = make_model(mc, config.seed);
    TrainReport rep = train(model, train_data.points, train_data.labels, tc);
    if (reports != nullptr) *reports = {rep};
    ckpt.members.push_back(std::move(model));
  }
  return ckpt;
}

RunPredictions predict_run(const Checkpoint& ckpt, const Matrix& x, std::uint64_t seed) {
  require(!ckpt.members.empty(), "predict_run: checkpoint has no models");
  const std::size_t n = x.rows();
  RunPredictions out;
  if (ckpt.members.size() == 1 && ckpt.members.front().head == HeadKind::gp) {
    Rng rng = Rng(seed).derive("predict");
    const PredictionBatch b = predict_batch(ckpt.members.front(), x, ckpt.config.mc_samples, rng);
    out.probs = b.probs;
    out.dempster_shafer = b.uncertainty_ds;
    out.variance = Vector(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : b.variance.row(i)) s += v;
      out.variance[i] = s / static_cast<double>(b.variance.cols());
    }
    return out;
  }
  const std::size_t k_count = ckpt.members.front().num_classes;
  out.probs = Matrix(n, k_count);
  out.dempster_shafer = Vector(n, 0.0);
  for (const auto& m : ckpt.members) {
    const Matrix z = mean_logits(m, x);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector p = softmax(z.row(i));
      for (std::size_t k = 0; k < k_count; ++k) out.probs(i, k) += p[k];
      out.dempster_shafer[i] += metrics::dempster_shafer(z.row(i));
    }
  }
  const double inv = 1.0 / static_cast<double>(ckpt.members.size());
  out.probs *= inv;
  for (double& v : out.dempster_shafer) v *= inv;
  return out;
}

namespace {

Vector margin_values(const RunPredictions& preds) {
  if (preds.probs.cols() != 2) throw IncompatibleError("margin uncertainty is defined for binary models only");
  Vector v(preds.probs.rows());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = prob_margin_uncertainty(preds.probs.row(i));
  return v;
}

}  // namespace

Vector surface_values(const Checkpoint& ckpt, const RunPredictions& preds, const std::string& metric) {
  (void)ckpt;
  if (metric == "variance") {
    if (preds.variance.empty()) throw IncompatibleError("variance metric needs a GP output layer");
    return preds.variance;
  }
  if (metric == "margin") return margin_values(preds);
  if (metric == "ds") return preds.dempster_shafer;
  throw ContractError("unknown surface metric: " + metric);
}

std::string native_uncertainty_name(const Checkpoint& ckpt) {
  const bool gp = ckpt.members.size() == 1 && ckpt.members.front().head == HeadKind::gp;
  if (gp) return "variance";
  return ckpt.members.front().num_classes == 2 ? "margin" : "one_minus_max_prob";
}

Vector native_uncertainty(const Checkpoint& ckpt, const RunPredictions& preds) {
  const std::string name = native_uncertainty_name(ckpt);
  if (name == "variance") return preds.variance;
  if (name == "margin") return margin_values(preds);
  Vector v(preds.probs.rows());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto r = preds.probs.row(i);
    v[i] = 1.0 - *std::max_element(r.begin(), r.end());
  }
  return v;
}

Report evaluate(const Checkpoint& ckpt, const data::Dataset2D& ind, const Matrix& ood, std::uint64_t seed) {
  require(ind.size() > 0, "evaluate: empty IND data");
  const RunPredictions pi = predict_run(ckpt, ind.points, seed);
  Report r;
  r.emplace_back("accuracy", metrics::accuracy(pi.probs, ind.labels));
  r.emplace_back("ece", metrics::ece(pi.probs, ind.labels));
  r.emplace_back("nll", metrics::nll(pi.probs, ind.labels));
  r.emplace_back("brier", metrics::brier(pi.probs, ind.labels));

  const Vector ui = native_uncertainty(ckpt, pi);
  double mean_ind = 0.0;
  for (double v : ui) mean_ind += v;
  mean_ind /= static_cast<double>(ui.size());

  if (ood.rows() == 0) {
    for (const char* k : {"auroc", "aupr", "auroc_ds", "aupr_ds", "mean_uncertainty_ood"})
      r.emplace_back(k, std::nan(""));
    r.emplace_back("mean_uncertainty_ind", mean_ind);
    return r;
  }
  const RunPredictions po = predict_run(ckpt, ood, seed + 1);
  const Vector uo = native_uncertainty(ckpt, po);
  std::vector<bool> flags(ui.size(), false);
  flags.resize(ui.size() + uo.size(), true);
  Vector scores = ui;
  scores.insert(scores.end(), uo.begin(), uo.end());
  Vector ds = pi.dempster_shafer;
  ds.insert(ds.end(), po.dempster_shafer.begin(), po.dempster_shafer.end());

  r.emplace_back("auroc", metrics::auroc(scores, flags));
  r.emplace_back("aupr", metrics::aupr(scores, flags));
  r.emplace_back("auroc_ds", metrics::auroc(ds, flags));
  r.emplace_back("aupr_ds", metrics::aupr(ds, flags));
  double mean_ood = 0.0;
  for (double v : uo) mean_ood += v;
  r.emplace_back("mean_uncertainty_ood", mean_ood / static_cast<double>(uo.size()));
  r.emplace_back("mean_uncertainty_ind", mean_ind);
  return r;
}

std::vector<CompareRow> compare_variants(const RunConfig& base, const std::vector<std::string>& variants,
                                         const data::EvalGrid& grid) {
  require(!variants.empty(), "compare: no variants given");
  const data::Dataset2D train_data = load_dataset(base);
  const data::Dataset2D test_data = load_test_set(base);
  const Vector dist = data::distance_to_set(grid.points, train_data.points);

  std::vector<CompareRow> rows;
  for (const auto& tag : variants) {
    RunConfig c = base;
    c.variant = tag;
    validate(c);
    const Checkpoint ckpt = train_run(c, train_data);
    const Report full = evaluate(ckpt, test_data, train_data.ood_points, c.seed);
    const RunPredictions pg = predict_run(ckpt, grid.points, c.seed + 2);
    const double rho = metrics::spearman(native_uncertainty(ckpt, pg), dist);

    CompareRow row;
    row.variant = tag;
    for (const auto& [k, v] : full)
      if (k.rfind("mean_uncertainty", 0) != 0) row.metrics.emplace_back(k, v);
    row.metrics.emplace_back("spearman_distance", rho);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = std::string(kCompareColumns) + "\n";
  char buf[32];
  for (const auto& row : rows) {
    out += row.variant;
    for (const auto& [k, v] : row.metrics) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace sngp
