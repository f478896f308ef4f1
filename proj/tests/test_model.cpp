#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sngp/baselines.hpp"
#include "sngp/data.hpp"
#include "sngp/model.hpp"
#include "sngp/train.hpp"

using namespace sngp;

namespace {

ModelConfig tiny_config(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.num_classes = 3;
  c.network.input_dim = 2;
  c.network.width = 5;
  c.network.depth = 2;
  c.network.dropout_rate = 0.0;
  c.network.activation = Activation::tanh;
  c.network.train_input_projection = true;
  c.gp.num_features = 12;
  c.gp.length_scale = 1.3;
  c.gp.layer_norm = true;
  c.gp.projection_dim = 4;
  return c;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.flat()) x = rng.normal();
  return m;
}

void check_loss_gradients(SngpModel model, double l2) {
  Rng rng(11);
  if (model.head == HeadKind::gp)
    for (double& b : model.gp.beta.flat()) b = 0.5 * rng.normal();
  const Matrix x = random_matrix(5, 2, rng);
  const std::vector<int> y{0, 2, 1, 1, 0};
  LossOptions opts{l2, 10.0, false};
  Rng unused(0);
  LossResult lr = loss_and_grads(model, x, y, opts, unused);
  const auto params = parameter_views(model);
  const auto grads = gradient_views(model, lr.grads);
  REQUIRE(params.size() == grads.size());
  const double eps = 1e-6;
  for (std::size_t t = 0; t < params.size(); ++t)
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double orig = params[t][i];
      params[t][i] = orig + eps;
      const double up = loss_and_grads(model, x, y, opts, unused).loss;
      params[t][i] = orig - eps;
      const double down = loss_and_grads(model, x, y, opts, unused).loss;
      params[t][i] = orig;
      CHECK(oracle::rel_error((up - down) / (2 * eps), grads[t][i]) < 1e-5);
    }
}

}  // namespace

TEST_CASE("variant tags map to the right toggles") {
  const ModelConfig base = tiny_config(Variant::sngp);
  struct Row {
    const char* tag;
    bool sn;
    HeadKind head;
    bool identity;
  };
  for (const Row& r : {Row{"sngp", true, HeadKind::gp, false}, Row{"dnn_gp", false, HeadKind::gp, false},
                       Row{"dnn_sn", true, HeadKind::dense, false}, Row{"deterministic", false, HeadKind::dense, false},
                       Row{"deep_ensemble", false, HeadKind::dense, false},
                       Row{"shallow_gp", false, HeadKind::gp, true}}) {
    const SngpModel m = build_variant(r.tag, base, 1);
    CHECK(m.spectral_norm_enabled == r.sn);
    CHECK(m.head == r.head);
    CHECK(m.identity_hidden == r.identity);
    CHECK(to_string(m.variant) == r.tag);
  }
  CHECK_THROWS_AS(build_variant("mc_dropout", base, 1), ContractError);
}

TEST_CASE("shallow GP uses the raw input as its hidden map") {
  const SngpModel m = build_variant("shallow_gp", tiny_config(Variant::sngp), 2);
  const Matrix x{{0.5, -1.0}, {2.0, 3.0}};
  CHECK(hidden(m, x) == x);
  CHECK_FALSE(m.gp.layer_norm);
}

TEST_CASE("loss gradients match finite differences for every variant") {
  for (Variant v : {Variant::sngp, Variant::dnn_sn, Variant::shallow_gp}) {
    CAPTURE(std::string(to_string(v)));
    check_loss_gradients(make_model(tiny_config(v), 3), 0.0);
    check_loss_gradients(make_model(tiny_config(v), 3), 0.7);
  }
}

TEST_CASE("loss is the mean cross-entropy") {
  SngpModel m = make_model(tiny_config(Variant::sngp), 4);
  Rng rng(4);
  const Matrix x = random_matrix(3, 2, rng);
  const std::vector<int> y{0, 1, 2};
  Rng unused(0);
  // beta = 0 gives uniform predictions.
  const LossResult lr = loss_and_grads(m, x, y, LossOptions{0.0, 1.0, false}, unused);
  CHECK(lr.loss == doctest::Approx(std::log(3.0)));
  CHECK_THROWS_AS(loss_and_grads(m, x, std::vector<int>{0, 1, 3}, LossOptions{}, unused), ContractError);
}

TEST_CASE("dense-head predictions carry zero variance and a Dempster-Shafer score in (0, 1)") {
  const SngpModel m = make_model(tiny_config(Variant::deterministic), 5);
  Rng rng(5);
  const PredictionBatch b = predict_batch(m, random_matrix(4, 2, rng), 10, rng);
  for (double v : b.variance.flat()) CHECK(v == 0.0);
  for (double u : b.uncertainty_ds) {
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("margin uncertainty is binary only") {
  CHECK(prob_margin_uncertainty(Vector{0.5, 0.5}) == 1.0);
  CHECK(prob_margin_uncertainty(Vector{0.0, 1.0}) == 0.0);
  CHECK_THROWS_AS(prob_margin_uncertainty(Vector{0.2, 0.3, 0.5}), ContractError);
}

TEST_CASE("training step order: SGD, spectral norm, then precision in the last epoch") {
  ModelConfig c = tiny_config(Variant::sngp);
  c.num_classes = 2;
  SngpModel m = make_model(c, 6);
  const auto ds = data::gen_two_moons(20, 0.1, 1);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 16;
  std::vector<std::string> stages;
  std::vector<int> epochs;
  TrainHooks hooks{[&](std::string_view s, int e, std::size_t) {
    stages.emplace_back(s);
    epochs.push_back(e);
  }};
  const TrainReport rep = train(m, ds.points, ds.labels, tc, &hooks);
  CHECK(rep.steps == 9);
  CHECK(rep.epoch_loss.size() == 3);
  // 3 batches per epoch; precision only in epoch 2.
  REQUIRE(stages.size() == 2 * 9 + 3);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i] == "precision") {
      CHECK(epochs[i] == 2);
      CHECK(stages[i - 1] == "spectral_norm");
      CHECK(stages[i - 2] == "sgd");
    }
  }
}

TEST_CASE("exact mode runs one full pass after the precision epoch") {
  ModelConfig c = tiny_config(Variant::sngp);
  c.num_classes = 2;
  SngpModel m = make_model(c, 7);
  const auto ds = data::gen_two_moons(20, 0.1, 1);
  TrainConfig tc;
  tc.epochs = 2;
  tc.precision_update = PrecisionUpdate::exact;
  int exact_passes = 0, minibatch_updates = 0;
  TrainHooks hooks{[&](std::string_view s, int, std::size_t) {
    exact_passes += s == "precision_exact";
    minibatch_updates += s == "precision";
  }};
  train(m, ds.points, ds.labels, tc, &hooks);
  CHECK(exact_passes == 1);
  CHECK(minibatch_updates == 0);

  SngpModel ref = m;
  refit_precision_exact(ref, ds.points);
  CHECK(ref.gp.precision[0] == m.gp.precision[0]);
}

TEST_CASE("training is deterministic and epochs = 0 leaves the model unchanged") {
  ModelConfig c = tiny_config(Variant::sngp);
  c.num_classes = 2;
  c.network.dropout_rate = 0.1;
  const auto ds = data::gen_two_moons(30, 0.1, 2);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  SngpModel a = make_model(c, 8), b = make_model(c, 8);
  train(a, ds.points, ds.labels, tc);
  train(b, ds.points, ds.labels, tc);
  CHECK(a.gp.beta == b.gp.beta);
  CHECK(a.network.blocks[1].layer.weight == b.network.blocks[1].layer.weight);
  CHECK(a.gp.precision[1] == b.gp.precision[1]);

  SngpModel z = make_model(c, 8);
  const SngpModel z0 = z;
  tc.epochs = 0;
  train(z, ds.points, ds.labels, tc);
  CHECK(z.gp.beta == z0.gp.beta);
  CHECK(z.network.blocks[0].layer.weight == z0.network.blocks[0].layer.weight);
}

TEST_CASE("divergence is reported") {
  SngpModel m = make_model(tiny_config(Variant::sngp), 9);
  const auto ds = data::gen_two_moons(10, 0.1, 3);
  TrainConfig tc;
  tc.epochs = 1;
  tc.divergence_threshold = 1e-9;
  CHECK_THROWS_AS(train(m, ds.points, ds.labels, tc), DivergenceError);
}

TEST_CASE("training separates two well-spaced clusters") {
  ModelConfig c;
  c.variant = Variant::sngp;
  c.network.width = 16;
  c.network.depth = 2;
  c.gp.num_features = 64;
  c.gp.layer_norm = false;
  SngpModel m = make_model(c, 10);
  const auto ds = data::gen_two_ovals(50, 4);
  TrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 20;
  const TrainReport rep = train(m, ds.points, ds.labels, tc);
  CHECK(rep.train_accuracy == 1.0);
  CHECK(rep.epoch_loss.back() < rep.epoch_loss.front());
}
