#include <doctest.h>

#include <sstream>

#include "sngp/checkpoint.hpp"
#include "sngp/config.hpp"
#include "sngp/data.hpp"
#include "sngp/experiment.hpp"

using namespace sngp;

TEST_CASE("config parsing with comments and overrides") {
  const RunConfig c = parse_config_string("# comment\nvariant = dnn_gp  # trailing\n\nwidth=32\nlayer_norm=false\n");
  CHECK(c.variant == "dnn_gp");
  CHECK(c.width == 32);
  CHECK_FALSE(c.layer_norm);
  CHECK(c.depth == RunConfig{}.depth);
}

TEST_CASE("config rejects unknown keys, duplicates and bad values") {
  CHECK_THROWS_AS(parse_config_string("widht=3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("width=3\nwidth=4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("width=-3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("ridge=abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("variant=mc_dropout\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("discount=1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("just a line\n"), ConfigError);
  try {
    parse_config_string("width=3\nbogus=1\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("config echo round-trips every key") {
  RunConfig c;
  c.learning_rate = 0.1;  // not exactly representable
  c.data_path = "some path.csv";
  c.seed = 12345678901234ULL;
  std::string text;
  for (const auto& l : config_echo(c)) text += l + "\n";
  CHECK(parse_config_string(text) == c);
  CHECK(config_echo(c).size() == 29);
}

TEST_CASE("checkpoint round-trip restores every model bit for bit") {
  RunConfig c;
  c.depth = 2;
  c.width = 8;
  c.gp_features = 16;
  c.epochs = 2;
  c.n_per_class = 20;
  c.gp_projection_dim = 4;
  for (const char* v : {"sngp", "shallow_gp", "dnn_sn", "deep_ensemble"}) {
    CAPTURE(v);
    c.variant = v;
    c.ensemble_size = 2;
    const Checkpoint ck = train_run(c, load_dataset(c));
    std::stringstream ss;
    write_checkpoint(ss, ck);
    const std::string first = ss.str();
    const Checkpoint back = read_checkpoint(ss);
    std::stringstream again;
    write_checkpoint(again, back);
    CHECK(again.str() == first);
    CHECK(back.config == ck.config);
    REQUIRE(back.members.size() == ck.members.size());
    const Matrix x{{0.1, 0.2}, {3.0, -2.0}};
    const RunPredictions p1 = predict_run(ck, x), p2 = predict_run(back, x);
    CHECK(p1.probs == p2.probs);
    CHECK(p1.variance == p2.variance);
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_checkpoint(in);
  };
  CHECK_THROWS_AS(parse("NOT-A-CHECKPOINT 1\n"), CheckpointError);
  CHECK_THROWS_AS(parse("SNGP-CHECKPOINT 2\n"), CheckpointError);
  CHECK_THROWS_AS(parse("SNGP-CHECKPOINT 1\nconfig 1\nbogus=1\nmembers 0\nend\n"), CheckpointError);
  CHECK_THROWS_AS(parse("SNGP-CHECKPOINT 1\nconfig 0\nmembers 1\nmember 0\nvariant sngp\n"), CheckpointError);
  CHECK(parse("SNGP-CHECKPOINT 1\nconfig 0\nmembers 0\nend\n").members.empty());
}
