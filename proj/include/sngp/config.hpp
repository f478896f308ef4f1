#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sngp/model.hpp"
#include "sngp/train.hpp"

namespace sngp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one `train` / `compare` run needs. Text form is one
/// `key=value` per line with `#` comments; unknown keys are rejected.
/// Defaults follow the reference hyperparameters for the 2-D benchmarks.
struct RunConfig {
  std::string variant = "sngp";
  std::string dataset = "two_moons";  // two_moons | two_ovals | csv
  std::size_t n_per_class = 500;
  double noise = 0.1;
  std::uint64_t data_seed = 0;
  std::string data_path;  // used when dataset = csv

  std::size_t depth = 12;
  std::size_t width = 128;
  double dropout = 0.01;
  std::string activation = "relu";
  double sn_bound = 0.9;
  int sn_power_iters = 1;
  bool train_projection = false;

  std::size_t gp_features = 1024;
  double length_scale = 2.0;
  double ridge = 0.001;
  double discount = 0.999;
  bool layer_norm = true;
  std::size_t gp_projection_dim = 0;
  bool shared_precision = false;
  std::string precision_update = "moving_average";

  int epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double l2_beta = 0.0;
  std::uint64_t seed = 0;
  int mc_samples = 10;
  std::size_t ensemble_size = 10;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
/// Throws std::runtime_error when the file cannot be opened, ConfigError on bad content.
RunConfig load_config(const std::string& path);
/// Applies one `key=value` assignment; throws ConfigError for unknown keys or
/// malformed values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Every key in a fixed order, `key=value` per element, doubles at 17 digits.
std::vector<std::string> config_echo(const RunConfig& config);
std::string format_config(const RunConfig& config);

/// Validates ranges and enum names; throws ConfigError.
void validate(const RunConfig& config);

ModelConfig to_model_config(const RunConfig& config, std::size_t input_dim, std::size_t num_classes);
TrainConfig to_train_config(const RunConfig& config);

}  // namespace sngp
