#include "sngp/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sngp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(d)) throw ConfigError(key + ": not a finite number: '" + v + "'");
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const bool neg = !v.empty() && v[0] == '-';
  const std::uint64_t mag = to_u64(key, neg ? v.substr(1) : v);
  if (mag > 1000000000ULL) throw ConfigError(key + ": integer out of range: '" + v + "'");
  return neg ? -static_cast<int>(mag) : static_cast<int>(mag);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field field(T RunConfig::*member) {
  Field f;
  f.set = [member](RunConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, std::string>) c.*member = v;
    else if constexpr (std::is_same_v<T, bool>) c.*member = to_bool(k, v);
    else if constexpr (std::is_same_v<T, double>) c.*member = to_double(k, v);
    else if constexpr (std::is_same_v<T, int>) c.*member = to_int(k, v);
    else c.*member = static_cast<T>(to_u64(k, v));
  };
  f.get = [member](const RunConfig& c) -> std::string {
    if constexpr (std::is_same_v<T, std::string>) return c.*member;
    else if constexpr (std::is_same_v<T, bool>) return c.*member ? "true" : "false";
    else if constexpr (std::is_same_v<T, double>) return fmt(c.*member);
    else return std::to_string(c.*member);
  };
  return f;
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"variant", field(&RunConfig::variant)},
      {"dataset", field(&RunConfig::dataset)},
      {"n_per_class", field(&RunConfig::n_per_class)},
      {"noise", field(&RunConfig::noise)},
      {"data_seed", field(&RunConfig::data_seed)},
      {"data_path", field(&RunConfig::data_path)},
      {"depth", field(&RunConfig::depth)},
      {"width", field(&RunConfig::width)},
      {"dropout", field(&RunConfig::dropout)},
      {"activation", field(&RunConfig::activation)},
      {"sn_bound", field(&RunConfig::sn_bound)},
      {"sn_power_iters", field(&RunConfig::sn_power_iters)},
      {"train_projection", field(&RunConfig::train_projection)},
      {"gp_features", field(&RunConfig::gp_features)},
      {"length_scale", field(&RunConfig::length_scale)},
      {"ridge", field(&RunConfig::ridge)},
      {"discount", field(&RunConfig::discount)},
      {"layer_norm", field(&RunConfig::layer_norm)},
      {"gp_projection_dim", field(&RunConfig::gp_projection_dim)},
      {"shared_precision", field(&RunConfig::shared_precision)},
      {"precision_update", field(&RunConfig::precision_update)},
      {"epochs", field(&RunConfig::epochs)},
      {"batch_size", field(&RunConfig::batch_size)},
      {"learning_rate", field(&RunConfig::learning_rate)},
      {"momentum", field(&RunConfig::momentum)},
      {"l2_beta", field(&RunConfig::l2_beta)},
      {"seed", field(&RunConfig::seed)},
      {"mc_samples", field(&RunConfig::mc_samples)},
      {"ensemble_size", field(&RunConfig::ensemble_size)},
  };
  return table;
}

}  // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& [name, f] : fields()) {
    if (name == key) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key: '" + key + "'");
}

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    seen[key] = line_no;
    try {
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  validate(config);
  return config;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> config_echo(const RunConfig& config) {
  std::vector<std::string> out;
  for (const auto& [name, f] : fields()) out.push_back(name + "=" + f.get(config));
  return out;
}

std::string format_config(const RunConfig& config) {
  std::string s;
  for (const auto& line : config_echo(config)) s += line + "\n";
  return s;
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  try {
    parse_variant(c.variant);
    parse_activation(c.activation);
    parse_precision_update(c.precision_update);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  check(c.dataset == "two_moons" || c.dataset == "two_ovals" || c.dataset == "csv",
        "dataset must be two_moons, two_ovals or csv");
  check(c.dataset != "csv" || !c.data_path.empty(), "dataset=csv needs data_path");
  check(c.n_per_class >= 1, "n_per_class must be >= 1");
  check(c.noise >= 0.0, "noise must be >= 0");
  check(c.width >= 1, "width must be >= 1");
  check(c.dropout >= 0.0 && c.dropout < 1.0, "dropout must be in [0, 1)");
  check(c.sn_bound > 0.0, "sn_bound must be > 0");
  check(c.sn_power_iters >= 1, "sn_power_iters must be >= 1");
  check(c.gp_features >= 1, "gp_features must be >= 1");
  check(c.length_scale > 0.0, "length_scale must be > 0");
  check(c.ridge > 0.0, "ridge must be > 0");
  check(c.discount >= 0.0 && c.discount < 1.0, "discount must be in [0, 1)");
  check(c.epochs >= 0, "epochs must be >= 0");
  check(c.batch_size >= 1, "batch_size must be >= 1");
  check(c.learning_rate > 0.0, "learning_rate must be > 0");
  check(c.momentum >= 0.0 && c.momentum < 1.0, "momentum must be in [0, 1)");
  check(c.l2_beta >= 0.0, "l2_beta must be >= 0");
  check(c.mc_samples >= 1, "mc_samples must be >= 1");
  check(c.ensemble_size >= 1, "ensemble_size must be >= 1");
}

ModelConfig to_model_config(const RunConfig& c, std::size_t input_dim, std::size_t num_classes) {
  ModelConfig m;
  m.variant = parse_variant(c.variant);
  m.num_classes = num_classes;
  m.network.input_dim = input_dim;
  m.network.width = c.width;
  m.network.depth = c.depth;
  m.network.activation = parse_activation(c.activation);
  m.network.dropout_rate = c.dropout;
  m.network.sn_bound = c.sn_bound;
  m.network.train_input_projection = c.train_projection;
  m.gp.num_features = c.gp_features;
  m.gp.num_classes = num_classes;
  m.gp.length_scale = c.length_scale;
  m.gp.ridge = c.ridge;
  m.gp.discount = c.discount;
  m.gp.layer_norm = c.layer_norm;
  m.gp.projection_dim = c.gp_projection_dim;
  m.gp.shared_precision = c.shared_precision;
  return m;
}

TrainConfig to_train_config(const RunConfig& c) {
  TrainConfig t;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.learning_rate = c.learning_rate;
  t.momentum = c.momentum;
  t.l2_beta = c.l2_beta;
  t.seed = c.seed;
  t.mc_samples = c.mc_samples;
  t.precision_update = parse_precision_update(c.precision_update);
  t.sn_power_iters = c.sn_power_iters;
  return t;
}

}  // namespace sngp
