// sngp: command-line front end.
//
// Exit codes: 0 ok, 1 I/O or internal error, 2 usage / bad input,
// 3 training diverged, 4 metric incompatible with the model,
// 5 verification failed.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sngp/checkpoint.hpp"
#include "sngp/config.hpp"
#include "sngp/data.hpp"
#include "sngp/experiment.hpp"
#include "sngp/metrics.hpp"
#include "sngp/train.hpp"
#include "sngp/verify.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIncompatible = 4;
constexpr int kExitVerification = 5;
constexpr const char* kFormatVersion = "format_version=1";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, sep))
    if (!p.empty()) parts.push_back(p);
  return parts;
}

sngp::RunConfig config_from(const std::string& path, const std::vector<std::string>& overrides) {
  sngp::RunConfig config = path.empty() ? sngp::RunConfig{} : sngp::load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw sngp::ConfigError("--set expects key=value, got '" + kv + "'");
    sngp::set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  sngp::validate(config);
  return config;
}

std::vector<std::string> with_header(const sngp::RunConfig& config) {
  std::vector<std::string> lines{kFormatVersion};
  for (const auto& l : sngp::config_echo(config)) lines.push_back(l);
  return lines;
}

std::string comment_block(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += "# " + l + "\n";
  return s;
}

int cmd_gen_data(const std::string& dataset, std::size_t n, double noise, std::uint64_t seed,
                 const std::string& out) {
  sngp::data::Dataset2D ds;
  if (dataset == "two_moons") ds = sngp::data::gen_two_moons(n, noise, seed);
  else if (dataset == "two_ovals") ds = sngp::data::gen_two_ovals(n, seed);
  else throw UsageError("unknown dataset '" + dataset + "' (expected two_moons or two_ovals)");

  char buf[64];
  std::snprintf(buf, sizeof buf, "noise=%.17g", noise);
  const std::vector<std::string> comments{kFormatVersion, "dataset=" + dataset, "n_per_class=" + std::to_string(n),
                                          buf, "seed=" + std::to_string(seed)};
  sngp::data::write_dataset_csv_file(out, ds, comments);
  std::printf("wrote %s: %zu IND rows, %zu OOD rows\n", out.c_str(), ds.size(), ds.ood_points.rows());
  return 0;
}

int cmd_train(const sngp::RunConfig& config, const std::string& out, const std::string& report_path) {
  const sngp::data::Dataset2D train_data = sngp::load_dataset(config);
  std::vector<sngp::TrainReport> reports;
  const sngp::Checkpoint ckpt = sngp::train_run(config, train_data, &reports);
  sngp::save_checkpoint(out, ckpt);

  std::string body;
  double wall = 0.0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports.size() > 1) body += "member=" + std::to_string(i) + "\n";
    body += sngp::format_train_report(reports[i], false);
    wall += reports[i].wall_seconds;
  }
  if (!report_path.empty()) write_text(report_path, comment_block(with_header(config)) + body);
  std::cout << sngp::format_config(config) << body;
  std::printf("wall_seconds=%.3f\ncheckpoint=%s\n", wall, out.c_str());
  return 0;
}

int cmd_surface(const std::string& ckpt_path, const std::string& grid_spec, const std::string& metric,
                const std::string& out, const std::string& pgm) {
  const sngp::Checkpoint ckpt = sngp::load_checkpoint(ckpt_path);
  const sngp::data::EvalGrid grid = sngp::data::parse_grid(grid_spec);
  const sngp::RunPredictions preds = sngp::predict_run(ckpt, grid.points, ckpt.config.seed);
  const sngp::Vector values = sngp::surface_values(ckpt, preds, metric);

  auto lines = with_header(ckpt.config);
  lines.push_back("metric=" + metric);
  lines.push_back("grid=" + grid_spec);
  std::ostringstream csv;
  sngp::data::write_surface_csv(csv, grid.points, values, lines);
  write_text(out, csv.str());
  if (!pgm.empty()) {
    std::ostringstream img;
    sngp::data::write_pgm(img, grid, values);
    write_text(pgm, img.str());
  }
  std::printf("wrote %zu grid values (%s)\n", values.size(), metric.c_str());
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path, const std::string& ood_path,
             const std::string& out) {
  const sngp::Checkpoint ckpt = sngp::load_checkpoint(ckpt_path);
  const sngp::data::Dataset2D ind =
      data_path.empty() ? sngp::load_test_set(ckpt.config) : sngp::data::read_dataset_csv_file(data_path);
  sngp::Matrix ood = ind.ood_points;
  if (!ood_path.empty()) {
    const auto ood_ds = sngp::data::read_dataset_csv_file(ood_path);
    ood = ood_ds.ood_points.rows() > 0 ? ood_ds.ood_points : ood_ds.points;
  } else if (ood.rows() == 0) {
    ood = sngp::load_dataset(ckpt.config).ood_points;
  }
  const sngp::Report report = sngp::evaluate(ckpt, ind, ood, ckpt.config.seed);
  std::string text = comment_block(with_header(ckpt.config));
  text += "# native_uncertainty=" + sngp::native_uncertainty_name(ckpt) + "\n";
  text += sngp::metrics::format_report(report);
  write_text(out, text);
  if (out != "-") std::cout << sngp::metrics::format_report(report);
  return 0;
}

int cmd_verify(const std::string& suite) {
  const auto checks = sngp::verify::run_suite(suite);
  const sngp::verify::Check* first_failure = nullptr;
  for (const auto& c : checks) {
    std::printf("%s  %s  (%s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    if (!c.passed && first_failure == nullptr) first_failure = &c;
  }
  if (first_failure != nullptr) {
    std::fprintf(stderr, "verification failed: %s\n", first_failure->name.c_str());
    return kExitVerification;
  }
  if (suite == "theory") std::printf("confirmed: minimax forecast = maximum-entropy forecast = uniform\n");
  return 0;
}

int cmd_compare(const sngp::RunConfig& config, const std::string& variants, const std::string& grid_spec,
                const std::string& out) {
  const auto tags = split(variants, ',');
  if (tags.empty()) throw UsageError("--variants must list at least one variant");
  for (const auto& t : tags) {
    try {
      sngp::parse_variant(t);
    } catch (const sngp::ContractError& e) {
      throw UsageError(e.what());
    }
  }
  const auto rows = sngp::compare_variants(config, tags, sngp::data::parse_grid(grid_spec));
  write_text(out, comment_block(with_header(config)) + sngp::format_compare_csv(rows));
  if (out != "-") std::cout << sngp::format_compare_csv(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-normalized neural Gaussian process: training, evaluation and verification"};
  app.require_subcommand(1);

  std::string dataset = "two_moons", out, config_path, report_path, checkpoint, grid = sngp::data::kDefaultGridSpec,
              metric = "variance", pgm, data_path, ood_path, suite, variants = "sngp,deep_ensemble";
  std::size_t n = 500;
  double noise = sngp::data::kDefaultMoonNoise;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;

  auto* gen = app.add_subcommand("gen-data", "Generate a 2-D benchmark dataset as CSV");
  gen->add_option("--dataset", dataset, "two_moons | two_ovals")->capture_default_str();
  gen->add_option("--n", n, "points per class")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--noise", noise, "two_moons noise sd")->capture_default_str()->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "data seed")->capture_default_str();
  gen->add_option("--out", out, "output CSV path")->required();

  auto* tr = app.add_subcommand("train", "Train a model from a key=value config");
  tr->add_option("--config", config_path, "config file (defaults apply when omitted)");
  tr->add_option("--set", overrides, "override a config key, key=value (repeatable)");
  tr->add_option("--out", out, "checkpoint path")->required();
  tr->add_option("--report", report_path, "write the training report here");

  auto* sf = app.add_subcommand("surface", "Evaluate an uncertainty surface on a grid");
  sf->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  sf->add_option("--grid", grid, "x0:x1:nx,y0:y1:ny")->capture_default_str();
  sf->add_option("--metric", metric, "variance | margin | ds")
      ->capture_default_str()
      ->check(CLI::IsMember({"variance", "margin", "ds"}));
  sf->add_option("--out", out, "surface CSV path")->required();
  sf->add_option("--pgm", pgm, "optional PGM heatmap path");

  auto* ev = app.add_subcommand("eval", "Accuracy, calibration and OOD-detection report");
  ev->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
  ev->add_option("--data", data_path, "IND dataset CSV (default: held-out set regenerated from the config)");
  ev->add_option("--ood-data", ood_path, "OOD CSV (default: OOD rows of the IND data)");
  ev->add_option("--out", out, "report path, - for stdout")->default_val("-");

  auto* vf = app.add_subcommand("verify", "Run a numerical oracle suite");
  vf->add_option("--suite", suite, "theory | lipschitz | kernel")
      ->required()
      ->check(CLI::IsMember({"theory", "lipschitz", "kernel"}));

  auto* cp = app.add_subcommand("compare", "Train several variants and tabulate their metrics");
  cp->add_option("--variants", variants, "comma-separated variant tags")->capture_default_str();
  cp->add_option("--config", config_path, "shared config file");
  cp->add_option("--set", overrides, "override a config key, key=value (repeatable)");
  cp->add_option("--dataset", dataset, "two_moons | two_ovals (overrides the config)");
  cp->add_option("--grid", grid, "grid for the distance correlation")->capture_default_str();
  cp->add_option("--out", out, "CSV path, - for stdout")->default_val("-");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(dataset, n, noise, seed, out);
    if (*tr) return cmd_train(config_from(config_path, overrides), out, report_path);
    if (*sf) return cmd_surface(checkpoint, grid, metric, out, pgm);
    if (*ev) return cmd_eval(checkpoint, data_path, ood_path, out);
    if (*vf) return cmd_verify(suite);
    if (*cp) {
      sngp::RunConfig config = config_from(config_path, overrides);
      if (cp->count("--dataset") > 0) {
        config.dataset = dataset;
        sngp::validate(config);
      }
      return cmd_compare(config, variants, grid, out);
    }
  } catch (const sngp::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const sngp::IncompatibleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIncompatible;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n%s", e.what(), app.help().c_str());
    return kExitUsage;
  } catch (const sngp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const sngp::data::ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitUsage;
  } catch (const sngp::ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}
