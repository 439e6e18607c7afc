// Command-line surface: reproducible training runs, side-by-side algorithm
// comparisons, the divergence demo, and the verification suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agboost/diagnostics.hpp"
#include "agboost/model_io.hpp"
#include "agboost/verify.hpp"

namespace {

using namespace agboost;

struct IoFlags {
  std::string train_path;
  std::string test_path;
  std::string format = "libsvm";
  std::string label_column;
  Index min_features = 0;
  double split_fraction = 0.0;  // 0 disables
};

struct RunFlags {
  std::string algorithm = "gbm";
  std::string loss = "logistic";
  double eta = 0.1;
  std::optional<double> gamma;
  int trees = 100;
  int depth = 3;
  double min_split_gain = 0.0;
  double l2 = 0.0;
  int quantiles = 100;
  bool line_search = false;
  std::string restart = "fixed";
  std::optional<double> mu;
  std::string learner = "tree";
  int early_stop_rounds = 0;
  std::uint64_t seed = 0;
};

void add_io_flags(CLI::App* cmd, IoFlags& io, bool train_required = true) {
  auto* train = cmd->add_option("--train", io.train_path, "training data path (or - for stdin)");
  if (train_required) train->required();
  cmd->add_option("--test", io.test_path, "held-out data path");
  cmd->add_option("--format", io.format, "input format")
      ->check(CLI::IsMember({"libsvm", "csv"}))
      ->capture_default_str();
  cmd->add_option("--label-column", io.label_column, "label column (csv only)");
  cmd->add_option("--features", io.min_features,
                  "declared feature count for libsvm files without the full index range")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--split", io.split_fraction,
                  "seeded train fraction; splits --train and ignores --test")
      ->check(CLI::Range(0.0, 1.0));
}

void add_run_flags(CLI::App* cmd, RunFlags& run, bool with_algorithm = true) {
  if (with_algorithm) {
    cmd->add_option("--algorithm", run.algorithm, "training driver")
        ->check(CLI::IsMember({"gbm", "agbm", "vagbm", "agbmr"}))
        ->required();
  }
  cmd->add_option("--loss", run.loss, "loss function")
      ->check(CLI::IsMember({"ls", "logistic"}))
      ->required();
  cmd->add_option("--eta", run.eta, "step size")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", run.gamma, "momentum parameter in (0,1] (default 0.1)");
  cmd->add_option("--trees", run.trees,
                  "total trees; agbm/agbmr consume two per iteration")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--depth", run.depth, "tree depth limit")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--min-split-gain", run.min_split_gain, "minimum split gain")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--l2", run.l2, "l2 regularizer on leaf values")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--quantiles", run.quantiles, "split candidates per feature")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--line-search", run.line_search, "per-iteration step-size search (gbm)");
  cmd->add_option("--restart", run.restart, "agbmr restart rule")
      ->check(CLI::IsMember({"fixed", "adaptive"}))
      ->capture_default_str();
  cmd->add_option("--mu", run.mu, "strong-convexity constant (agbmr fixed restart)");
  cmd->add_option("--learner", run.learner, "weak learner class")
      ->check(CLI::IsMember({"tree", "oracle"}))
      ->capture_default_str();
  cmd->add_option("--early-stop-rounds", run.early_stop_rounds,
                  "stop after this many non-improving test evaluations")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", run.seed, "seed for the train/test split")->required();
}

int iterations_for(Algorithm algorithm, int trees) {
  if (algorithm == Algorithm::agbm || algorithm == Algorithm::agbmr) {
    if (trees < 2) {
      throw std::invalid_argument("accelerated runs need at least 2 trees");
    }
    return trees / 2;
  }
  return trees;
}

BoostConfig make_config(const RunFlags& run) {
  BoostConfig config;
  config.algorithm = algorithm_from_string(run.algorithm);
  config.eta = run.eta;
  config.gamma = run.gamma.value_or(0.1);
  config.iterations = iterations_for(config.algorithm, run.trees);
  config.line_search = run.line_search;
  config.restart_option =
      run.restart == "adaptive" ? RestartOption::adaptive : RestartOption::fixed_period;
  config.mu = run.mu;
  config.tree.depth_limit = run.depth;
  config.tree.min_split_gain = run.min_split_gain;
  config.tree.l2_leaf = run.l2;
  config.tree.quantiles = run.quantiles;
  config.learner_kind = learner_kind_from_string(run.learner);
  config.early_stop_rounds = run.early_stop_rounds;
  config.validate();
  return config;
}

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
  std::vector<DatasetFingerprint> fingerprints;
};

DatasetFingerprint fingerprint(const std::string& role, const std::string& path,
                               const Dataset& data) {
  DatasetFingerprint fp;
  fp.role = role;
  fp.path = path;
  fp.rows = data.rows();
  fp.cols = data.cols();
  if (path != "-") {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_file_hash(path)));
    fp.content_hash = buf;
  }
  return fp;
}

LoadedData load_inputs(const IoFlags& io, std::uint64_t seed, bool logistic_labels) {
  const DataFormat format = io.format == "csv" ? DataFormat::csv : DataFormat::libsvm;
  LoadedData loaded;
  loaded.train = load_dataset(io.train_path, format, io.min_features, io.label_column);
  loaded.fingerprints.push_back(fingerprint("train", io.train_path, loaded.train));
  if (logistic_labels) normalize_binary_labels(loaded.train);
  if (io.split_fraction > 0.0) {
    auto [tr, te] = train_test_split(loaded.train, {io.split_fraction, seed});
    loaded.train = std::move(tr);
    loaded.test = std::move(te);
  } else if (!io.test_path.empty()) {
    loaded.test = load_dataset(io.test_path, format, io.min_features, io.label_column);
    loaded.fingerprints.push_back(fingerprint("test", io.test_path, *loaded.test));
    if (logistic_labels) normalize_binary_labels(*loaded.test);
  }
  return loaded;
}

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) out += ' ';
    out += argv[i];
  }
  return out;
}

int cmd_train(const IoFlags& io, const RunFlags& run, const std::string& out_dir,
              const std::string& command_line) {
  const BoostConfig config = make_config(run);
  const Loss loss = run.loss == "ls" ? Loss::least_squares() : Loss::logistic();
  const LoadedData data = load_inputs(io, run.seed, loss.kind == LossKind::logistic);

  const auto result = train(data.train, loss, config,
                            data.test.has_value() ? &*data.test : nullptr);

  std::filesystem::create_directories(out_dir);
  const std::string model_path = out_dir + "/model.json";
  const std::string trace_path = out_dir + "/trace.csv";
  const std::string manifest_path = out_dir + "/manifest.json";
  save_model(result.model, model_path);
  save_trace_csv(result.trace, trace_path);

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.algorithm = run.algorithm;
  manifest.loss = run.loss;
  manifest.eta = run.eta;
  if (config.algorithm != Algorithm::gbm) manifest.gamma = config.gamma;
  manifest.iterations = config.iterations;
  manifest.trees = run.trees;
  manifest.tree = config.tree;
  manifest.line_search = config.line_search;
  if (config.algorithm == Algorithm::agbmr) manifest.restart_option = run.restart;
  manifest.mu = config.mu;
  manifest.learner_kind = run.learner;
  manifest.early_stop_rounds = config.early_stop_rounds;
  manifest.seed = run.seed;
  if (io.split_fraction > 0.0) manifest.split_fraction = io.split_fraction;
  manifest.datasets = data.fingerprints;
  manifest.outputs = {model_path, trace_path, manifest_path};
  manifest.version = kVersion;
  manifest.iterations_run = static_cast<int>(result.trace.records.size());
  manifest.final_train_loss = result.trace.final_train_loss();
  if (!result.trace.records.empty()) {
    manifest.final_test_loss = result.trace.records.back().test_loss;
  }
  manifest.diverged = result.trace.diverged;
  manifest.divergent_iteration = result.trace.divergent_iteration;
  save_manifest(manifest, manifest_path);

  const auto& trace = result.trace;
  std::cout << run.algorithm << ": " << trace.records.size() << " iterations, "
            << result.model.members.size() << " learners, final train loss "
            << trace.final_train_loss();
  if (!trace.records.empty() && trace.records.back().test_loss.has_value()) {
    std::cout << ", final test loss " << *trace.records.back().test_loss;
  }
  if (trace.diverged) {
    std::cout << " [diverged at iteration " << trace.divergent_iteration << "]";
  }
  std::cout << "\nwrote " << model_path << ", " << trace_path << ", " << manifest_path
            << "\n";
  return 0;
}

struct CompareSetting {
  std::string algorithm;
  std::optional<double> gamma;
};

// Settings come as algo[:gamma][@path]; a per-setting path must match --train.
CompareSetting parse_setting(const std::string& raw, const std::string& train_path) {
  std::string body = raw;
  const auto at = body.find('@');
  if (at != std::string::npos) {
    const std::string path = body.substr(at + 1);
    if (path != train_path) {
      throw std::invalid_argument("setting '" + raw + "' names dataset '" + path +
                                  "' but the run uses '" + train_path + "'");
    }
    body = body.substr(0, at);
  }
  CompareSetting setting;
  const auto colon = body.find(':');
  if (colon == std::string::npos) {
    setting.algorithm = body;
  } else {
    setting.algorithm = body.substr(0, colon);
    setting.gamma = std::stod(body.substr(colon + 1));
  }
  algorithm_from_string(setting.algorithm);  // validates
  return setting;
}

void append_curve(std::ostringstream& csv, const std::string& algorithm,
                  const std::optional<double>& gamma, const TrainTrace& trace) {
  for (const auto& rec : trace.records) {
    csv << algorithm << ',';
    if (gamma.has_value()) csv << *gamma;
    csv << ',' << rec.trees_so_far << ',' << rec.train_loss << ',';
    if (rec.test_loss.has_value()) csv << *rec.test_loss;
    csv << '\n';
  }
}

int cmd_compare(const IoFlags& io, const RunFlags& run,
                const std::vector<std::string>& raw_settings, const std::string& out_dir) {
  const Loss loss = run.loss == "ls" ? Loss::least_squares() : Loss::logistic();
  const LoadedData data = load_inputs(io, run.seed, loss.kind == LossKind::logistic);
  const Dataset* test = data.test.has_value() ? &*data.test : nullptr;

  std::ostringstream csv;
  csv << "algorithm,gamma,trees,train_loss,test_loss\n";
  csv.precision(17);
  for (const auto& raw : raw_settings) {
    const CompareSetting setting = parse_setting(raw, io.train_path);
    RunFlags local = run;
    local.algorithm = setting.algorithm;
    local.gamma = setting.gamma;
    const BoostConfig config = make_config(local);
    const auto result = train(data.train, loss, config, test);
    const std::optional<double> shown_gamma =
        config.algorithm == Algorithm::gbm ? std::nullopt
                                           : std::optional<double>(config.gamma);
    append_curve(csv, setting.algorithm,
                 config.algorithm == Algorithm::vagbm ? std::nullopt : shown_gamma,
                 result.trace);
    std::cout << raw << ": final train loss " << result.trace.final_train_loss() << "\n";
  }

  std::filesystem::create_directories(out_dir);
  const std::string csv_path = out_dir + "/compare.csv";
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out << csv.str();
  std::cout << "wrote " << csv_path << "\n";
  return 0;
}

int cmd_diverge_demo(const IoFlags& io, double eta, int trees, int depth,
                     std::uint64_t seed, const std::string& out_dir) {
  const Loss loss = Loss::least_squares();
  LoadedData data = load_inputs(io, seed, false);

  std::ostringstream csv;
  csv << "algorithm,gamma,trees,train_loss,test_loss\n";
  csv.precision(17);

  const auto run_one = [&](Algorithm algorithm, double gamma) {
    BoostConfig config;
    config.algorithm = algorithm;
    config.eta = eta;
    config.gamma = gamma;
    config.iterations = iterations_for(algorithm, trees);
    config.tree.depth_limit = depth;
    const auto result = train(data.train, loss, config, nullptr);
    const auto verdict = detect_divergence(result.trace);
    std::ostringstream label;
    label << to_string(algorithm);
    if (algorithm == Algorithm::agbm) label << "(gamma=" << gamma << ")";
    std::cout << label.str() << ": " << (verdict.diverged ? "DIVERGED" : "converged")
              << ", final train loss " << result.trace.final_train_loss()
              << ", run minimum " << result.trace.min_train_loss();
    if (verdict.diverged) {
      std::cout << " (first divergent iteration " << verdict.first_divergent_iteration
                << ")";
    }
    std::cout << "\n";
    append_curve(csv, to_string(algorithm),
                 algorithm == Algorithm::agbm ? std::optional<double>(gamma) : std::nullopt,
                 result.trace);
    return verdict.diverged;
  };

  run_one(Algorithm::vagbm, 1.0);
  for (const double gamma : {0.05, 0.1, 0.3}) run_one(Algorithm::agbm, gamma);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string csv_path = out_dir + "/diverge.csv";
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << csv.str();
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& suite) {
  std::vector<verify::CheckResult> checks;
  try {
    checks = verify::run_suite(suite);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  for (const auto& c : checks) {
    std::printf("  [%s] %-64s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
  }
  const bool ok = verify::all_pass(checks);
  std::printf("%s: %s\n", suite.c_str(), ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient boosting with and without momentum acceleration"};
  app.require_subcommand(1);

  IoFlags io;
  RunFlags run;
  std::string out_dir;

  auto* train_cmd = app.add_subcommand("train", "train one model and write its artifacts");
  add_io_flags(train_cmd, io);
  add_run_flags(train_cmd, run);
  train_cmd->add_option("--out", out_dir, "output directory")->required();

  IoFlags compare_io;
  RunFlags compare_run;
  std::string compare_out;
  std::vector<std::string> settings;
  auto* compare_cmd =
      app.add_subcommand("compare", "run several settings on one identical split");
  add_io_flags(compare_cmd, compare_io);
  add_run_flags(compare_cmd, compare_run, /*with_algorithm=*/false);
  compare_run.algorithm = "agbm";  // placeholder; each setting overrides
  compare_cmd->add_option("--setting", settings, "algo[:gamma] entries, e.g. agbm:0.3")
      ->required()
      ->expected(-1);
  compare_cmd->add_option("--out", compare_out, "output directory")->required();

  IoFlags demo_io;
  demo_io.train_path = "data/housing";
  double demo_eta = 1.0;
  int demo_trees = 100;
  int demo_depth = 3;
  std::uint64_t demo_seed = 1;
  std::string demo_out;
  auto* demo_cmd = app.add_subcommand(
      "diverge-demo", "momentum without error correction versus corrected runs");
  add_io_flags(demo_cmd, demo_io, /*train_required=*/false);
  demo_cmd->add_option("--eta", demo_eta, "step size")->capture_default_str();
  demo_cmd->add_option("--trees", demo_trees, "total trees per curve")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  demo_cmd->add_option("--depth", demo_depth, "tree depth limit")->capture_default_str();
  demo_cmd->add_option("--seed", demo_seed, "split seed")->capture_default_str();
  demo_cmd->add_option("--out", demo_out, "output directory for the combined csv");

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "run a named verification suite");
  verify_cmd->add_option("suite", suite, "bound | restart | slope | invariants")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(io, run, out_dir, join_args(argc, argv));
    if (compare_cmd->parsed()) {
      return cmd_compare(compare_io, compare_run, settings, compare_out);
    }
    if (demo_cmd->parsed()) {
      return cmd_diverge_demo(demo_io, demo_eta, demo_trees, demo_depth, demo_seed,
                              demo_out);
    }
    if (verify_cmd->parsed()) return cmd_verify(suite);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
