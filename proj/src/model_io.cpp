#include "agboost/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace agboost {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string format_double(double v) {
  // Shortest representation that round-trips exactly.
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) {
      nodes.push_back({{"value", node.value}});
    } else {
      nodes.push_back({{"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right}});
    }
  }
  return {{"columns", tree.columns()}, {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const json& j) {
  std::vector<RegressionTree::Node> nodes;
  for (const auto& jn : j.at("nodes")) {
    RegressionTree::Node node;
    if (jn.contains("value")) {
      node.value = jn.at("value").get<double>();
    } else {
      node.feature = jn.at("feature").get<int>();
      node.threshold = jn.at("threshold").get<double>();
      node.left = jn.at("left").get<int>();
      node.right = jn.at("right").get<int>();
    }
    nodes.push_back(node);
  }
  return RegressionTree(std::move(nodes), j.at("columns").get<Index>());
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& x : j) v[i++] = x.get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const EnsembleModel& model) {
  json members = json::array();
  for (const auto& member : model.members) {
    json jm = {{"coefficient", member.coefficient}};
    if (const auto* tree = std::get_if<RegressionTree>(&member.learner)) {
      jm["type"] = "tree";
      jm["tree"] = tree_to_json(*tree);
    } else {
      jm["type"] = "oracle";
      jm["memorized"] = vector_to_json(std::get<OracleLearner>(member.learner).memorized);
    }
    members.push_back(std::move(jm));
  }
  const json j = {{"schema_version", kSchemaVersion},
                  {"loss",
                   {{"kind", to_string(model.loss.kind)},
                    {"sigma", model.loss.sigma},
                    {"mu", model.loss.mu}}},
                  {"intercept", model.intercept},
                  {"members", std::move(members)}};
  return j.dump(2) + "\n";
}

EnsembleModel model_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::runtime_error("unsupported model schema_version " + std::to_string(version));
  }
  EnsembleModel model;
  model.loss.kind = loss_kind_from_string(j.at("loss").at("kind").get<std::string>());
  model.loss.sigma = j.at("loss").at("sigma").get<double>();
  model.loss.mu = j.at("loss").at("mu").get<double>();
  model.intercept = j.at("intercept").get<double>();
  for (const auto& jm : j.at("members")) {
    EnsembleMember member;
    member.coefficient = jm.at("coefficient").get<double>();
    const auto type = jm.at("type").get<std::string>();
    if (type == "tree") {
      member.learner = tree_from_json(jm.at("tree"));
    } else if (type == "oracle") {
      member.learner = OracleLearner{vector_from_json(jm.at("memorized"))};
    } else {
      throw std::runtime_error("unknown member type '" + type + "'");
    }
    model.members.push_back(std::move(member));
  }
  return model;
}

void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(model);
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

std::string trace_to_csv(const TrainTrace& trace, bool include_wall_time) {
  std::ostringstream out;
  out << "iteration,trees,train_loss,test_loss,residual_norm,cos_r,cos_c";
  if (include_wall_time) out << ",wall_time_ms";
  out << '\n';
  for (const auto& rec : trace.records) {
    out << rec.iteration << ',' << rec.trees_so_far << ',' << format_double(rec.train_loss)
        << ',';
    if (rec.test_loss.has_value()) out << format_double(*rec.test_loss);
    out << ',' << format_double(rec.residual_norm) << ',' << format_double(rec.cos_r) << ',';
    if (rec.cos_c.has_value()) out << format_double(*rec.cos_c);
    if (include_wall_time) out << ',' << format_double(rec.wall_time_ms);
    out << '\n';
  }
  return out.str();
}

void save_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << trace_to_csv(trace);
}

std::string manifest_to_json(const RunManifest& manifest) {
  json j;
  j["command_line"] = manifest.command_line;
  j["version"] = manifest.version;
  j["seed"] = manifest.seed;
  json config;
  config["algorithm"] = manifest.algorithm;
  config["loss"] = manifest.loss;
  config["eta"] = manifest.eta;
  if (manifest.gamma.has_value()) config["gamma"] = *manifest.gamma;
  config["iterations"] = manifest.iterations;
  config["trees"] = manifest.trees;
  config["depth"] = manifest.tree.depth_limit;
  config["min_split_gain"] = manifest.tree.min_split_gain;
  config["l2_leaf"] = manifest.tree.l2_leaf;
  config["quantiles"] = manifest.tree.quantiles;
  config["line_search"] = manifest.line_search;
  if (manifest.restart_option.has_value()) config["restart"] = *manifest.restart_option;
  if (manifest.mu.has_value()) config["mu"] = *manifest.mu;
  config["learner"] = manifest.learner_kind;
  config["early_stop_rounds"] = manifest.early_stop_rounds;
  if (manifest.split_fraction.has_value()) config["split_fraction"] = *manifest.split_fraction;
  j["config"] = std::move(config);
  json datasets = json::array();
  for (const auto& fp : manifest.datasets) {
    datasets.push_back({{"role", fp.role},
                        {"path", fp.path},
                        {"rows", fp.rows},
                        {"cols", fp.cols},
                        {"content_hash", fp.content_hash}});
  }
  j["datasets"] = std::move(datasets);
  j["outputs"] = manifest.outputs;
  json results;
  results["iterations_run"] = manifest.iterations_run;
  results["final_train_loss"] = manifest.final_train_loss;
  if (manifest.final_test_loss.has_value()) {
    results["final_test_loss"] = *manifest.final_test_loss;
  }
  results["diverged"] = manifest.diverged;
  if (manifest.diverged) results["divergent_iteration"] = manifest.divergent_iteration;
  j["results"] = std::move(results);
  return j.dump(2) + "\n";
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest file: " + path);
  out << manifest_to_json(manifest);
}

std::uint64_t fnv1a_file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
  std::uint64_t hash = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ull;
    }
    if (!in) break;
  }
  return hash;
}

}  // namespace agboost
