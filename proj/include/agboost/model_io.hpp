#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agboost/booster.hpp"

namespace agboost {

// Model persistence. Versioned JSON schema:
//   {"schema_version": 1, "loss": {"kind", "sigma", "mu"}, "intercept",
//    "members": [{"coefficient", "type": "tree"|"oracle",
//                 "tree": {"columns", "nodes": [...]}} | {"memorized": [...]}]}
// Tree nodes are {"feature", "threshold", "left", "right"} for internal
// nodes and {"value"} for leaves, indices into the flat node array.
std::string model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const std::string& json_text);
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

// Trace CSV, stable column contract:
//   iteration,trees,train_loss,test_loss,residual_norm,cos_r,cos_c,wall_time_ms
// Absent optionals serialize as empty fields. include_wall_time=false drops
// the (non-reproducible) timing column so replays compare byte-identically.
std::string trace_to_csv(const TrainTrace& trace, bool include_wall_time = true);
void save_trace_csv(const TrainTrace& trace, const std::string& path);

// Everything needed to replay a run: the command line, the resolved
// configuration, dataset fingerprints, the seed, and output paths.
struct DatasetFingerprint {
  std::string role;  // "train" or "test"
  std::string path;
  Index rows = 0;
  Index cols = 0;
  std::string content_hash;  // fnv1a-64 of the file bytes, hex
};

struct RunManifest {
  std::string command_line;
  std::string algorithm;
  std::string loss;
  double eta = 0.0;
  std::optional<double> gamma;
  int iterations = 0;
  int trees = 0;
  TreeConfig tree;
  bool line_search = false;
  std::optional<std::string> restart_option;
  std::optional<double> mu;
  std::string learner_kind;
  int early_stop_rounds = 0;
  std::uint64_t seed = 0;
  std::optional<double> split_fraction;
  std::vector<DatasetFingerprint> datasets;
  std::vector<std::string> outputs;
  std::string version;

  // Run outcome, recorded alongside the replay info.
  int iterations_run = 0;
  double final_train_loss = 0.0;
  std::optional<double> final_test_loss;
  bool diverged = false;
  int divergent_iteration = -1;
};

std::string manifest_to_json(const RunManifest& manifest);
void save_manifest(const RunManifest& manifest, const std::string& path);

std::uint64_t fnv1a_file_hash(const std::string& path);

}  // namespace agboost
