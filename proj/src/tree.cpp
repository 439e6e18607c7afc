#include "agboost/tree.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace agboost {

namespace {

int thread_budget(Index feature_count) {
  static const int env_cap = [] {
    const char* raw = std::getenv("AGBOOST_THREADS");
    if (raw == nullptr) return 0;
    const int v = std::atoi(raw);
    return v > 0 ? v : 1;
  }();
  int budget = static_cast<int>(std::thread::hardware_concurrency());
  if (budget < 1) budget = 1;
  if (env_cap > 0) budget = std::min(budget, env_cap);
  budget = std::min(budget, static_cast<int>(feature_count));
  return std::max(budget, 1);
}

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool found = false;
};

// Best split of one feature over the quantile candidates: bucket the node's
// samples by threshold, then sweep prefix sums. Left/right sums add up to
// the bucketed total exactly, which keeps the all-equal-target gain at 0.
SplitChoice scan_feature(int feature, const std::vector<double>& thresholds,
                         const Vector& target, const Matrix& rows,
                         const std::vector<Index>& samples, double l2) {
  SplitChoice best;
  const std::size_t t = thresholds.size();
  if (t == 0 || samples.size() < 2) return best;

  std::vector<double> sums(t, 0.0);
  std::vector<Index> counts(t, 0);
  for (const Index i : samples) {
    const double v = rows(i, feature);
    const auto bucket = static_cast<std::size_t>(
        std::lower_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin());
    // Node values never exceed the column max, which is always a candidate.
    sums[bucket] += target[i];
    counts[bucket] += 1;
  }

  double total_sum = 0.0;
  for (const double s : sums) total_sum += s;
  const auto total_count = static_cast<double>(samples.size());
  const double parent_obj = total_sum * total_sum / (total_count + l2);

  double left_sum = 0.0;
  double left_count = 0.0;
  for (std::size_t k = 0; k + 1 < t; ++k) {  // the last candidate sends everything left
    left_sum += sums[k];
    left_count += static_cast<double>(counts[k]);
    if (left_count == 0.0) continue;
    const double right_count = total_count - left_count;
    if (right_count == 0.0) break;
    const double right_sum = total_sum - left_sum;
    const double gain = left_sum * left_sum / (left_count + l2) +
                        right_sum * right_sum / (right_count + l2) - parent_obj;
    if (gain > best.gain) best = {gain, feature, thresholds[k], true};
  }
  return best;
}

struct Builder {
  const Vector& target;
  const Matrix& rows;
  const QuantileIndex& index;
  const TreeConfig& config;
  Vector* fit_predictions;
  std::vector<RegressionTree::Node> nodes;

  double leaf_value(const std::vector<Index>& samples) const {
    double sum = 0.0;
    for (const Index i : samples) sum += target[i];
    return sum / (static_cast<double>(samples.size()) + config.l2_leaf);
  }

  SplitChoice best_split(const std::vector<Index>& samples) const {
    const auto p = static_cast<int>(rows.cols());
    const int threads = thread_budget(p);
    std::vector<SplitChoice> per_feature(static_cast<std::size_t>(p));
    if (threads <= 1) {
      for (int j = 0; j < p; ++j) {
        per_feature[static_cast<std::size_t>(j)] = scan_feature(
            j, index.thresholds[static_cast<std::size_t>(j)], target, rows, samples,
            config.l2_leaf);
      }
    } else {
      std::vector<std::future<void>> futures;
      futures.reserve(static_cast<std::size_t>(threads));
      for (int block = 0; block < threads; ++block) {
        futures.push_back(std::async(std::launch::async, [&, block] {
          for (int j = block; j < p; j += threads) {
            per_feature[static_cast<std::size_t>(j)] = scan_feature(
                j, index.thresholds[static_cast<std::size_t>(j)], target, rows, samples,
                config.l2_leaf);
          }
        }));
      }
      for (auto& f : futures) f.get();
    }
    // Sequential reduction in feature order keeps tie-breaking deterministic:
    // lowest feature index, then lowest threshold, wins among equal gains.
    SplitChoice best;
    for (const auto& choice : per_feature) {
      if (choice.found && (!best.found || choice.gain > best.gain)) best = choice;
    }
    return best;
  }

  int build(std::vector<Index>&& samples, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(id)].value = leaf_value(samples);

    bool constant_target = true;
    for (const Index i : samples) {
      if (target[i] != target[samples.front()]) {
        constant_target = false;
        break;
      }
    }
    if (depth >= config.depth_limit || samples.size() < 2 || constant_target) {
      finish_leaf(id, samples);
      return id;
    }
    const SplitChoice split = best_split(samples);
    if (!split.found || split.gain < config.min_split_gain) {
      finish_leaf(id, samples);
      return id;
    }

    std::vector<Index> left, right;
    left.reserve(samples.size());
    right.reserve(samples.size());
    for (const Index i : samples) {
      (rows(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    samples.clear();
    samples.shrink_to_fit();

    const int left_id = build(std::move(left), depth + 1);
    const int right_id = build(std::move(right), depth + 1);
    auto& node = nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    return id;
  }

  void finish_leaf(int id, const std::vector<Index>& samples) {
    if (fit_predictions == nullptr) return;
    const double v = nodes[static_cast<std::size_t>(id)].value;
    for (const Index i : samples) (*fit_predictions)[i] = v;
  }
};

}  // namespace

RegressionTree::RegressionTree(std::vector<Node> nodes, Index columns)
    : nodes_(std::move(nodes)), columns_(columns) {
  if (nodes_.empty()) throw std::invalid_argument("tree must have at least one node");
}

RegressionTree RegressionTree::leaf(double value) {
  Node node;
  node.value = value;
  return RegressionTree({node});
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int at = 0;
  while (!nodes_[static_cast<std::size_t>(at)].is_leaf()) {
    const auto& node = nodes_[static_cast<std::size_t>(at)];
    at = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(at)].value;
}

Vector RegressionTree::predict(const Matrix& rows) const {
  if (columns_ >= 0 && rows.cols() != columns_) {
    throw std::invalid_argument("tree expects " + std::to_string(columns_) +
                                " columns, got " + std::to_string(rows.cols()));
  }
  Vector out(rows.rows());
  for (Index i = 0; i < rows.rows(); ++i) out[i] = predict_row(rows.row(i));
  return out;
}

void RegressionTree::scale_leaves(double factor) {
  if (factor <= 0.0) throw std::invalid_argument("leaf scale factor must be positive");
  for (auto& node : nodes_) {
    if (node.is_leaf()) node.value *= factor;
  }
}

int RegressionTree::depth() const {
  // Iterative depth over the flat array; node 0 is the root.
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int depth = 0;
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      depth = std::max(depth, d);
    } else {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return depth;
}

int RegressionTree::leaf_count() const {
  int count = 0;
  for (const auto& node : nodes_) count += node.is_leaf() ? 1 : 0;
  return count;
}

RegressionTree fit_tree(const Vector& target, const Matrix& rows,
                        const QuantileIndex& index, const TreeConfig& config,
                        Vector* fit_predictions) {
  if (target.size() != rows.rows()) {
    throw std::invalid_argument("fit_tree: target length " + std::to_string(target.size()) +
                                " does not match row count " + std::to_string(rows.rows()));
  }
  if (index.feature_count() != rows.cols()) {
    throw std::invalid_argument("fit_tree: quantile index covers " +
                                std::to_string(index.feature_count()) +
                                " features, data has " + std::to_string(rows.cols()));
  }
  if (target.size() == 0) throw std::invalid_argument("fit_tree: empty target");

  if (fit_predictions != nullptr) fit_predictions->resize(target.size());
  Builder builder{target, rows, index, config, fit_predictions, {}};
  std::vector<Index> all(static_cast<std::size_t>(target.size()));
  for (Index i = 0; i < target.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  builder.build(std::move(all), 0);
  return RegressionTree(std::move(builder.nodes), rows.cols());
}

}  // namespace agboost
