#pragma once

#include <vector>

#include "agboost/dataset.hpp"
#include "agboost/types.hpp"

namespace agboost {

struct TreeConfig {
  int depth_limit = 3;
  double min_split_gain = 0.0;
  double l2_leaf = 0.0;  // lambda: leaf value is sum(target)/(count + lambda)
  int quantiles = 100;
};

// Axis-aligned binary regression tree. Routing convention: feature value
// <= threshold goes left. Nodes live in a flat array, children referenced
// by index; leaves have left = right = -1.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;  // leaf prediction; unused on internal nodes
    int left = -1;
    int right = -1;

    bool is_leaf() const { return left < 0; }
  };

  RegressionTree() : nodes_{Node{}} {}
  explicit RegressionTree(std::vector<Node> nodes, Index columns = -1);

  static RegressionTree leaf(double value);

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Vector predict(const Matrix& rows) const;

  // Scaling every leaf by a positive factor stays inside the learner class
  // and scales predictions by the same factor.
  void scale_leaves(double factor);

  int depth() const;
  int leaf_count() const;
  const std::vector<Node>& nodes() const { return nodes_; }
  Index columns() const { return columns_; }

 private:
  std::vector<Node> nodes_;
  Index columns_ = -1;  // expected column count; -1 skips the check
};

// Greedy top-down least-squares fit of target over the quantile candidates.
// At each node the split maximizing the squared-error reduction (with
// l2-shrunk leaf values) is chosen; ties break toward the lowest feature
// index, then the lowest threshold. Stops at depth_limit, nodes with fewer
// than 2 samples, constant targets, or best gain below min_split_gain.
// fit_predictions, when non-null, receives the fit-time training
// predictions (identical to routing the rows through the returned tree).
RegressionTree fit_tree(const Vector& target, const Matrix& rows,
                        const QuantileIndex& index, const TreeConfig& config,
                        Vector* fit_predictions = nullptr);

}  // namespace agboost
