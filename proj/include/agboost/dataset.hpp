#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "agboost/types.hpp"

namespace agboost {

struct Dataset {
  Matrix features;  // n x p, dense; absent sparse entries are 0
  Vector labels;    // length n
  std::vector<std::string> feature_names;  // empty, or one name per column

  Index rows() const { return features.rows(); }
  Index cols() const { return features.cols(); }
};

bool operator==(const Dataset& a, const Dataset& b);

// LIBSVM text: each nonempty line is `label idx:val idx:val ...` with
// 1-based, strictly ascending indices. The column count is the maximum
// index seen, widened to min_features when the caller knows the nominal
// dimensionality (LIBSVM files carry no header).
Dataset parse_libsvm(std::istream& in, Index min_features = 0);
Dataset parse_libsvm(const std::string& text, Index min_features = 0);

// Inverse of parse_libsvm up to zero-entry elision: re-parsing the output
// yields an identical Dataset.
std::string to_libsvm(const Dataset& data);

// Rectangular numeric CSV with a header row. label_column is a header name,
// or a 0-based column index when no header cell matches and the string
// parses as an integer. The label column is removed from the features.
Dataset parse_csv(std::istream& in, const std::string& label_column);
Dataset parse_csv(const std::string& text, const std::string& label_column);

enum class DataFormat { libsvm, csv };

// Reads a dataset from a file path, or from stdin when path is "-".
Dataset load_dataset(const std::string& path, DataFormat format,
                     Index min_features = 0, const std::string& csv_label_column = "");

// Maps {0,1} labels to {-1,+1} in place when every label is 0 or 1, so
// binary classification data lands in the sign convention the logistic
// loss expects. Returns whether a mapping happened.
bool normalize_binary_labels(Dataset& data);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

// Deterministic seeded partition: exact (no overlap, union is all rows),
// row order within each part follows the seeded shuffle.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, const SplitSpec& spec);

// Per-feature ascending split candidates drawn from observed values.
struct QuantileIndex {
  std::vector<std::vector<double>> thresholds;
  int q = 100;

  Index feature_count() const { return static_cast<Index>(thresholds.size()); }
};

// Empirical q-quantile cut points per feature (sorted-order positions
// ceil(k*n/q), k = 1..q-1, plus the column maximum), deduplicated. When a
// feature has at most q distinct values the candidates are exactly the
// distinct values, so quantile search equals exhaustive search. A constant
// feature gets an empty list and is never split.
QuantileIndex build_quantile_index(const Matrix& features, int q);
QuantileIndex build_quantile_index(const Dataset& data, int q);

}  // namespace agboost
