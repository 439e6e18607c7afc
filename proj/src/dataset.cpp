#include "agboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace agboost {

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": " + what);
}

double parse_number(const std::string& token, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  bool ok = !token.empty();
  if (ok) {
    try {
      v = std::stod(token, &pos);
      ok = pos == token.size();
    } catch (const std::exception&) {
      ok = false;
    }
  }
  if (!ok) parse_fail(line_no, "unparsable number '" + token + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream s(line);
  std::string tok;
  while (s >> tok) out.push_back(std::move(tok));
  return out;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

bool operator==(const Dataset& a, const Dataset& b) {
  return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
         a.features == b.features && a.labels.size() == b.labels.size() &&
         a.labels == b.labels && a.feature_names == b.feature_names;
}

Dataset parse_libsvm(std::istream& in, Index min_features) {
  std::vector<double> labels;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  Index max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto tokens = split_ws(line);
    labels.push_back(parse_number(tokens[0], line_no));
    std::vector<std::pair<Index, double>> entries;
    Index prev_index = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string::npos) {
        parse_fail(line_no, "expected idx:val, got '" + tokens[t] + "'");
      }
      const std::string idx_str = tokens[t].substr(0, colon);
      Index idx = 0;
      const auto [ptr, ec] =
          std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
      if (ec != std::errc{} || ptr != idx_str.data() + idx_str.size() || idx < 1) {
        parse_fail(line_no, "bad feature index '" + idx_str + "'");
      }
      if (idx <= prev_index) {
        parse_fail(line_no, "feature indices not ascending at '" + tokens[t] + "'");
      }
      prev_index = idx;
      entries.emplace_back(idx, parse_number(tokens[t].substr(colon + 1), line_no));
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(entries));
  }

  if (rows.empty()) throw std::runtime_error("parse error: no samples");

  const Index n = static_cast<Index>(rows.size());
  const Index p = std::max(max_index, min_features);
  Dataset data;
  data.features = Matrix::Zero(n, p);
  data.labels = Eigen::Map<const Vector>(labels.data(), n);
  for (Index i = 0; i < n; ++i) {
    for (const auto& [idx, value] : rows[i]) {
      data.features(i, idx - 1) = value;
    }
  }
  return data;
}

Dataset parse_libsvm(const std::string& text, Index min_features) {
  std::istringstream in(text);
  return parse_libsvm(in, min_features);
}

std::string to_libsvm(const Dataset& data) {
  std::ostringstream out;
  out.precision(17);
  for (Index i = 0; i < data.rows(); ++i) {
    out << data.labels[i];
    for (Index j = 0; j < data.cols(); ++j) {
      const double v = data.features(i, j);
      if (v != 0.0) out << ' ' << (j + 1) << ':' << v;
    }
    out << '\n';
  }
  return out.str();
}

Dataset parse_csv(std::istream& in, const std::string& label_column) {
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  bool have_header_line = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank(line)) {
      have_header_line = true;
      break;
    }
  }
  if (!have_header_line) throw std::runtime_error("parse error: no samples");
  {
    std::istringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      if (!cell.empty() && cell.front() == '"' && cell.back() == '"') {
        cell = cell.substr(1, cell.size() - 2);
      }
      header.push_back(cell);
    }
  }
  if (header.empty()) throw std::runtime_error("parse error: empty header row");

  Index label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) label_idx = static_cast<Index>(j);
  }
  if (label_idx < 0) {
    Index as_index = -1;
    const auto [ptr, ec] = std::from_chars(
        label_column.data(), label_column.data() + label_column.size(), as_index);
    if (ec == std::errc{} && ptr == label_column.data() + label_column.size() &&
        as_index >= 0 && as_index < static_cast<Index>(header.size())) {
      label_idx = as_index;
    } else {
      throw std::runtime_error("label column '" + label_column + "' not found in header");
    }
  }

  const std::size_t width = header.size();
  std::vector<double> labels;
  std::vector<double> values;  // row-major, width-1 per row
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::istringstream s(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(s, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      if (col >= width) parse_fail(line_no, "row wider than header");
      const double v = parse_number(cell, line_no);
      if (static_cast<Index>(col) == label_idx) {
        labels.push_back(v);
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != width) parse_fail(line_no, "ragged row: " + std::to_string(col) +
                                              " cells, expected " + std::to_string(width));
  }
  if (labels.empty()) throw std::runtime_error("parse error: no samples");

  const Index n = static_cast<Index>(labels.size());
  const Index p = static_cast<Index>(width - 1);
  Dataset data;
  data.labels = Eigen::Map<const Vector>(labels.data(), n);
  data.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(values.data(), n, p);
  for (std::size_t j = 0; j < width; ++j) {
    if (static_cast<Index>(j) != label_idx) data.feature_names.push_back(header[j]);
  }
  return data;
}

Dataset parse_csv(const std::string& text, const std::string& label_column) {
  std::istringstream in(text);
  return parse_csv(in, label_column);
}

Dataset load_dataset(const std::string& path, DataFormat format, Index min_features,
                     const std::string& csv_label_column) {
  const auto parse = [&](std::istream& in) {
    return format == DataFormat::libsvm ? parse_libsvm(in, min_features)
                                        : parse_csv(in, csv_label_column);
  };
  if (path == "-") return parse(std::cin);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse(in);
}

bool normalize_binary_labels(Dataset& data) {
  for (Index i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i] != 0.0 && data.labels[i] != 1.0) return false;
  }
  data.labels = 2.0 * data.labels.array() - 1.0;
  return true;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, const SplitSpec& spec) {
  const Index n = data.rows();
  const Index k = static_cast<Index>(std::llround(spec.train_fraction * static_cast<double>(n)));
  if (k < 1 || n - k < 1) {
    throw std::invalid_argument("train_fraction " + std::to_string(spec.train_fraction) +
                                " leaves an empty part for n = " + std::to_string(n));
  }

  // Hand-rolled Fisher-Yates so the partition is identical across platforms.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(spec.seed);
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  const auto take = [&](Index begin, Index count) {
    Dataset part;
    part.features.resize(count, data.cols());
    part.labels.resize(count);
    for (Index i = 0; i < count; ++i) {
      const Index src = order[static_cast<std::size_t>(begin + i)];
      part.features.row(i) = data.features.row(src);
      part.labels[i] = data.labels[src];
    }
    part.feature_names = data.feature_names;
    return part;
  };
  return {take(0, k), take(k, n - k)};
}

QuantileIndex build_quantile_index(const Matrix& features, int q) {
  if (q < 1) throw std::invalid_argument("quantile count must be >= 1");
  const Index n = features.rows();
  QuantileIndex index;
  index.q = q;
  index.thresholds.resize(static_cast<std::size_t>(features.cols()));

  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Index j = 0; j < features.cols(); ++j) {
    for (Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = features(i, j);
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    auto& out = index.thresholds[static_cast<std::size_t>(j)];
    if (distinct.size() <= 1) continue;  // constant feature: never split
    if (distinct.size() <= static_cast<std::size_t>(q)) {
      out = std::move(distinct);
      continue;
    }
    // Cut points at sorted positions ceil(k*n/q), k = 1..q-1, plus the max.
    out.reserve(static_cast<std::size_t>(q));
    for (int k = 1; k < q; ++k) {
      const auto pos = static_cast<std::size_t>(
          (static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(q) - 1) /
          static_cast<std::uint64_t>(q));
      out.push_back(sorted[pos - 1]);
    }
    out.push_back(sorted.back());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return index;
}

QuantileIndex build_quantile_index(const Dataset& data, int q) {
  return build_quantile_index(data.features, q);
}

}  // namespace agboost
