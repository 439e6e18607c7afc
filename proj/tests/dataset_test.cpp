#include <doctest.h>

#include <set>
#include <stdexcept>

#include "agboost/dataset.hpp"
#include "test_oracles.hpp"

using namespace agboost;

TEST_CASE("parse_libsvm basic format") {
  const Dataset d = parse_libsvm(std::string("1 1:0.5 3:2\n-1 2:1\n"));
  REQUIRE(d.rows() == 2);
  REQUIRE(d.cols() == 3);
  CHECK(d.features(0, 0) == 0.5);
  CHECK(d.features(0, 1) == 0.0);
  CHECK(d.features(0, 2) == 2.0);
  CHECK(d.features(1, 0) == 0.0);
  CHECK(d.features(1, 1) == 1.0);
  CHECK(d.features(1, 2) == 0.0);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);
}

TEST_CASE("parse_libsvm widens to a declared feature count") {
  const Dataset d = parse_libsvm(std::string("1 1:2\n"), 5);
  CHECK(d.cols() == 5);
  CHECK(d.features(0, 4) == 0.0);
}

TEST_CASE("parse_libsvm errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_libsvm(std::string("")), "parse error: no samples",
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_libsvm(std::string("  \n\n")), "parse error: no samples",
                       std::runtime_error);
  try {
    parse_libsvm(std::string("1 1:1\n1 2:1 1:3\n"));
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("ascending") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_libsvm(std::string("1 1:abc\n")), std::runtime_error);
  CHECK_THROWS_AS(parse_libsvm(std::string("x 1:1\n")), std::runtime_error);
  CHECK_THROWS_AS(parse_libsvm(std::string("1 0:1\n")), std::runtime_error);
}

TEST_CASE("libsvm round trip is identity") {
  test_oracles::Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform() * 12);
    const Index p = 1 + static_cast<Index>(rng.uniform() * 6);
    Dataset d;
    d.features = Matrix::Zero(n, p);
    d.labels.resize(n);
    for (Index i = 0; i < n; ++i) {
      d.labels[i] = rng.normal();
      for (Index j = 0; j < p; ++j) {
        if (rng.uniform() < 0.4) d.features(i, j) = rng.normal();
      }
    }
    // Column p-1 anchors the width so the re-parse sees the same p.
    d.features(0, p - 1) = 1.0;
    const Dataset back = parse_libsvm(to_libsvm(d));
    CHECK(back == d);
  }
}

TEST_CASE("parse_csv by name and by index") {
  const Dataset d = parse_csv(std::string("y,x1\n1,2\n0,3\n"), "y");
  REQUIRE(d.rows() == 2);
  REQUIRE(d.cols() == 1);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == 0.0);
  CHECK(d.features(0, 0) == 2.0);
  CHECK(d.feature_names == std::vector<std::string>{"x1"});

  const Dataset by_index = parse_csv(std::string("a,b\n1,2\n"), "1");
  CHECK(by_index.labels[0] == 2.0);
  CHECK(by_index.features(0, 0) == 1.0);
}

TEST_CASE("parse_csv errors") {
  CHECK_THROWS_WITH_AS(parse_csv(std::string("y,x\n1,2\n"), "label"),
                       "label column 'label' not found in header", std::runtime_error);
  CHECK_THROWS_AS(parse_csv(std::string("y,x\n1\n"), "y"), std::runtime_error);
  CHECK_THROWS_AS(parse_csv(std::string("y,x\n1,foo\n"), "y"), std::runtime_error);
  CHECK_THROWS_AS(parse_csv(std::string(""), "y"), std::runtime_error);
  // single row is valid
  CHECK(parse_csv(std::string("y,x\n1,2\n"), "y").rows() == 1);
}

TEST_CASE("train_test_split determinism and exactness") {
  test_oracles::Rng rng(5);
  Dataset d;
  d.features = Matrix::Zero(10, 1);
  d.labels.resize(10);
  for (Index i = 0; i < 10; ++i) {
    d.features(i, 0) = static_cast<double>(i);
    d.labels[i] = static_cast<double>(i);
  }

  const auto [train1, test1] = train_test_split(d, {0.8, 7});
  CHECK(train1.rows() == 8);
  CHECK(test1.rows() == 2);
  const auto [train2, test2] = train_test_split(d, {0.8, 7});
  CHECK(train1 == train2);
  CHECK(test1 == test2);

  std::set<double> seen;
  for (Index i = 0; i < train1.rows(); ++i) seen.insert(train1.labels[i]);
  for (Index i = 0; i < test1.rows(); ++i) seen.insert(test1.labels[i]);
  CHECK(seen.size() == 10);  // exact partition

  Dataset two;
  two.features = Matrix::Zero(2, 1);
  two.labels = Vector::Zero(2);
  const auto [a, b] = train_test_split(two, {0.5, 0});
  CHECK(a.rows() == 1);
  CHECK(b.rows() == 1);

  CHECK_THROWS_AS(train_test_split(two, {0.9, 0}), std::invalid_argument);
}

TEST_CASE("different seeds give different partitions") {
  Dataset d;
  d.features = Matrix::Zero(100, 1);
  d.labels.resize(100);
  for (Index i = 0; i < 100; ++i) d.labels[i] = static_cast<double>(i);

  const auto [base_train, base_test] = train_test_split(d, {0.8, 0});
  int distinct = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto [train, test] = train_test_split(d, {0.8, seed});
    if (!(train == base_train)) ++distinct;
  }
  CHECK(distinct == 20);
}

TEST_CASE("normalize_binary_labels maps {0,1} and leaves everything else") {
  Dataset d = parse_csv(std::string("y,x\n1,2\n0,3\n"), "y");
  CHECK(normalize_binary_labels(d));
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);

  Dataset signs = parse_libsvm(std::string("1 1:1\n-1 1:2\n"));
  CHECK_FALSE(normalize_binary_labels(signs));
  CHECK(signs.labels[1] == -1.0);

  Dataset reals = parse_libsvm(std::string("24.5 1:1\n0 1:2\n"));
  CHECK_FALSE(normalize_binary_labels(reals));
}

TEST_CASE("build_quantile_index") {
  Dataset d;
  d.features = Matrix::Zero(3, 2);
  d.features.col(0) << 1, 2, 3;
  d.features.col(1) << 5, 5, 5;  // constant
  d.labels = Vector::Zero(3);

  const QuantileIndex idx = build_quantile_index(d, 100);
  CHECK(idx.thresholds[0] == std::vector<double>{1, 2, 3});
  CHECK(idx.thresholds[1].empty());
}

TEST_CASE("quantile candidates on many distinct values") {
  test_oracles::Rng rng(3);
  Matrix features(1000, 1);
  for (Index i = 0; i < 1000; ++i) features(i, 0) = rng.uniform();
  const QuantileIndex idx = build_quantile_index(features, 100);
  const auto& t = idx.thresholds[0];
  REQUIRE(t.size() == 100);
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k - 1] < t[k]);
  // candidates are observed values
  std::set<double> observed;
  for (Index i = 0; i < 1000; ++i) observed.insert(features(i, 0));
  for (const double v : t) CHECK(observed.count(v) == 1);
}

TEST_CASE("quantile search equals exhaustive search when distinct <= q") {
  test_oracles::Rng rng(9);
  Matrix features(50, 3);
  for (Index i = 0; i < 50; ++i) {
    for (Index j = 0; j < 3; ++j) {
      features(i, j) = std::floor(rng.uniform() * 8);  // alphabet of 8 values
    }
  }
  const QuantileIndex idx = build_quantile_index(features, 100);
  for (Index j = 0; j < 3; ++j) {
    std::set<double> distinct;
    for (Index i = 0; i < 50; ++i) distinct.insert(features(i, j));
    if (distinct.size() <= 1) {
      CHECK(idx.thresholds[static_cast<std::size_t>(j)].empty());
      continue;
    }
    CHECK(idx.thresholds[static_cast<std::size_t>(j)] ==
          std::vector<double>(distinct.begin(), distinct.end()));
  }
}
