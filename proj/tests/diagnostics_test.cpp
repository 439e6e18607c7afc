#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "agboost/diagnostics.hpp"
#include "agboost/verify.hpp"
#include "test_oracles.hpp"

using namespace agboost;

namespace {

TrainTrace synthetic_trace(int iterates, const std::function<double(int)>& loss_at_m) {
  TrainTrace trace;
  trace.initial_train_loss = loss_at_m(0);
  for (int m = 1; m <= iterates; ++m) {
    IterationRecord rec;
    rec.iteration = m - 1;
    rec.trees_so_far = m;
    rec.train_loss = loss_at_m(m);
    rec.residual_norm = 1.0;
    rec.cos_r = 0.5;
    trace.records.push_back(rec);
  }
  return trace;
}

}  // namespace

TEST_CASE("agbm_bound rows and the M=0 convention") {
  TrainTrace trace = synthetic_trace(3, [](int m) { return 1.0 / (m + 1.0); });
  const BoundReport report = agbm_bound(trace, 8.0, 0.0, 1.0, 0.5);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].m == 0);
  CHECK(report.rows[0].rhs == doctest::Approx(8.0).epsilon(1e-15));  // C/(2*1*0.5)
  CHECK(report.rows[0].lhs == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(report.rows[2].rhs == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(report.all_satisfied());

  annotate_bound(trace, report);
  CHECK(trace.records[0].bound_rhs.has_value());
  CHECK(*trace.records[0].bound_rhs == doctest::Approx(8.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("agbm_bound rejects an l_star above the observed losses") {
  const TrainTrace trace = synthetic_trace(3, [](int m) { return 1.0 / (m + 1.0); });
  CHECK_THROWS_AS(agbm_bound(trace, 1.0, 0.5, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("agbm_bound is monotone in gamma") {
  const TrainTrace trace = synthetic_trace(5, [](int m) { return 1.0 / (m + 1.0); });
  const BoundReport loose = agbm_bound(trace, 4.0, 0.0, 1.0, 0.1);
  const BoundReport tight = agbm_bound(trace, 4.0, 0.0, 1.0, 0.4);
  for (std::size_t i = 0; i < loose.rows.size(); ++i) {
    CHECK(tight.rows[i].rhs < loose.rows[i].rhs);
  }
}

TEST_CASE("fit_slope recovers exact power laws") {
  const TrainTrace quadratic =
      synthetic_trace(200, [](int m) { return m == 0 ? 2.0 : 1.0 / (static_cast<double>(m) * m); });
  const SlopeReport s2 = fit_slope(quadratic, 0.0, 1, 200);
  CHECK(std::abs(s2.slope - (-2.0)) <= 1e-6);
  CHECK(s2.r_squared == doctest::Approx(1.0).epsilon(1e-9));

  const TrainTrace linear =
      synthetic_trace(200, [](int m) { return m == 0 ? 2.0 : 1.0 / static_cast<double>(m); });
  const SlopeReport s1 = fit_slope(linear, 0.0, 1, 200);
  CHECK(std::abs(s1.slope - (-1.0)) <= 1e-6);
}

TEST_CASE("fit_slope rejects nonpositive suboptimality") {
  const TrainTrace trace = synthetic_trace(10, [](int m) { return m >= 5 ? 0.0 : 1.0; });
  CHECK_THROWS_AS(fit_slope(trace, 0.0, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(trace, 0.0, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(trace, 0.0, 5, 3), std::invalid_argument);
}

TEST_CASE("mca_estimate: oracle runs, synthetic values, and the stump oracle") {
  // Complete learners fit every residual exactly.
  const Dataset data = verify::synthetic_regression(30, 3, 5);
  BoostConfig config;
  config.algorithm = Algorithm::agbm;
  config.learner_kind = LearnerKind::oracle;
  config.eta = 1.0;
  config.gamma = 0.2;
  config.iterations = 10;
  const auto oracle_run = train_agbm(data, Loss::least_squares(), config);
  CHECK(mca_estimate(oracle_run.trace) == doctest::Approx(1.0).epsilon(1e-12));

  TrainTrace flat = synthetic_trace(4, [](int) { return 1.0; });
  for (auto& rec : flat.records) rec.cos_r = 0.4;
  CHECK(mca_estimate(flat) == doctest::Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(mca_estimate(TrainTrace{}), std::invalid_argument);

  // Greedy stump fits with exhaustive candidates match the brute-force
  // best-cosine oracle residual by residual.
  const Dataset stump_data = verify::synthetic_regression(25, 2, 77);
  BoostConfig stump_config;
  stump_config.algorithm = Algorithm::gbm;
  stump_config.eta = 0.5;
  stump_config.iterations = 8;
  stump_config.tree.depth_limit = 1;
  const auto run = train_gbm(stump_data, Loss::least_squares(), stump_config);

  // Replay the residual sequence to compare against the oracle.
  Vector f = Vector::Zero(stump_data.rows());
  double expected = 1.0;
  const QuantileIndex idx = build_quantile_index(stump_data, 100);
  for (int m = 0; m < stump_config.iterations; ++m) {
    const Vector r = pseudo_residual(Loss::least_squares(), stump_data.labels, f);
    expected = std::min(expected, test_oracles::best_stump_cosine(r, stump_data.features));
    Vector bfit;
    fit_tree(r, stump_data.features, idx, stump_config.tree, &bfit);
    f += stump_config.eta * bfit;
  }
  CHECK(mca_estimate(run.trace) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("detect_divergence") {
  const TrainTrace decreasing = synthetic_trace(20, [](int m) { return 10.0 - 0.3 * m; });
  CHECK_FALSE(detect_divergence(decreasing).diverged);

  const TrainTrace spiky = synthetic_trace(20, [](int m) {
    return m <= 10 ? 10.0 - 0.9 * m : 1.0 + (m - 10) * 1.0;
  });
  // ends at 11, minimum 1 -> 10x above the run minimum
  const auto verdict = detect_divergence(spiky);
  CHECK(verdict.diverged);
  CHECK(verdict.first_divergent_iteration >= 0);

  TrainTrace capped = synthetic_trace(3, [](int m) { return 1.0 + m; });
  capped.diverged = true;
  capped.divergent_iteration = 2;
  CHECK(detect_divergence(capped).diverged);
  CHECK(detect_divergence(capped).first_divergent_iteration == 2);
}

TEST_CASE("gbm line-search traces never flag divergence") {
  const Dataset data = verify::synthetic_binary(60, 3, 15);
  BoostConfig config;
  config.algorithm = Algorithm::gbm;
  config.eta = 1.0;
  config.line_search = true;
  config.iterations = 25;
  config.tree.depth_limit = 2;
  const auto result = train_gbm(data, Loss::logistic(), config);
  CHECK_FALSE(detect_divergence(result.trace).diverged);
}

TEST_CASE("report serialization") {
  const TrainTrace trace = synthetic_trace(2, [](int m) { return 1.0 / (m + 1.0); });
  const BoundReport report = agbm_bound(trace, 4.0, 0.0, 1.0, 0.5);
  const std::string csv = to_csv(report);
  CHECK(csv.rfind("m,lhs,rhs,satisfied\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
  CHECK(summary(report).find("0 violations") != std::string::npos);

  const SlopeReport slope = fit_slope(trace, 0.0, 1, 2);
  CHECK(summary(slope).find("slope") != std::string::npos);
}
