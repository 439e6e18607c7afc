#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "agboost/booster.hpp"
#include "agboost/verify.hpp"
#include "test_oracles.hpp"

using namespace agboost;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

Dataset random_regression(Index n, Index p, std::uint64_t seed) {
  return verify::synthetic_regression(n, p, seed);
}

BoostConfig oracle_config(Algorithm algorithm, int iterations, double eta, double gamma) {
  BoostConfig config;
  config.algorithm = algorithm;
  config.learner_kind = LearnerKind::oracle;
  config.iterations = iterations;
  config.eta = eta;
  config.gamma = gamma;
  return config;
}

}  // namespace

TEST_CASE("theta sequence") {
  CHECK(theta(0) == 1.0);
  CHECK(theta(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(theta(10) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("corrected residual recursion") {
  // At iteration 0 the carry-over vanishes.
  CHECK(corrected_residual(0, vec({1, 2}), vec({9, 9}), vec({9, 9})) == vec({1, 2}));
  // At iteration 1 the decay is 2/3: r + 2/3 (c_prev - b_prev).
  const Vector c = corrected_residual(1, vec({1, 0}), vec({0.3, -0.3}), vec({0, 0}));
  CHECK(c[0] == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(c[1] == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("config validation") {
  BoostConfig config;
  config.eta = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.eta = 0.1;
  config.gamma = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.gamma = 0.5;
  config.iterations = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.iterations = 5;
  config.algorithm = Algorithm::agbmr;
  config.restart_option = RestartOption::fixed_period;
  CHECK_THROWS_WITH_AS(config.validate(),
                       "restart option 'fixed' requires mu (strong-convexity constant) > 0",
                       std::invalid_argument);
  config.mu = 1.0;
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("gbm with oracle learner and line search converges in one step") {
  const Dataset data = random_regression(20, 2, 3);
  BoostConfig config = oracle_config(Algorithm::gbm, 1, 0.0, 0.1);
  config.eta = 0.5;  // ignored by the line search
  config.line_search = true;
  const auto result = train_gbm(data, Loss::least_squares(), config);
  CHECK(result.trace.records.size() == 1);
  CHECK(result.trace.final_train_loss() == 0.0);
  CHECK(result.trace.records[0].cos_r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gbm one exact stump drives least-squares loss to zero") {
  Dataset data;
  data.features = Matrix::Zero(4, 1);
  data.features.col(0) << 0, 0, 1, 1;
  data.labels = vec({0, 0, 1, 1});
  BoostConfig config;
  config.algorithm = Algorithm::gbm;
  config.eta = 1.0;
  config.iterations = 1;
  config.tree.depth_limit = 1;
  const auto result = train_gbm(data, Loss::least_squares(), config);
  CHECK(result.trace.final_train_loss() == 0.0);
}

TEST_CASE("gbm line search keeps the training loss non-increasing") {
  const Dataset data = verify::synthetic_binary(80, 3, 17);
  BoostConfig config;
  config.algorithm = Algorithm::gbm;
  config.eta = 1.0;
  config.line_search = true;
  config.iterations = 30;
  config.tree.depth_limit = 2;
  const auto result = train_gbm(data, Loss::logistic(), config);
  double prev = result.trace.initial_train_loss;
  for (const auto& rec : result.trace.records) {
    CHECK(rec.train_loss <= prev + 1e-9);
    prev = rec.train_loss;
  }
}

TEST_CASE("zero-prediction learners get coefficient zero but still count") {
  Dataset data;
  data.features = Matrix::Zero(2, 1);  // constant feature: no split possible
  data.labels = vec({1, -1});          // residual mean is zero
  BoostConfig config;
  config.algorithm = Algorithm::gbm;
  config.eta = 0.3;
  config.iterations = 3;
  const auto result = train_gbm(data, Loss::least_squares(), config);
  CHECK(result.trace.records.size() == 3);
  CHECK(result.model.members.size() == 3);
  for (const auto& member : result.model.members) CHECK(member.coefficient == 0.0);
  CHECK(result.trace.final_train_loss() == result.trace.initial_train_loss);
  CHECK(result.trace.records[0].cos_r == 0.0);
}

TEST_CASE("agbm oracle run satisfies the accelerated suboptimality bound") {
  const Dataset data = random_regression(50, 5, 42);
  const auto result =
      train_agbm(data, Loss::least_squares(), oracle_config(Algorithm::agbm, 100, 1.0, 0.2));
  const double norm_sq = data.labels.squaredNorm();
  // L* = 0 at the interpolating optimum.
  CHECK(result.trace.initial_train_loss <= norm_sq / (2.0 * 0.2) + 1e-9);
  for (const auto& rec : result.trace.records) {
    const double m_plus_1 = rec.iteration + 2.0;  // bound index of f^{m+1}
    CHECK(rec.train_loss <= norm_sq / (2.0 * 0.2 * m_plus_1 * m_plus_1) + 1e-9);
  }
}

TEST_CASE("agbm per-iteration invariants hold on tree runs") {
  const Dataset data = random_regression(60, 4, 11);
  BoostConfig config;
  config.algorithm = Algorithm::agbm;
  config.eta = 1.0;
  config.gamma = 0.1;
  config.iterations = 25;
  config.tree.depth_limit = 2;
  const auto result = train_agbm(data, Loss::least_squares(), config);
  CHECK(result.trace.max_decrease_violation <= 1e-8);
  CHECK(result.trace.max_momentum_identity_error <= 1e-8);
}

TEST_CASE("expanded coefficients reproduce the tracked predictions") {
  const Dataset data = random_regression(50, 4, 19);
  BoostConfig config;
  config.algorithm = Algorithm::agbm;
  config.eta = 0.5;
  config.gamma = 0.3;
  config.iterations = 20;
  config.tree.depth_limit = 3;
  const auto result = train_agbm(data, Loss::least_squares(), config);
  const Vector expanded = predict(result.model, data.features);
  const double rel = (expanded - result.train_predictions).norm() /
                     std::max(1.0, result.train_predictions.norm());
  CHECK(rel <= 1e-8);
}

TEST_CASE("strong learners collapse vagbm onto agbm with gamma 1") {
  const Dataset data = random_regression(30, 2, 23);
  const Loss loss = Loss::least_squares();
  const auto agbm =
      train_agbm(data, loss, oracle_config(Algorithm::agbm, 15, 0.4, 1.0));
  const auto vagbm =
      train_vagbm(data, loss, oracle_config(Algorithm::vagbm, 15, 0.4, 1.0));
  REQUIRE(agbm.trace.records.size() == vagbm.trace.records.size());
  for (std::size_t i = 0; i < agbm.trace.records.size(); ++i) {
    CHECK(agbm.trace.records[i].train_loss ==
          doctest::Approx(vagbm.trace.records[i].train_loss).epsilon(1e-12));
  }
  CHECK((agbm.train_predictions - vagbm.train_predictions).lpNorm<Eigen::Infinity>() <=
        1e-10);
}

TEST_CASE("vagbm first iteration equals a plain fixed-step boost") {
  const Dataset data = random_regression(40, 3, 29);
  const Loss loss = Loss::least_squares();
  BoostConfig tree_config;
  tree_config.eta = 0.7;
  tree_config.iterations = 1;
  tree_config.tree.depth_limit = 2;
  tree_config.algorithm = Algorithm::vagbm;
  const auto vagbm = train_vagbm(data, loss, tree_config);
  tree_config.algorithm = Algorithm::gbm;
  const auto gbm = train_gbm(data, loss, tree_config);
  CHECK(vagbm.trace.records[0].train_loss ==
        doctest::Approx(gbm.trace.records[0].train_loss).epsilon(1e-15));
}

TEST_CASE("vagbm divergence cap stops the run and flags the trace") {
  // A step size far above 1/sigma overshoots geometrically, so the loss
  // crosses the cap within a few iterations.
  Dataset data;
  data.features = Matrix::Zero(4, 1);
  data.features.col(0) << 0, 0, 1, 1;
  data.labels = vec({0, 0, 1, 1});
  BoostConfig config;
  config.algorithm = Algorithm::vagbm;
  config.eta = 100.0;
  config.iterations = 50;
  config.tree.depth_limit = 1;
  const auto result = train_vagbm(data, Loss::least_squares(), config);
  CHECK(result.trace.diverged);
  CHECK(result.trace.divergent_iteration >= 0);
  CHECK(result.trace.records.size() < static_cast<std::size_t>(config.iterations));
  CHECK(result.trace.final_train_loss() > 1e12);
}

TEST_CASE("agbmr fixed restart: phase length and halving") {
  const Dataset data = random_regression(50, 5, 42);
  BoostConfig config = oracle_config(Algorithm::agbmr, 20, 1.0, 0.2);
  config.restart_option = RestartOption::fixed_period;
  config.mu = 1.0;
  const auto result = train_agbmr(data, Loss::least_squares(), config);
  CHECK(result.trace.restarts == std::vector<int>{4, 8, 12, 16});
  REQUIRE(result.trace.phase_end_losses.size() == 5);
  double prev_gap = result.trace.initial_train_loss;
  for (const double end : result.trace.phase_end_losses) {
    CHECK(end <= 0.5 * prev_gap + 1e-12);
    prev_gap = end;
  }
}

TEST_CASE("agbmr adaptive restart is a single phase on a monotone run") {
  const Dataset data = random_regression(50, 5, 42);
  const Loss loss = Loss::least_squares();
  BoostConfig config = oracle_config(Algorithm::agbmr, 12, 1.0, 0.2);
  config.restart_option = RestartOption::adaptive;
  const auto agbmr = train_agbmr(data, loss, config);
  config.algorithm = Algorithm::agbm;
  const auto agbm = train_agbm(data, loss, config);
  CHECK(agbmr.trace.restarts.empty());
  REQUIRE(agbmr.trace.records.size() == agbm.trace.records.size());
  for (std::size_t i = 0; i < agbm.trace.records.size(); ++i) {
    CHECK(agbmr.trace.records[i].train_loss ==
          doctest::Approx(agbm.trace.records[i].train_loss).epsilon(1e-12));
  }
}

TEST_CASE("agbmr adaptive restart discards the increasing iterate") {
  // Tree learners on a small least-squares problem with a large step
  // eventually raise the loss; the adaptive rule must restart and the
  // accepted loss sequence must stay non-increasing.
  const Dataset data = random_regression(40, 3, 51);
  BoostConfig config;
  config.algorithm = Algorithm::agbmr;
  config.restart_option = RestartOption::adaptive;
  config.eta = 1.0;
  config.gamma = 0.8;
  config.iterations = 40;
  config.tree.depth_limit = 1;
  const auto result = train_agbmr(data, Loss::least_squares(), config);
  if (!result.trace.restarts.empty()) {
    double prev = result.trace.initial_train_loss;
    for (const double end : result.trace.phase_end_losses) {
      CHECK(end <= prev + 1e-9);
      prev = end;
    }
  }
  // The expanded model must reproduce the accepted (post-discard) state.
  const Vector expanded = predict(result.model, data.features);
  const double rel = (expanded - result.train_predictions).norm() /
                     std::max(1.0, result.train_predictions.norm());
  CHECK(rel <= 1e-8);
}

TEST_CASE("predict on ensembles") {
  EnsembleModel empty;
  empty.loss = Loss::least_squares();
  CHECK(predict(empty, Matrix::Zero(3, 2)).isZero());

  EnsembleModel one;
  one.loss = Loss::least_squares();
  one.members.push_back({0.1, RegressionTree::leaf(1.0)});
  const Vector out = predict(one, Matrix::Zero(4, 2));
  for (Index i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("early stopping on a worsening test loss") {
  const Dataset data = random_regression(30, 2, 61);
  Dataset test = data;
  test.labels = -data.labels;  // training progress must hurt this test set
  BoostConfig config;
  config.algorithm = Algorithm::gbm;
  config.eta = 0.3;
  config.iterations = 50;
  config.early_stop_rounds = 3;
  config.tree.depth_limit = 2;
  const auto result = train_gbm(data, Loss::least_squares(), config, &test);
  CHECK(result.trace.records.size() < 50);
}
