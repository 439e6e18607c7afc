#include "agboost/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "agboost/diagnostics.hpp"

namespace agboost::verify {

namespace {

constexpr double kInvariantTol = 1e-8;

// Hand-rolled normal draws: std::normal_distribution is
// implementation-defined, and fixtures must not drift across toolchains.
struct Rng {
  std::mt19937_64 engine;

  explicit Rng(std::uint64_t seed) : engine(seed) {}

  double uniform() {  // in [0, 1)
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
  }

  double normal() {
    double u = 0.0;
    while (u == 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

CheckResult check(std::string name, bool pass, std::string detail) {
  return {std::move(name), pass, std::move(detail)};
}

BoostConfig oracle_agbm_config(int iterations, double eta, double gamma) {
  BoostConfig config;
  config.algorithm = Algorithm::agbm;
  config.learner_kind = LearnerKind::oracle;
  config.eta = eta;
  config.gamma = gamma;
  config.iterations = iterations;
  return config;
}

// Strong-learner accelerated recursion on raw prediction vectors; the loss
// reference for the rate-separation suite is computed independently of the
// booster bookkeeping.
double reference_optimum_logistic(const Vector& labels, double eta, double gamma,
                                  int iterations) {
  const Loss loss = Loss::logistic();
  Vector f = Vector::Zero(labels.size());
  Vector h = f;
  double best = total_loss(loss, labels, f);
  for (int m = 0; m < iterations; ++m) {
    const double th = theta(m);
    const Vector g = (1.0 - th) * f + th * h;
    const Vector r = pseudo_residual(loss, labels, g);
    f = g + eta * r;
    h += (gamma * eta / th) * r;
    best = std::min(best, total_loss(loss, labels, f));
  }
  return best;
}

std::vector<CheckResult> run_invariant_checks(const std::string& label,
                                              const TrainTrace& trace) {
  std::vector<CheckResult> checks;
  checks.push_back(check(
      label + ": per-iteration sufficient decrease",
      trace.max_decrease_violation <= kInvariantTol,
      "max violation " + fmt(trace.max_decrease_violation) + " (tol 1e-8)"));
  checks.push_back(check(
      label + ": momentum-identity consistency",
      trace.max_momentum_identity_error <= kInvariantTol,
      "max error " + fmt(trace.max_momentum_identity_error) + " (tol 1e-8)"));
  return checks;
}

}  // namespace

bool all_pass(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

Dataset synthetic_regression(Index n, Index p, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.features.resize(n, p);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) data.features(i, j) = rng.normal();
    data.labels[i] = rng.normal();
  }
  return data;
}

Dataset synthetic_binary(Index n, Index p, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.features.resize(n, p);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) data.features(i, j) = rng.normal();
    data.labels[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  }
  return data;
}

BoundSuiteResult bound_suite() {
  const Dataset data = synthetic_regression(50, 5, 42);
  const Loss loss = Loss::least_squares();
  auto result = train_agbm(data, loss, oracle_agbm_config(100, 1.0, 0.2));

  // Exact interpolation exists, so the optimum is 0 at f*(x_i) = y_i.
  const double f_star_norm_sq = data.labels.squaredNorm();
  BoundReport report = agbm_bound(result.trace, f_star_norm_sq, 0.0, 1.0, 0.2);
  annotate_bound(result.trace, report);

  double worst = 0.0;
  for (const auto& row : report.rows) {
    worst = std::max(worst, row.lhs - row.rhs);
  }
  BoundSuiteResult out;
  out.checks.push_back(check(
      "suboptimality bound at every iterate M in [0, 100]", report.all_satisfied(),
      "worst lhs - rhs = " + fmt(worst) + " (slack 1e-9)"));
  out.trace = std::move(result.trace);
  return out;
}

RestartSuiteResult restart_suite() {
  const Dataset data = synthetic_regression(50, 5, 42);
  const Loss loss = Loss::least_squares();

  BoostConfig config = oracle_agbm_config(20, 1.0, 0.2);
  config.algorithm = Algorithm::agbmr;
  config.restart_option = RestartOption::fixed_period;
  config.mu = 1.0;  // least squares
  auto result = train_agbmr(data, loss, config);
  const TrainTrace& trace = result.trace;

  RestartSuiteResult out;
  const int expected_phase_len = 4;  // ceil(sqrt(2 / (1 * 0.2 * 1)))
  bool spacing_ok = trace.restarts.size() == 4;
  for (std::size_t i = 0; i < trace.restarts.size() && spacing_ok; ++i) {
    spacing_ok = trace.restarts[i] == static_cast<int>((i + 1)) * expected_phase_len;
  }
  out.checks.push_back(check("fixed restart period is 4 iterations", spacing_ok,
                             "restarts at iterations 4, 8, 12, 16"));
  out.checks.push_back(check("five completed phases",
                             trace.phase_end_losses.size() == 5,
                             std::to_string(trace.phase_end_losses.size()) + " phases"));

  const double l_star = 0.0;
  bool halves = true;
  double worst = 0.0;
  double prev_gap = trace.initial_train_loss - l_star;
  for (const double end_loss : trace.phase_end_losses) {
    const double gap = end_loss - l_star;
    const double slack = gap - 0.5 * prev_gap;
    worst = std::max(worst, slack);
    if (slack > 1e-12) halves = false;
    prev_gap = gap;
  }
  out.checks.push_back(check("each phase-end gap at most half the previous", halves,
                             "worst slack " + fmt(worst) + " (tol 1e-12)"));
  out.trace = std::move(result.trace);
  return out;
}

SlopeSuiteResult slope_suite() {
  const Dataset data = synthetic_binary(200, 5, 7);
  const Loss loss = Loss::logistic();
  const double eta = default_step_size(loss);  // 4

  const double l_star = reference_optimum_logistic(data.labels, eta, 0.2, 100000);

  BoostConfig gbm_config;
  gbm_config.algorithm = Algorithm::gbm;
  gbm_config.learner_kind = LearnerKind::oracle;
  gbm_config.eta = eta;
  gbm_config.line_search = false;
  gbm_config.iterations = 200;
  auto gbm = train_gbm(data, loss, gbm_config);

  auto agbm = train_agbm(data, loss, oracle_agbm_config(200, eta, 0.2));

  const double gbm_gap = gbm.trace.final_train_loss() - l_star;
  const double agbm_gap = agbm.trace.final_train_loss() - l_star;

  SlopeSuiteResult out;
  out.checks.push_back(check(
      "accelerated suboptimality at m=200 at most 1/5 of plain boosting",
      agbm_gap <= 0.2 * gbm_gap,
      "agbm " + fmt(agbm_gap) + " vs gbm " + fmt(gbm_gap) + " (ratio " +
          fmt(agbm_gap / gbm_gap) + ")"));

  const SlopeReport slope = fit_slope(agbm.trace, l_star, 20, 200);
  out.checks.push_back(check("accelerated log-log slope at most -1.5 on [20, 200]",
                             slope.slope <= -1.5,
                             "slope " + fmt(slope.slope) + ", r^2 " + fmt(slope.r_squared)));
  out.gbm_trace = std::move(gbm.trace);
  out.agbm_trace = std::move(agbm.trace);
  return out;
}

std::vector<CheckResult> invariants_suite() {
  std::vector<CheckResult> checks;

  const auto bound = bound_suite();
  for (auto& c : run_invariant_checks("bound fixture", bound.trace)) {
    checks.push_back(std::move(c));
  }

  const auto restart = restart_suite();
  for (auto& c : run_invariant_checks("restart fixture", restart.trace)) {
    checks.push_back(std::move(c));
  }

  const Dataset data = synthetic_binary(200, 5, 7);
  const Loss loss = Loss::logistic();
  auto agbm = train_agbm(data, loss, oracle_agbm_config(200, default_step_size(loss), 0.2));
  for (auto& c : run_invariant_checks("logistic oracle fixture", agbm.trace)) {
    checks.push_back(std::move(c));
  }

  // Strong-learner collapse: with complete learners both fits are exact, so
  // the recorded fit cosines are 1 wherever the targets are nonzero.
  bool collapse = true;
  for (const auto& rec : agbm.trace.records) {
    if (rec.residual_norm > 0.0 && (std::abs(rec.cos_r - 1.0) > 1e-12 ||
                                    std::abs(rec.cos_c.value_or(1.0) - 1.0) > 1e-12)) {
      collapse = false;
    }
  }
  checks.push_back(check("strong-learner collapse (both fits exact)", collapse,
                         "cos_r = cos_c = 1 at every nonzero residual"));
  return checks;
}

std::vector<CheckResult> run_suite(const std::string& name) {
  if (name == "bound") return bound_suite().checks;
  if (name == "restart") return restart_suite().checks;
  if (name == "slope") return slope_suite().checks;
  if (name == "invariants") return invariants_suite();
  throw std::invalid_argument("unknown verify suite: " + name);
}

}  // namespace agboost::verify
