#pragma once

#include <string>
#include <vector>

#include "agboost/booster.hpp"

// Seeded synthetic experiments behind `agboost verify` and the acceptance
// suite. Each suite returns one row per assertion; every tolerance is fixed
// here, not by callers.
namespace agboost::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

bool all_pass(const std::vector<CheckResult>& checks);

// Synthetic fixtures (fixed seeds).
Dataset synthetic_regression(Index n, Index p, std::uint64_t seed);
Dataset synthetic_binary(Index n, Index p, std::uint64_t seed);

// Accelerated-run suboptimality bound with complete learners:
// least squares, n=50, p=5, eta=1, gamma=0.2, every iterate up to M=100.
struct BoundSuiteResult {
  std::vector<CheckResult> checks;
  TrainTrace trace;
};
BoundSuiteResult bound_suite();

// Restarted run, fixed phase length ceil(sqrt(2/(eta gamma mu))) = 4:
// five phases, each phase-end gap at most half the previous one.
struct RestartSuiteResult {
  std::vector<CheckResult> checks;
  TrainTrace trace;
};
RestartSuiteResult restart_suite();

// Rate separation on logistic loss with complete learners: accelerated
// suboptimality at m=200 at most 1/5 of the plain-boosting one, and a
// log-log slope of at most -1.5 over m in [20, 200]. The reference optimum
// comes from a 1e5-iteration run.
struct SlopeSuiteResult {
  std::vector<CheckResult> checks;
  TrainTrace gbm_trace;
  TrainTrace agbm_trace;
};
SlopeSuiteResult slope_suite();

// Per-iteration sufficient decrease and momentum-identity checks on the
// synthetic accelerated runs, plus the strong-learner collapse.
std::vector<CheckResult> invariants_suite();

// Named-suite dispatch for the CLI: bound | restart | slope | invariants.
// Throws std::invalid_argument for unknown names.
std::vector<CheckResult> run_suite(const std::string& name);

}  // namespace agboost::verify
