#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agboost/dataset.hpp"
#include "agboost/learner.hpp"
#include "agboost/loss.hpp"

namespace agboost {

enum class Algorithm { gbm, agbm, vagbm, agbmr };
enum class RestartOption { fixed_period, adaptive };

const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct BoostConfig {
  Algorithm algorithm = Algorithm::gbm;
  double eta = 0.1;    // step size
  double gamma = 0.1;  // momentum parameter, in (0, 1]
  int iterations = 100;
  bool line_search = false;  // gbm only
  RestartOption restart_option = RestartOption::fixed_period;  // agbmr only
  std::optional<double> mu;  // strong-convexity constant, agbmr fixed_period only
  TreeConfig tree;
  LearnerKind learner_kind = LearnerKind::tree;
  int early_stop_rounds = 0;  // 0 disables; monitors test loss when a test set is given

  void validate() const;  // throws std::invalid_argument on out-of-domain fields
};

// Mixing weight between the primary and momentum ensembles: 2 / (m + 2).
double theta(int iteration);

// Momentum-fitting target: the current pseudo-residual plus a decayed
// carry-over of the previous fitting error. At iteration 0 it is the
// pseudo-residual itself.
Vector corrected_residual(int iteration, const Vector& residual,
                          const Vector& carry_prev, const Vector& fit_prev);

struct IterationRecord {
  int iteration = 0;
  int trees_so_far = 0;
  double train_loss = 0.0;
  std::optional<double> test_loss;
  double residual_norm = 0.0;          // |r^m|
  double cos_r = 0.0;                  // cosine of the residual fit
  std::optional<double> cos_c;         // cosine of the corrected-residual fit
  std::optional<double> bound_rhs;     // suboptimality bound, when annotated
  double wall_time_ms = 0.0;
};

struct TrainTrace {
  double initial_train_loss = 0.0;  // L(f^0)
  std::optional<double> initial_test_loss;
  std::vector<IterationRecord> records;

  bool diverged = false;           // training loss exceeded the 1e12 cap
  int divergent_iteration = -1;

  std::vector<int> restarts;             // iteration index starting each new phase
  std::vector<double> phase_end_losses;  // accepted loss at the end of each phase

  // Worst case over the run of the per-iteration proof-side checks: the
  // sufficient-decrease slack L(f^{m+1}) - [L(g^m) - eta/2 |r|^2 +
  // eta/2 |b1 - r|^2], and the inf-norm gap between the tracked auxiliary
  // momentum sums and h + alpha (c - b2).
  double max_decrease_violation = 0.0;
  double max_momentum_identity_error = 0.0;

  double final_train_loss() const;
  double min_train_loss() const;  // over the initial loss and every record
};

struct EnsembleMember {
  double coefficient = 0.0;
  Learner learner;
};

// Additive model: prediction = intercept + sum coefficient * learner(x).
struct EnsembleModel {
  Loss loss;
  double intercept = 0.0;
  std::vector<EnsembleMember> members;
};

Vector predict(const EnsembleModel& model, const Matrix& rows);

struct TrainResult {
  EnsembleModel model;
  TrainTrace trace;
  // Incrementally tracked training predictions f^M(X); the expanded model
  // reproduces these to 1e-8 relative error.
  Vector train_predictions;
};

TrainResult train_gbm(const Dataset& train, const Loss& loss,
                      const BoostConfig& config, const Dataset* test = nullptr);
TrainResult train_agbm(const Dataset& train, const Loss& loss,
                       const BoostConfig& config, const Dataset* test = nullptr);
TrainResult train_vagbm(const Dataset& train, const Loss& loss,
                        const BoostConfig& config, const Dataset* test = nullptr);
TrainResult train_agbmr(const Dataset& train, const Loss& loss,
                        const BoostConfig& config, const Dataset* test = nullptr);

// Dispatches on config.algorithm.
TrainResult train(const Dataset& train, const Loss& loss,
                  const BoostConfig& config, const Dataset* test = nullptr);

}  // namespace agboost
