#include "agboost/booster.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

namespace agboost {

namespace {

constexpr double kDivergenceCap = 1e12;
constexpr double kGoldenRatio = 1.6180339887498949;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Fits the configured learner kind against the training matrix.
struct Fitter {
  const Matrix& rows;
  QuantileIndex index;
  TreeConfig tree;
  LearnerKind kind;

  Fitter(const Dataset& train, const BoostConfig& config)
      : rows(train.features), tree(config.tree), kind(config.learner_kind) {
    if (kind == LearnerKind::tree) {
      index = build_quantile_index(train.features, config.tree.quantiles);
    } else {
      index.thresholds.resize(static_cast<std::size_t>(train.features.cols()));
    }
  }

  Learner fit(const Vector& target, Vector& fit_predictions) const {
    return fit_learner(kind, target, rows, index, tree, &fit_predictions);
  }
};

// Derivative-free minimization of a unimodal function over [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double rel_tol) {
  double a = lo;
  double b = hi;
  double c = b - (b - a) / kGoldenRatio;
  double d = a + (b - a) / kGoldenRatio;
  double fc = f(c);
  double fd = f(d);
  const double tol = rel_tol * std::max(1.0, std::abs(hi - lo));
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) / kGoldenRatio;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) / kGoldenRatio;
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Tracks the patience-based stop on test loss.
struct EarlyStopper {
  int rounds = 0;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;

  bool done(const std::optional<double>& test_loss) {
    if (rounds <= 0 || !test_loss.has_value()) return false;
    if (*test_loss < best) {
      best = *test_loss;
      stale = 0;
    } else {
      ++stale;
    }
    return stale >= rounds;
  }
};

}  // namespace

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::gbm: return "gbm";
    case Algorithm::agbm: return "agbm";
    case Algorithm::vagbm: return "vagbm";
    case Algorithm::agbmr: return "agbmr";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "gbm") return Algorithm::gbm;
  if (name == "agbm") return Algorithm::agbm;
  if (name == "vagbm") return Algorithm::vagbm;
  if (name == "agbmr") return Algorithm::agbmr;
  throw std::invalid_argument("unknown algorithm: " + name);
}

void BoostConfig::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (tree.depth_limit < 1) throw std::invalid_argument("depth_limit must be >= 1");
  if (tree.min_split_gain < 0.0) throw std::invalid_argument("min_split_gain must be >= 0");
  if (tree.l2_leaf < 0.0) throw std::invalid_argument("l2_leaf must be >= 0");
  if (tree.quantiles < 1) throw std::invalid_argument("quantiles must be >= 1");
  if (early_stop_rounds < 0) throw std::invalid_argument("early_stop_rounds must be >= 0");
  if (algorithm == Algorithm::agbmr && restart_option == RestartOption::fixed_period) {
    if (!mu.has_value() || !(*mu > 0.0)) {
      throw std::invalid_argument(
          "restart option 'fixed' requires mu (strong-convexity constant) > 0");
    }
  }
}

double theta(int iteration) { return 2.0 / (iteration + 2); }

Vector corrected_residual(int iteration, const Vector& residual,
                          const Vector& carry_prev, const Vector& fit_prev) {
  if (iteration == 0) return residual;
  const double decay = (iteration + 1.0) / (iteration + 2.0);
  return residual + decay * (carry_prev - fit_prev);
}

double TrainTrace::final_train_loss() const {
  return records.empty() ? initial_train_loss : records.back().train_loss;
}

double TrainTrace::min_train_loss() const {
  double lo = initial_train_loss;
  for (const auto& r : records) lo = std::min(lo, r.train_loss);
  return lo;
}

Vector predict(const EnsembleModel& model, const Matrix& rows) {
  Vector out = Vector::Constant(rows.rows(), model.intercept);
  for (const auto& member : model.members) {
    if (member.coefficient == 0.0) continue;
    out += member.coefficient * predict_learner(member.learner, rows);
  }
  return out;
}

TrainResult train_gbm(const Dataset& train, const Loss& loss, const BoostConfig& config,
                      const Dataset* test) {
  config.validate();
  const Fitter fitter(train, config);
  const Vector& y = train.labels;
  const Index n = train.rows();

  Vector f = Vector::Zero(n);
  Vector f_test;
  if (test != nullptr) f_test = Vector::Zero(test->rows());

  TrainResult result;
  result.model.loss = loss;
  TrainTrace& trace = result.trace;
  trace.initial_train_loss = total_loss(loss, y, f);
  if (test != nullptr) trace.initial_test_loss = total_loss(loss, test->labels, f_test);
  trace.records.reserve(static_cast<std::size_t>(config.iterations));

  EarlyStopper stopper{config.early_stop_rounds};
  double current_loss = trace.initial_train_loss;

  for (int m = 0; m < config.iterations; ++m) {
    const auto tic = Clock::now();
    const Vector r = pseudo_residual(loss, y, f);
    Vector bfit;
    Learner b = fitter.fit(r, bfit);
    const double bn2 = bfit.squaredNorm();

    double coefficient = 0.0;
    if (bn2 > 0.0) {
      if (!config.line_search) {
        coefficient = config.eta;
      } else if (loss.kind == LossKind::least_squares) {
        coefficient = r.dot(bfit) / bn2;
      } else {
        const double hi =
            (4.0 / loss.sigma) * std::max(1.0, r.norm() / std::sqrt(bn2));
        coefficient = golden_section(
            [&](double s) { return total_loss(loss, y, f + s * bfit); }, 0.0, hi, 1e-6);
        if (total_loss(loss, y, f + coefficient * bfit) > current_loss) coefficient = 0.0;
      }
    }

    f += coefficient * bfit;
    std::optional<double> test_loss;
    if (test != nullptr) {
      if (coefficient != 0.0) f_test += coefficient * predict_learner(b, test->features);
      test_loss = total_loss(loss, test->labels, f_test);
    }
    current_loss = total_loss(loss, y, f);

    result.model.members.push_back({coefficient, std::move(b)});
    IterationRecord rec;
    rec.iteration = m;
    rec.trees_so_far = m + 1;
    rec.train_loss = current_loss;
    rec.test_loss = test_loss;
    rec.residual_norm = r.norm();
    rec.cos_r = cosine_fit(r, bfit);
    rec.wall_time_ms = elapsed_ms(tic);
    trace.records.push_back(std::move(rec));

    if (stopper.done(test_loss)) break;
  }

  result.train_predictions = std::move(f);
  return result;
}

namespace {

// Shared per-iteration state of the accelerated loop, so the restarted
// variant drives the exact same update.
struct AgbmState {
  Vector f, h, hhat;
  Vector f_test, h_test;
  Vector c_prev, b2_prev_pred;
  int local_m = 0;

  std::vector<Learner> learners;
  std::vector<double> coeff_f, coeff_h;

  void reset_phase() {
    h = f;
    hhat = f;
    h_test = f_test;
    c_prev.setZero();
    b2_prev_pred.setZero();
    coeff_h = coeff_f;
    local_m = 0;
  }
};

struct AgbmIterationOutput {
  IterationRecord record;
  double g_loss = 0.0;
};

AgbmIterationOutput agbm_iteration(AgbmState& state, const Fitter& fitter,
                                   const Dataset& train, const Loss& loss,
                                   const BoostConfig& config, const Dataset* test,
                                   TrainTrace& trace, int global_m) {
  const auto tic = Clock::now();
  const Vector& y = train.labels;
  const int m = state.local_m;
  const double th = theta(m);
  const double alpha = config.gamma * config.eta / th;

  const Vector g = (1.0 - th) * state.f + th * state.h;
  const Vector r = pseudo_residual(loss, y, g);

  Vector b1fit;
  Learner b1 = fitter.fit(r, b1fit);
  const double b1_coeff = b1fit.squaredNorm() > 0.0 ? config.eta : 0.0;
  Vector f_next = g + b1_coeff * b1fit;

  const Vector c = corrected_residual(m, r, state.c_prev, state.b2_prev_pred);
  Vector b2fit;
  Learner b2 = fitter.fit(c, b2fit);
  const double b2_coeff = b2fit.squaredNorm() > 0.0 ? alpha : 0.0;
  state.h += b2_coeff * b2fit;
  state.hhat += alpha * r;

  const double g_loss = total_loss(loss, y, g);
  const double f_loss = total_loss(loss, y, f_next);

  // Sufficient decrease of the loss, valid for any fitted learner when the
  // step size is within the smoothness budget.
  if (config.eta <= default_step_size(loss) * (1.0 + 1e-12)) {
    const double allowed = g_loss - 0.5 * config.eta * r.squaredNorm() +
                           0.5 * config.eta * (b1fit - r).squaredNorm();
    trace.max_decrease_violation =
        std::max(trace.max_decrease_violation, f_loss - allowed);
  }
  // Auxiliary-vs-momentum identity: hhat = h + alpha (c - b2(X)).
  const double identity_error =
      (state.hhat - (state.h + alpha * (c - b2fit))).lpNorm<Eigen::Infinity>();
  trace.max_momentum_identity_error =
      std::max(trace.max_momentum_identity_error, identity_error);

  // Expanded coefficients: mix h into f, then append the two new learners.
  for (std::size_t i = 0; i < state.coeff_f.size(); ++i) {
    state.coeff_f[i] = (1.0 - th) * state.coeff_f[i] + th * state.coeff_h[i];
  }
  state.learners.push_back(std::move(b1));
  state.coeff_f.push_back(b1_coeff);
  state.coeff_h.push_back(0.0);

  std::optional<double> test_loss;
  if (test != nullptr) {
    const Vector g_test = (1.0 - th) * state.f_test + th * state.h_test;
    Vector b1_test = b1_coeff != 0.0 ? predict_learner(state.learners.back(), test->features)
                                     : Vector::Zero(test->rows());
    state.f_test = g_test + b1_coeff * b1_test;
  }

  state.learners.push_back(std::move(b2));
  state.coeff_f.push_back(0.0);
  state.coeff_h.push_back(b2_coeff);
  if (test != nullptr) {
    if (b2_coeff != 0.0) {
      state.h_test += b2_coeff * predict_learner(state.learners.back(), test->features);
    }
    test_loss = total_loss(loss, test->labels, state.f_test);
  }

  state.f = std::move(f_next);
  state.c_prev = c;
  state.b2_prev_pred = std::move(b2fit);
  state.local_m = m + 1;

  AgbmIterationOutput out;
  out.g_loss = g_loss;
  out.record.iteration = global_m;
  out.record.trees_so_far = 2 * (global_m + 1);
  out.record.train_loss = f_loss;
  out.record.test_loss = test_loss;
  out.record.residual_norm = r.norm();
  out.record.cos_r = cosine_fit(r, b1fit);
  out.record.cos_c = cosine_fit(c, state.b2_prev_pred);
  out.record.wall_time_ms = elapsed_ms(tic);
  return out;
}

AgbmState make_agbm_state(const Dataset& train, const Dataset* test) {
  AgbmState state;
  state.f = Vector::Zero(train.rows());
  state.c_prev = Vector::Zero(train.rows());
  state.b2_prev_pred = Vector::Zero(train.rows());
  if (test != nullptr) state.f_test = Vector::Zero(test->rows());
  state.reset_phase();
  return state;
}

TrainResult finish_agbm(AgbmState&& state, const Loss& loss, TrainTrace&& trace) {
  TrainResult result;
  result.model.loss = loss;
  result.model.members.reserve(state.learners.size());
  for (std::size_t i = 0; i < state.learners.size(); ++i) {
    result.model.members.push_back({state.coeff_f[i], std::move(state.learners[i])});
  }
  result.trace = std::move(trace);
  result.train_predictions = std::move(state.f);
  return result;
}

}  // namespace

TrainResult train_agbm(const Dataset& train, const Loss& loss, const BoostConfig& config,
                       const Dataset* test) {
  config.validate();
  const Fitter fitter(train, config);
  AgbmState state = make_agbm_state(train, test);

  TrainTrace trace;
  trace.initial_train_loss = total_loss(loss, train.labels, state.f);
  if (test != nullptr) {
    trace.initial_test_loss = total_loss(loss, test->labels, state.f_test);
  }
  trace.records.reserve(static_cast<std::size_t>(config.iterations));

  EarlyStopper stopper{config.early_stop_rounds};
  for (int m = 0; m < config.iterations; ++m) {
    auto out = agbm_iteration(state, fitter, train, loss, config, test, trace, m);
    trace.records.push_back(std::move(out.record));
    if (stopper.done(trace.records.back().test_loss)) break;
  }
  return finish_agbm(std::move(state), loss, std::move(trace));
}

TrainResult train_vagbm(const Dataset& train, const Loss& loss, const BoostConfig& config,
                        const Dataset* test) {
  config.validate();
  const Fitter fitter(train, config);
  const Vector& y = train.labels;

  AgbmState state = make_agbm_state(train, test);
  TrainTrace trace;
  trace.initial_train_loss = total_loss(loss, y, state.f);
  if (test != nullptr) {
    trace.initial_test_loss = total_loss(loss, test->labels, state.f_test);
  }
  trace.records.reserve(static_cast<std::size_t>(config.iterations));
  EarlyStopper stopper{config.early_stop_rounds};

  for (int m = 0; m < config.iterations; ++m) {
    const auto tic = Clock::now();
    const double th = theta(m);
    const Vector g = (1.0 - th) * state.f + th * state.h;
    const Vector r = pseudo_residual(loss, y, g);

    Vector bfit;
    Learner b = fitter.fit(r, bfit);
    const double coeff = bfit.squaredNorm() > 0.0 ? config.eta : 0.0;
    const double h_coeff = coeff != 0.0 ? config.eta / th : 0.0;

    Vector f_next = g + coeff * bfit;
    state.h += h_coeff * bfit;

    const double g_loss = total_loss(loss, y, g);
    const double f_loss = total_loss(loss, y, f_next);
    if (config.eta <= default_step_size(loss) * (1.0 + 1e-12)) {
      const double allowed = g_loss - 0.5 * config.eta * r.squaredNorm() +
                             0.5 * config.eta * (bfit - r).squaredNorm();
      trace.max_decrease_violation =
          std::max(trace.max_decrease_violation, f_loss - allowed);
    }

    for (std::size_t i = 0; i < state.coeff_f.size(); ++i) {
      state.coeff_f[i] = (1.0 - th) * state.coeff_f[i] + th * state.coeff_h[i];
    }
    state.learners.push_back(std::move(b));
    state.coeff_f.push_back(coeff);
    state.coeff_h.push_back(h_coeff);

    std::optional<double> test_loss;
    if (test != nullptr) {
      const Vector g_test = (1.0 - th) * state.f_test + th * state.h_test;
      Vector b_test = coeff != 0.0 ? predict_learner(state.learners.back(), test->features)
                                   : Vector::Zero(test->rows());
      state.f_test = g_test + coeff * b_test;
      state.h_test += h_coeff * b_test;
      test_loss = total_loss(loss, test->labels, state.f_test);
    }

    state.f = std::move(f_next);

    IterationRecord rec;
    rec.iteration = m;
    rec.trees_so_far = m + 1;
    rec.train_loss = f_loss;
    rec.test_loss = test_loss;
    rec.residual_norm = r.norm();
    rec.cos_r = cosine_fit(r, bfit);
    rec.wall_time_ms = elapsed_ms(tic);
    trace.records.push_back(std::move(rec));

    if (f_loss > kDivergenceCap) {
      trace.diverged = true;
      trace.divergent_iteration = m;
      break;
    }
    if (stopper.done(test_loss)) break;
  }
  return finish_agbm(std::move(state), loss, std::move(trace));
}

TrainResult train_agbmr(const Dataset& train, const Loss& loss, const BoostConfig& config,
                        const Dataset* test) {
  config.validate();
  const Fitter fitter(train, config);
  AgbmState state = make_agbm_state(train, test);

  TrainTrace trace;
  trace.initial_train_loss = total_loss(loss, train.labels, state.f);
  if (test != nullptr) {
    trace.initial_test_loss = total_loss(loss, test->labels, state.f_test);
  }
  trace.records.reserve(static_cast<std::size_t>(config.iterations));

  const bool fixed = config.restart_option == RestartOption::fixed_period;
  int phase_len = 0;
  if (fixed) {
    phase_len = static_cast<int>(
        std::ceil(std::sqrt(2.0 / (config.eta * config.gamma * *config.mu))));
    phase_len = std::max(phase_len, 1);
  }

  EarlyStopper stopper{config.early_stop_rounds};
  double accepted_loss = trace.initial_train_loss;
  int phase_accepted = 0;

  for (int global_m = 0; global_m < config.iterations; ++global_m) {
    // Snapshot so an adaptive restart can discard the increasing iterate.
    const std::size_t member_count = state.learners.size();
    const std::vector<double> coeff_snapshot = state.coeff_f;
    const Vector f_snapshot = state.f;
    const Vector f_test_snapshot = state.f_test;

    auto out = agbm_iteration(state, fitter, train, loss, config, test, trace, global_m);
    const double new_loss = out.record.train_loss;
    // Tolerance so that rounding noise on a converged run does not trip
    // restart after restart.
    const bool increased =
        !fixed && new_loss > accepted_loss + 1e-12 * std::max(1.0, accepted_loss);
    trace.records.push_back(std::move(out.record));

    if (increased) {
      state.learners.resize(member_count);
      state.coeff_f = coeff_snapshot;
      state.coeff_h.resize(member_count);
      state.f = f_snapshot;
      state.f_test = f_test_snapshot;
      trace.phase_end_losses.push_back(accepted_loss);
      if (global_m + 1 < config.iterations) {
        state.reset_phase();
        trace.restarts.push_back(global_m + 1);
      }
      phase_accepted = 0;
      continue;
    }

    accepted_loss = new_loss;
    ++phase_accepted;
    if (stopper.done(trace.records.back().test_loss)) break;

    if (fixed && phase_accepted == phase_len) {
      trace.phase_end_losses.push_back(accepted_loss);
      phase_accepted = 0;
      if (global_m + 1 < config.iterations) {
        state.reset_phase();
        trace.restarts.push_back(global_m + 1);
      } else {
        phase_accepted = -1;  // already closed; suppress the final push
      }
    }
  }
  if (phase_accepted > 0) trace.phase_end_losses.push_back(accepted_loss);

  return finish_agbm(std::move(state), loss, std::move(trace));
}

TrainResult train(const Dataset& train, const Loss& loss, const BoostConfig& config,
                  const Dataset* test) {
  switch (config.algorithm) {
    case Algorithm::gbm: return train_gbm(train, loss, config, test);
    case Algorithm::agbm: return train_agbm(train, loss, config, test);
    case Algorithm::vagbm: return train_vagbm(train, loss, config, test);
    case Algorithm::agbmr: return train_agbmr(train, loss, config, test);
  }
  throw std::logic_error("unreachable algorithm");
}

}  // namespace agboost
