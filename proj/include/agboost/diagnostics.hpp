#pragma once

#include <string>

#include "agboost/booster.hpp"

namespace agboost {

struct BoundRow {
  int m = 0;          // iterate index; row 0 is the initial model f^0
  double lhs = 0.0;   // L(f^m) - l_star
  double rhs = 0.0;   // f_star_norm_sq / (2 eta gamma (m+1)^2)
  bool satisfied = false;  // lhs <= rhs + 1e-9
};

struct BoundReport {
  std::vector<BoundRow> rows;

  bool all_satisfied() const;
};

// Per-iterate suboptimality bound for an accelerated run. l_star must not
// exceed any observed training loss (within 1e-9).
BoundReport agbm_bound(const TrainTrace& trace, double f_star_norm_sq,
                       double l_star, double eta, double gamma);

// Copies the report's rhs values into the trace records.
void annotate_bound(TrainTrace& trace, const BoundReport& report);

struct SlopeReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int window_begin = 0;
  int window_end = 0;
};

// OLS fit of log(L(f^m) - l_star) against log(m) over m in
// [window_begin, window_end]; suboptimality must be positive there.
SlopeReport fit_slope(const TrainTrace& trace, double l_star,
                      int window_begin, int window_end);

// Minimum recorded residual-fit cosine over iterations with a nonzero
// residual: an empirical estimate of the learner class's minimal cosine
// angle restricted to the residuals this run actually produced. Neither an
// upper nor a lower bound of the true class constant.
double mca_estimate(const TrainTrace& trace);

struct DivergenceReport {
  bool diverged = false;
  int first_divergent_iteration = -1;
};

// Flags a run whose final training loss exceeds twice its run minimum, or
// that tripped the trainer's divergence cap.
DivergenceReport detect_divergence(const TrainTrace& trace);

std::string to_csv(const BoundReport& report);
std::string summary(const BoundReport& report);
std::string summary(const SlopeReport& report);

}  // namespace agboost
