#pragma once

#include <string>

#include "agboost/types.hpp"

namespace agboost {

enum class LossKind { least_squares, logistic };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// Bivariate loss l(y, f) together with its regularity constants: sigma is
// the smoothness constant (quadratic upper bound on the loss), mu the
// strong-convexity constant (quadratic lower bound, 0 when absent).
// mu <= sigma always holds.
struct Loss {
  LossKind kind = LossKind::least_squares;
  double sigma = 1.0;
  double mu = 1.0;

  static Loss least_squares() { return {LossKind::least_squares, 1.0, 1.0}; }
  static Loss logistic() { return {LossKind::logistic, 0.25, 0.0}; }
};

// l(y, f) for a single sample. Logistic labels must be -1 or +1; the
// evaluation is overflow-safe for |y*f| up to 1e4 and beyond.
double loss_value(const Loss& loss, double label, double prediction);

// Sum (not mean) of per-sample losses.
double total_loss(const Loss& loss, const Vector& labels, const Vector& predictions);

// Negative gradient of the total loss w.r.t. the prediction vector.
Vector pseudo_residual(const Loss& loss, const Vector& labels, const Vector& predictions);

// Largest step size covered by the smoothness certificate: 1/sigma.
double default_step_size(const Loss& loss);

}  // namespace agboost
