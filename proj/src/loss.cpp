#include "agboost/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace agboost {

namespace {

// log(1 + e^z) = max(z, 0) + log(1 + e^-|z|), exact in real arithmetic and
// overflow-free for any z.
double log1p_exp(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// 1 / (1 + e^z) without overflow.
double inv_logit_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void check_logistic_label(double label) {
  if (label != 1.0 && label != -1.0) {
    throw std::invalid_argument("logistic loss: label must be -1 or +1, got " +
                                std::to_string(label));
  }
}

void check_lengths(const Vector& labels, const Vector& predictions) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument(
        "labels and predictions length mismatch: " + std::to_string(labels.size()) +
        " vs " + std::to_string(predictions.size()));
  }
  if (labels.size() < 1) {
    throw std::invalid_argument("labels and predictions must be nonempty");
  }
}

}  // namespace

const char* to_string(LossKind kind) {
  return kind == LossKind::least_squares ? "least_squares" : "logistic";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "least_squares" || name == "ls") return LossKind::least_squares;
  if (name == "logistic") return LossKind::logistic;
  throw std::invalid_argument("unknown loss kind: " + name);
}

double loss_value(const Loss& loss, double label, double prediction) {
  switch (loss.kind) {
    case LossKind::least_squares: {
      const double d = label - prediction;
      return 0.5 * d * d;
    }
    case LossKind::logistic:
      check_logistic_label(label);
      return log1p_exp(-label * prediction);
  }
  throw std::logic_error("unreachable loss kind");
}

double total_loss(const Loss& loss, const Vector& labels, const Vector& predictions) {
  check_lengths(labels, predictions);
  if (loss.kind == LossKind::least_squares) {
    return 0.5 * (labels - predictions).squaredNorm();
  }
  double sum = 0.0;
  for (Index i = 0; i < labels.size(); ++i) {
    sum += loss_value(loss, labels[i], predictions[i]);
  }
  return sum;
}

Vector pseudo_residual(const Loss& loss, const Vector& labels, const Vector& predictions) {
  check_lengths(labels, predictions);
  if (loss.kind == LossKind::least_squares) {
    return labels - predictions;
  }
  Vector residual(labels.size());
  for (Index i = 0; i < labels.size(); ++i) {
    check_logistic_label(labels[i]);
    residual[i] = labels[i] * inv_logit_neg(labels[i] * predictions[i]);
  }
  return residual;
}

double default_step_size(const Loss& loss) { return 1.0 / loss.sigma; }

}  // namespace agboost
