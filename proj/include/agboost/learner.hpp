#pragma once

#include <string>
#include <variant>

#include "agboost/tree.hpp"

namespace agboost {

// Idealized complete learner: memorizes its fit target, so training-row
// predictions are exact and the class has minimal cosine angle 1. It exists
// for training-loss rate verification only; on a matrix whose row count
// differs from the memorized length it predicts 0 everywhere.
struct OracleLearner {
  Vector memorized;

  Vector predict(const Matrix& rows) const;
};

OracleLearner fit_oracle(const Vector& target);

using Learner = std::variant<RegressionTree, OracleLearner>;

enum class LearnerKind { tree, oracle };

const char* to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(const std::string& name);

Learner fit_learner(LearnerKind kind, const Vector& target, const Matrix& rows,
                    const QuantileIndex& index, const TreeConfig& config,
                    Vector* fit_predictions = nullptr);

Vector predict_learner(const Learner& learner, const Matrix& rows);

// Cosine similarity <a, b> / (|a| |b|); 0 when either norm vanishes.
double cosine_fit(const Vector& target, const Vector& predictions);

}  // namespace agboost
