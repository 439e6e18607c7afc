#include "agboost/learner.hpp"

#include <cmath>
#include <stdexcept>

namespace agboost {

Vector OracleLearner::predict(const Matrix& rows) const {
  if (rows.rows() == memorized.size()) return memorized;
  return Vector::Zero(rows.rows());
}

OracleLearner fit_oracle(const Vector& target) { return OracleLearner{target}; }

const char* to_string(LearnerKind kind) {
  return kind == LearnerKind::tree ? "tree" : "oracle";
}

LearnerKind learner_kind_from_string(const std::string& name) {
  if (name == "tree") return LearnerKind::tree;
  if (name == "oracle") return LearnerKind::oracle;
  throw std::invalid_argument("unknown learner kind: " + name);
}

Learner fit_learner(LearnerKind kind, const Vector& target, const Matrix& rows,
                    const QuantileIndex& index, const TreeConfig& config,
                    Vector* fit_predictions) {
  if (kind == LearnerKind::oracle) {
    if (fit_predictions != nullptr) *fit_predictions = target;
    return fit_oracle(target);
  }
  return fit_tree(target, rows, index, config, fit_predictions);
}

Vector predict_learner(const Learner& learner, const Matrix& rows) {
  return std::visit([&](const auto& l) { return l.predict(rows); }, learner);
}

double cosine_fit(const Vector& target, const Vector& predictions) {
  if (target.size() != predictions.size()) {
    throw std::invalid_argument("cosine_fit: length mismatch");
  }
  const double tn = target.norm();
  const double pn = predictions.norm();
  if (tn == 0.0 || pn == 0.0) return 0.0;
  return target.dot(predictions) / (tn * pn);
}

}  // namespace agboost
