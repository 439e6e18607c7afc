#pragma once

#include <Eigen/Core>

namespace agboost {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;  // rows are samples, columns are features

inline constexpr const char* kVersion = "0.1.0";

}  // namespace agboost
