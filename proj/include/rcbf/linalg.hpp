#pragma once

#include <Eigen/Dense>

namespace rcbf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace rcbf
