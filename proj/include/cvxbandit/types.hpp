#pragma once

#include <Eigen/Dense>

namespace cvxbandit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

} // namespace cvxbandit
