#pragma once

#include <Eigen/Dense>

namespace nexc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace nexc
