#pragma once

#include <Eigen/Dense>

namespace modsafe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

}  // namespace modsafe
