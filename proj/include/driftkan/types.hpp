#pragma once

#include <Eigen/Core>

namespace driftkan {

// Patches and latent vectors are rows, so keep storage row-major.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace driftkan
