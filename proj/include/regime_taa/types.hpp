// types.hpp
// Dense linear-algebra aliases used across the library.

#pragma once

#include <Eigen/Dense>

namespace regime_taa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace regime_taa
