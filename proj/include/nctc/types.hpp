#pragma once

#include <Eigen/Dense>
#include <random>

namespace nctc {

using Index = Eigen::Index;

/// A sequence of feature vectors, one row per position.
using Sequence = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Rng = std::mt19937_64;

}  // namespace nctc
