#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace adrift {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Rows are samples, columns are features throughout.
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

using Seed = std::uint64_t;

}  // namespace adrift
