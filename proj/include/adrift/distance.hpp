#pragma once

#include "adrift/types.hpp"

namespace adrift {

// Squared Euclidean distance between two vectors (or vector expressions).
template <typename A, typename B>
typename A::Scalar squared_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return (a.derived() - b.derived()).squaredNorm();
}

// Squared Euclidean distance from every row of `rows` to `center`.
template <typename D, typename V>
VectorX<typename D::Scalar> squared_distances_to(const Eigen::MatrixBase<D>& rows,
                                                 const Eigen::MatrixBase<V>& center) {
    return (rows.derived().rowwise() - center.derived().transpose()).rowwise().squaredNorm();
}

// Dense n x n matrix of pairwise squared Euclidean distances between rows.
template <typename D>
MatrixX<typename D::Scalar> pairwise_squared_distances(const Eigen::MatrixBase<D>& pts) {
    using Scalar = typename D::Scalar;
    const auto& p = pts.derived();
    VectorX<Scalar> sq = p.rowwise().squaredNorm();
    MatrixX<Scalar> d = sq.replicate(1, p.rows()) + sq.transpose().replicate(p.rows(), 1) -
                        Scalar(2) * (p * p.transpose());
    // Guard tiny negative values from cancellation.
    return d.cwiseMax(Scalar(0));
}

}  // namespace adrift
