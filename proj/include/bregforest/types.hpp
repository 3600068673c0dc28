#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace bregforest {

using Index = Eigen::Index;
using RecordId = std::uint64_t;

// Row-major so that one record is one contiguous row.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Points are stored in 32-bit precision; every distance is accumulated in
// 64-bit.
using Dataset = RowMatrix<float>;
using VectorXd = Eigen::VectorXd;

}  // namespace bregforest
