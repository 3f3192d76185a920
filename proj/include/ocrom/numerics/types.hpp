#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ocrom::numerics {

using Scalar = double;
using Index = Eigen::Index;

/// Compressed column storage; duplicates are summed at finalization.
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<Scalar, int>;
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

}  // namespace ocrom::numerics
