#pragma once

#include "ocrom/numerics/types.hpp"

namespace ocrom::numerics {

struct EigenDecomposition {
  Vector eigenvalues;        // descending
  DenseMatrix eigenvectors;  // column k pairs with eigenvalues[k]
};

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
///
/// Eigenvalues are returned in descending order. Each eigenvector is
/// normalised and its first component with magnitude above 1e-12 is made
/// positive, so repeated runs produce identical bases. Ties keep the order in
/// which the sweep leaves them (stable sort).
///
/// Throws NotSymmetric when max|C - C^T| exceeds 1e-12 max|C|, and
/// ConvergenceFailure when off-diagonal mass survives `max_sweeps`.
EigenDecomposition symmetric_eig(const DenseMatrix& c, int max_sweeps = 100);

}  // namespace ocrom::numerics
