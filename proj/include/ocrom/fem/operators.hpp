#pragma once

#include "ocrom/fem/spaces.hpp"
#include "ocrom/numerics/types.hpp"

namespace ocrom::fem {

using numerics::SparseMatrix;

/// Parameter-independent discrete operators on the full (unreduced) spaces.
struct OperatorSet {
  double viscosity = 0.0;
  SparseMatrix A;    // eta * int grad v : grad w                      (n_v x n_v)
  SparseMatrix B;    // -int q div v                                   (n_p x n_v)
  SparseMatrix C;    // -int_{outlets} u . w                            (n_v x n_u)
  SparseMatrix M;    // int v . w                                       (n_v x n_v)
  SparseMatrix N_c;  // int_{outlets} u . w                             (n_u x n_u)
  SparseMatrix K;    // int grad v : grad w                             (n_v x n_v)
  SparseMatrix X_v;  // H1 inner product K + M                          (n_v x n_v)
  SparseMatrix X_p;  // L2 pressure mass                                (n_p x n_p)
};

OperatorSet assemble_operators(const FunctionSpaces& spaces, double viscosity);

/// Scalar P2 matrices (one row per scalar node).
SparseMatrix assemble_scalar_stiffness(const FunctionSpaces& spaces);
SparseMatrix assemble_scalar_mass(const FunctionSpaces& spaces);
/// Copies a scalar matrix onto each of the three interleaved components.
SparseMatrix expand_vector(const SparseMatrix& scalar);

/// Discrete inf-sup constant: sqrt of the smallest eigenvalue of
/// B_f X_ff^{-1} B_f^T q = beta^2 X_p q over the free velocity dofs. The
/// constant pressure is removed when it lies in the kernel of B_f^T.
double inf_sup_constant(const SparseMatrix& B, const SparseMatrix& X_v, const SparseMatrix& X_p,
                        const numerics::IndexSelection& free);
double lbb_constant(const OperatorSet& ops, const FunctionSpaces& spaces);

}  // namespace ocrom::fem
