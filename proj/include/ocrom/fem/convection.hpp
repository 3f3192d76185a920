#pragma once

#include <memory>
#include <vector>

#include "ocrom/fem/spaces.hpp"
#include "ocrom/numerics/types.hpp"

namespace ocrom::fem {

using numerics::SparseMatrix;
using numerics::Vector;

/// Trilinear convection form e(u, v, w) = int ((u . grad) v) . w on the P2
/// velocity space, with the matrices it induces:
///
///   E(v)_ij     = sum_k v_k e(phi_k, phi_j, phi_i)
///   E_hat(v)_ij = sum_k v_k e(phi_j, phi_k, phi_i)
///   E_tilde(w)_jk = sum_i w_i e(phi_j, phi_k, phi_i)
///
/// Matrices share one sparsity pattern (all component pairs of the P2 node
/// graph) and are filled in place element by element.
class ConvectionKernel {
 public:
  enum class Direction { state, adjoint };

  explicit ConvectionKernel(const FunctionSpaces& spaces);

  SparseMatrix E(const Vector& v) const;
  SparseMatrix E_hat(const Vector& v) const;
  SparseMatrix E_tilde(const Vector& w) const;
  /// E(v) for the state direction, E_tilde(v) for the adjoint direction.
  SparseMatrix apply(const Vector& v, Direction direction) const;

  /// Derivative of E(v) v: E(v) + E_hat(v).
  SparseMatrix state_jacobian(const Vector& v) const;
  /// Derivative of the adjoint convection term: E_tilde(w) + E_tilde(w)^T.
  SparseMatrix adjoint_hessian(const Vector& w) const;

  /// Vector with entries e(u, v, phi_i).
  Vector convect(const Vector& u, const Vector& v) const;
  /// Vector with entries e(phi_j, v, w) + e(v, phi_j, w).
  Vector adjoint_convect(const Vector& v, const Vector& w) const;
  double trilinear(const Vector& u, const Vector& v, const Vector& w) const;

  Eigen::Index size() const { return n_; }

 private:
  enum class Kind { e, e_hat, e_tilde, state_jac, adjoint_hess };
  SparseMatrix fill(Kind kind, const Vector& field) const;
  void check(const Vector& v) const;

  std::shared_ptr<const mesh::Mesh> mesh_;
  std::vector<std::array<int, 10>> tet_nodes_;
  Eigen::Index n_ = 0;
  std::vector<int> outer_;            // CSC column starts of the vector pattern
  std::vector<int> inner_;            // CSC row indices
  std::vector<int> scalar_start_;     // scalar adjacency row starts
  std::vector<std::array<std::array<int, 10>, 10>> local_pos_;  // pos of node b in row of node a
};

}  // namespace ocrom::fem
