#pragma once

#include <array>
#include <vector>

#include "ocrom/rom/pod.hpp"

namespace ocrom::rom {

/// Aggregated bases. Velocity Y = [Z | l]: Z spans state modes, state
/// supremizers, adjoint modes and adjoint supremizers; l holds the liftings
/// orthonormalized against Z, so the Dirichlet data enters through
/// theta(mu) = l^T X_v L mu.
struct ReducedBasis {
  int n = 0;  // requested number of modes per field
  int m = 0;  // columns of Z
  int num_liftings = 0;
  DenseMatrix Y;        // n_v x (m + L)
  DenseMatrix P;        // pressure, n_p x np
  DenseMatrix U;        // control, n_u x nu
  DenseMatrix liftings; // raw lifting fields, n_v x L
  DenseMatrix theta;    // L x L, lifting coefficients = theta * mu

  int velocity_dim() const { return static_cast<int>(Y.cols()); }
  int pressure_dim() const { return static_cast<int>(P.cols()); }
  int control_dim() const { return static_cast<int>(U.cols()); }
  /// Unknowns of the reduced KKT system.
  int unknowns() const { return 2 * m + 2 * pressure_dim() + control_dim(); }
  /// Reduced basis count including lifting columns.
  int dimension() const { return unknowns() + num_liftings; }
};

ReducedBasis build_reduced_basis(const optctrl::FullOrderModel& model, const PodBasis& pod, int n,
                                 bool with_supremizers = true);

/// Projected operators. Matrices with a velocity index use all of Y; the
/// convection tensor has tensor[i](j, k) = e(Y_j, Y_k, Y_i).
struct ReducedOperators {
  DenseMatrix M, A, X;  // D x D
  DenseMatrix B;        // np x D
  DenseMatrix C;        // D x nu
  DenseMatrix N;        // nu x nu
  Vector m_o;           // Y^T M v_o
  Vector f;             // Y^T f
  double c_o = 0.0;     // v_o^T M v_o
  /// M-orthogonal split of the target: v_o = Y t + r with Y^T M r = 0 and
  /// rho = r^T M r, so the tracking term is (nu - t)^T M (nu - t) + rho.
  Vector target_coeffs;
  double target_residual = 0.0;
  std::vector<DenseMatrix> tensor;
};

ReducedOperators project_operators(const optctrl::FullOrderModel& model, const ReducedBasis& basis,
                                   bool with_tensor);

struct ReducedModel {
  ReducedBasis basis;
  ReducedOperators ops;
  double alpha = 1e-2;
  optctrl::StateEquation equation = optctrl::StateEquation::stokes;
  optctrl::NewtonSettings newton{1e-12, 1e-13, 25};
  std::vector<std::array<double, 2>> domain;

  void check_parameter(const Vector& mu) const;
};

ReducedModel build_reduced_model(const optctrl::FullOrderModel& model, const PodBasis& pod, int n,
                                 bool with_supremizers = true);

enum class ConvectionMode { tensor, reassemble };

struct ReducedSolution {
  Vector mu;
  Vector nu;  // velocity coefficients on Y, lifting part included
  Vector a, p, d, b, q;
  double J = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Packed unknown [a, p, d, b, q].
Vector pack(const ReducedModel& rm, const ReducedSolution& s);
ReducedSolution unpack(const ReducedModel& rm, const Vector& mu, const Vector& z);

/// Reduced residual and Jacobian at packed unknown z. Reassembly mode needs
/// the full-order model that produced the basis.
Vector reduced_residual(const ReducedModel& rm, const Vector& mu, const Vector& z,
                        ConvectionMode mode = ConvectionMode::tensor,
                        const optctrl::FullOrderModel* full = nullptr, bool with_convection = true);
DenseMatrix reduced_jacobian(const ReducedModel& rm, const Vector& mu, const Vector& z,
                             ConvectionMode mode = ConvectionMode::tensor,
                             const optctrl::FullOrderModel* full = nullptr);

ReducedSolution solve_reduced(const ReducedModel& rm, const Vector& mu,
                              ConvectionMode mode = ConvectionMode::tensor,
                              const optctrl::FullOrderModel* full = nullptr);

double reduced_objective(const ReducedModel& rm, const ReducedSolution& s);

/// Full-order fields of a reduced solution.
optctrl::OcpSolution reconstruct(const ReducedModel& rm, const ReducedSolution& s);

/// sqrt of the smallest eigenvalue of B_Z B_Z^T with B_Z = P^T B Z; zero when
/// the pressure space is larger than the velocity space.
double reduced_inf_sup(const ReducedBasis& basis, const fem::OperatorSet& ops);

}  // namespace ocrom::rom
