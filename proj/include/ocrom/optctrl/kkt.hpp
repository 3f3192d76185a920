#pragma once

#include <vector>

#include "ocrom/optctrl/model.hpp"

namespace ocrom::optctrl {

struct OcpSolution {
  Vector mu;
  Vector v;      // full state velocity, lifting included
  Vector v_hom;  // v minus the lifting
  Vector p;
  Vector u;
  Vector w;      // adjoint velocity, zero on Dirichlet dofs
  Vector q;
  double J = 0.0;
  double residual = 0.0;  // relative KKT residual
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Block layout of the KKT unknown [v_f, p, u, w_f, q]; rows are ordered
/// adjoint momentum, adjoint continuity, optimality, state momentum, state
/// continuity.
struct KktLayout {
  int nf = 0, np = 0, nu = 0;
  int v() const { return 0; }
  int p() const { return nf; }
  int u() const { return nf + np; }
  int w() const { return nf + np + nu; }
  int q() const { return 2 * nf + np + nu; }
  int size() const { return 2 * (nf + np) + nu; }
};

KktLayout kkt_layout(const FullOrderModel& model);

struct KktSystem {
  SparseMatrix matrix;
  Vector rhs;
};

/// Without a linearization point: the Stokes KKT matrix and right-hand side
/// at `mu`. With one: the Newton matrix of the Navier-Stokes optimality
/// system at that point, and the right-hand side whose solution is the next
/// Newton iterate.
KktSystem assemble_kkt(const FullOrderModel& model, const Vector& mu,
                       const OcpSolution* linearization = nullptr);

/// Nonlinear KKT residual at a packed unknown (convection included when the
/// model's state equation is Navier-Stokes).
Vector kkt_residual(const FullOrderModel& model, const Vector& mu, const Vector& x);

Vector pack(const FullOrderModel& model, const OcpSolution& s);
OcpSolution unpack(const FullOrderModel& model, const Vector& mu, const Vector& x);

OcpSolution solve_stokes_ocp(const FullOrderModel& model, const Vector& mu, bool reuse_factorization = true);
OcpSolution solve_navier_stokes_ocp(const FullOrderModel& model, const Vector& mu);
/// Dispatches on the configured state equation.
OcpSolution solve_ocp(const FullOrderModel& model, const Vector& mu);

struct StateSolution {
  Vector v;
  Vector p;
};
/// Forward solve for a given control.
StateSolution solve_state(const FullOrderModel& model, const Vector& mu, const Vector& u);
/// Adjoint solve linearized at state v; returns (w, q).
StateSolution solve_adjoint(const FullOrderModel& model, const Vector& v);
/// Reduced gradient alpha N_c u + C^T w.
Vector reduced_gradient(const FullOrderModel& model, const Vector& u, const Vector& w);

}  // namespace ocrom::optctrl
