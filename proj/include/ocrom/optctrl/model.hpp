#pragma once

#include <array>
#include <memory>
#include <vector>

#include "ocrom/fem/convection.hpp"
#include "ocrom/fem/operators.hpp"
#include "ocrom/fem/spaces.hpp"
#include "ocrom/mesh/mesh.hpp"
#include "ocrom/numerics/linear_solvers.hpp"

namespace ocrom::optctrl {

using numerics::SparseMatrix;
using numerics::Vector;

enum class StateEquation { stokes, navier_stokes };

struct NewtonSettings {
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;
  int max_iter = 25;
};

struct OcpConfig {
  double viscosity = 3.6;   // mm^2/s
  double v_const = 350.0;   // mm/s
  double alpha = 1e-2;
  StateEquation equation = StateEquation::stokes;
  /// Inlet tags driven by each parameter. Empty: one parameter per inlet tag.
  std::vector<std::vector<int>> inlet_groups;
  /// Reynolds interval per parameter. Empty: [70, 80] for every parameter.
  std::vector<std::array<double, 2>> domain;
  mesh::Vec3 body_force = mesh::Vec3::Zero();
  NewtonSettings newton;

  void validate() const;
};

/// Target velocity: v_const (1 - r^2/R^2) t_c at every velocity node, with the
/// parabola clamped at zero outside the vessel radius.
Vector build_target(const mesh::Mesh& mesh, const fem::FunctionSpaces& spaces, double v_const);

/// Parabolic inflow -(eta Re / R_in)(1 - r^2/R_in^2) n_in on the non-wall
/// velocity dofs of `tag`; zero elsewhere. R_in is the centerline radius at
/// the inlet center and n_in the outward unit normal of the inlet.
Vector build_inflow(const mesh::Mesh& mesh, const fem::FunctionSpaces& spaces, int tag, double re,
                    double viscosity);

double evaluate_objective(const Vector& v, const Vector& u, const Vector& target,
                          const fem::OperatorSet& ops, double alpha);

/// Everything parameter independent for one geometry: spaces, operators,
/// liftings and target.
class FullOrderModel {
 public:
  FullOrderModel(std::shared_ptr<const mesh::Mesh> mesh, OcpConfig config);
  FullOrderModel(const mesh::Mesh& mesh, OcpConfig config);

  const mesh::Mesh& mesh() const { return *mesh_; }
  const OcpConfig& config() const { return config_; }
  const fem::FunctionSpaces& spaces() const { return spaces_; }
  const fem::OperatorSet& operators() const { return ops_; }
  const fem::ConvectionKernel& convection() const;

  int num_parameters() const { return static_cast<int>(config_.inlet_groups.size()); }
  /// Lifting for parameter i at unit Reynolds number: Stokes flow with the
  /// parabolic inflow on that parameter's inlets and natural outflow.
  const std::vector<Vector>& liftings() const { return liftings_; }
  Vector lifting(const Vector& mu) const;

  const Vector& target() const { return target_; }
  void set_target(Vector target);
  /// Load vector of the body force.
  const Vector& forcing() const { return forcing_; }

  void check_parameter(const Vector& mu) const;

  /// Wall-clock seconds spent assembling the FE operators.
  double assembly_seconds() const { return assembly_seconds_; }

  /// Cached factorization of the (parameter independent) Stokes KKT matrix.
  const numerics::SparseLu& stokes_kkt_factorization() const;
  const SparseMatrix& stokes_kkt_matrix() const;
  void clear_cache() const;

 private:
  std::shared_ptr<const mesh::Mesh> mesh_;
  OcpConfig config_;
  fem::FunctionSpaces spaces_;
  fem::OperatorSet ops_;
  double assembly_seconds_ = 0.0;
  std::vector<Vector> liftings_;
  Vector target_;
  Vector forcing_;
  mutable std::shared_ptr<fem::ConvectionKernel> convection_;
  mutable std::shared_ptr<SparseMatrix> stokes_kkt_;
  mutable std::shared_ptr<numerics::SparseLu> stokes_lu_;
};

}  // namespace ocrom::optctrl
