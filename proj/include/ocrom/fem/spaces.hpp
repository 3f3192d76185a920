#pragma once

#include <array>
#include <map>
#include <memory>
#include <vector>

#include "ocrom/mesh/mesh.hpp"
#include "ocrom/numerics/linear_solvers.hpp"

namespace ocrom::fem {

using mesh::Vec3;

// Local P2 node order on a tet: vertices 0..3, then edges
// (0,1) (0,2) (0,3) (1,2) (1,3) (2,3). On a triangle: vertices 0..2, then
// edges (0,1) (0,2) (1,2).
inline constexpr std::array<std::array<int, 2>, 6> kTetEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 2>, 3> kTriEdges{{{0, 1}, {0, 2}, {1, 2}}};

/// P2 shape values at barycentric point `l`.
std::array<double, 10> p2_values(const std::array<double, 4>& l);
std::array<double, 6> p2_tri_values(const std::array<double, 3>& l);
/// d N_a / d lambda_i at barycentric point `l`.
std::array<std::array<double, 4>, 10> p2_bary_derivatives(const std::array<double, 4>& l);

struct TetGeometry {
  double volume;
  std::array<Vec3, 4> grad_lambda;
};
TetGeometry tet_geometry(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3);

/// Taylor-Hood P2-P1 spaces. Scalar P2 nodes are the mesh vertices followed by
/// the edges sorted by (min id, max id); velocity dof = 3 * node + component.
/// Pressure dofs are the vertices. The control space is the vector P2 trace on
/// outlet triangles, numbered by sorted scalar node.
struct FunctionSpaces {
  std::shared_ptr<const mesh::Mesh> mesh;

  int num_vertices = 0;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 10>> tet_nodes;
  std::vector<std::array<int, 6>> tri_nodes;  // per mesh boundary triangle
  std::vector<Vec3> node_coords;

  int n_v = 0, n_p = 0, n_u = 0;

  /// Velocity dofs on the faces of each tag (all tags, including outlets).
  std::map<int, std::vector<int>> dofs_by_tag;
  /// Wall and inlet velocity dofs; wall takes precedence at shared rims.
  std::vector<int> dirichlet_dofs;
  std::map<int, std::vector<int>> inlet_dofs;  // inlet tag -> dofs not on the wall
  numerics::IndexSelection free;

  std::vector<int> control_nodes;            // scalar P2 nodes on outlets, sorted
  std::vector<int> control_to_velocity;      // control dof -> velocity dof
  std::vector<int> node_to_control;          // scalar node -> control node index or -1

  int num_scalar_nodes() const { return static_cast<int>(node_coords.size()); }
  int edge_index(int a, int b) const;
};

FunctionSpaces build_spaces(const mesh::Mesh& mesh);
FunctionSpaces build_spaces(std::shared_ptr<const mesh::Mesh> mesh);

}  // namespace ocrom::fem
