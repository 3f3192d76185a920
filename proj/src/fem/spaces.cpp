#include "ocrom/fem/spaces.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Dense>

#include "ocrom/errors.hpp"

namespace ocrom::fem {

std::array<double, 10> p2_values(const std::array<double, 4>& l) {
  std::array<double, 10> n{};
  for (int i = 0; i < 4; ++i) n[i] = l[i] * (2.0 * l[i] - 1.0);
  for (int e = 0; e < 6; ++e) n[4 + e] = 4.0 * l[kTetEdges[e][0]] * l[kTetEdges[e][1]];
  return n;
}

std::array<double, 6> p2_tri_values(const std::array<double, 3>& l) {
  std::array<double, 6> n{};
  for (int i = 0; i < 3; ++i) n[i] = l[i] * (2.0 * l[i] - 1.0);
  for (int e = 0; e < 3; ++e) n[3 + e] = 4.0 * l[kTriEdges[e][0]] * l[kTriEdges[e][1]];
  return n;
}

std::array<std::array<double, 4>, 10> p2_bary_derivatives(const std::array<double, 4>& l) {
  std::array<std::array<double, 4>, 10> d{};
  for (int i = 0; i < 4; ++i) d[i][i] = 4.0 * l[i] - 1.0;
  for (int e = 0; e < 6; ++e) {
    const int i = kTetEdges[e][0], j = kTetEdges[e][1];
    d[4 + e][i] = 4.0 * l[j];
    d[4 + e][j] = 4.0 * l[i];
  }
  return d;
}

TetGeometry tet_geometry(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3) {
  Eigen::Matrix3d j;
  j.col(0) = x1 - x0;
  j.col(1) = x2 - x0;
  j.col(2) = x3 - x0;
  const Eigen::Matrix3d inv = j.inverse();
  TetGeometry g;
  g.volume = std::abs(j.determinant()) / 6.0;
  for (int i = 0; i < 3; ++i) g.grad_lambda[i + 1] = inv.row(i).transpose();
  g.grad_lambda[0] = -(g.grad_lambda[1] + g.grad_lambda[2] + g.grad_lambda[3]);
  return g;
}

int FunctionSpaces::edge_index(int a, int b) const {
  const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || *it != key) throw InvariantViolation("edge not in mesh");
  return num_vertices + static_cast<int>(it - edges.begin());
}

FunctionSpaces build_spaces(const mesh::Mesh& m) {
  return build_spaces(std::make_shared<const mesh::Mesh>(m));
}

FunctionSpaces build_spaces(std::shared_ptr<const mesh::Mesh> mp) {
  const mesh::Mesh& m = *mp;
  FunctionSpaces s;
  s.mesh = mp;
  s.num_vertices = static_cast<int>(m.num_nodes());

  for (const auto& tet : m.tets())
    for (const auto& e : kTetEdges)
      s.edges.push_back({std::min(tet[e[0]], tet[e[1]]), std::max(tet[e[0]], tet[e[1]])});
  std::sort(s.edges.begin(), s.edges.end());
  s.edges.erase(std::unique(s.edges.begin(), s.edges.end()), s.edges.end());

  s.node_coords = m.nodes();
  for (const auto& e : s.edges) s.node_coords.push_back(0.5 * (m.nodes()[e[0]] + m.nodes()[e[1]]));

  s.tet_nodes.reserve(m.num_tets());
  for (const auto& tet : m.tets()) {
    std::array<int, 10> n{};
    for (int i = 0; i < 4; ++i) n[i] = tet[i];
    for (int e = 0; e < 6; ++e) n[4 + e] = s.edge_index(tet[kTetEdges[e][0]], tet[kTetEdges[e][1]]);
    s.tet_nodes.push_back(n);
  }
  for (const auto& tri : m.boundary()) {
    std::array<int, 6> n{};
    for (int i = 0; i < 3; ++i) n[i] = tri.nodes[i];
    for (int e = 0; e < 3; ++e)
      n[3 + e] = s.edge_index(tri.nodes[kTriEdges[e][0]], tri.nodes[kTriEdges[e][1]]);
    s.tri_nodes.push_back(n);
  }

  const int ns = s.num_scalar_nodes();
  s.n_v = 3 * ns;
  s.n_p = s.num_vertices;

  std::map<int, std::set<int>> nodes_by_tag;
  for (std::size_t b = 0; b < m.boundary().size(); ++b)
    for (int n : s.tri_nodes[b]) nodes_by_tag[m.boundary()[b].tag].insert(n);
  for (const auto& [tag, nodes] : nodes_by_tag) {
    auto& dofs = s.dofs_by_tag[tag];
    for (int n : nodes)
      for (int c = 0; c < 3; ++c) dofs.push_back(3 * n + c);
  }

  std::vector<char> is_dirichlet(s.n_v, 0);
  const std::set<int> empty;
  const auto& wall = nodes_by_tag.count(mesh::kWallTag) ? nodes_by_tag[mesh::kWallTag] : empty;
  for (const auto& [tag, nodes] : nodes_by_tag) {
    if (mesh::is_outlet(tag)) continue;
    for (int n : nodes) {
      for (int c = 0; c < 3; ++c) is_dirichlet[3 * n + c] = 1;
      if (mesh::is_inlet(tag) && !wall.count(n))
        for (int c = 0; c < 3; ++c) s.inlet_dofs[tag].push_back(3 * n + c);
    }
  }
  std::vector<int> free;
  for (int d = 0; d < s.n_v; ++d) (is_dirichlet[d] ? s.dirichlet_dofs : free).push_back(d);
  s.free = numerics::IndexSelection(s.n_v, std::move(free));

  std::set<int> control;
  for (const auto& [tag, nodes] : nodes_by_tag)
    if (mesh::is_outlet(tag)) control.insert(nodes.begin(), nodes.end());
  s.control_nodes.assign(control.begin(), control.end());
  s.node_to_control.assign(ns, -1);
  for (std::size_t i = 0; i < s.control_nodes.size(); ++i) {
    s.node_to_control[s.control_nodes[i]] = static_cast<int>(i);
    for (int c = 0; c < 3; ++c) s.control_to_velocity.push_back(3 * s.control_nodes[i] + c);
  }
  s.n_u = static_cast<int>(s.control_to_velocity.size());
  return s;
}

}  // namespace ocrom::fem
