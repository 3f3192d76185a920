#pragma once

#include <array>
#include <memory>
#include <random>

#include "ocrom/fem/quadrature.hpp"
#include "ocrom/fem/spaces.hpp"
#include "ocrom/mesh/generators.hpp"
#include "ocrom/optctrl/kkt.hpp"

namespace fixtures {

using namespace ocrom;
using numerics::DenseMatrix;
using numerics::SparseMatrix;
using numerics::Vector;

inline std::shared_ptr<const mesh::Mesh> tube(double h = 0.5, double length = 3.0) {
  return std::make_shared<const mesh::Mesh>(mesh::generate_tube(mesh::straight_tube_spec(1.0, length, h)));
}

inline const std::shared_ptr<const mesh::Mesh>& small_tube() {
  static const auto m = tube();
  return m;
}

inline std::shared_ptr<optctrl::FullOrderModel> model(std::shared_ptr<const mesh::Mesh> m,
                                                      optctrl::StateEquation eq,
                                                      std::vector<std::array<double, 2>> domain = {}) {
  optctrl::OcpConfig cfg;
  cfg.equation = eq;
  cfg.domain = std::move(domain);
  return std::make_shared<optctrl::FullOrderModel>(std::move(m), cfg);
}

inline const optctrl::FullOrderModel& stokes_tube() {
  static const auto m = model(small_tube(), optctrl::StateEquation::stokes);
  return *m;
}

inline const optctrl::FullOrderModel& ns_tube() {
  static const auto m = model(small_tube(), optctrl::StateEquation::navier_stokes);
  return *m;
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline Vector mu1(double x) { return Vector::Constant(1, x); }

// Independent P2 basis on a tet: vertex functions l(2l - 1), edge functions
// 4 l_a l_b, written out from barycentric coordinates.
struct P2Eval {
  std::array<double, 10> value;
  std::array<mesh::Vec3, 10> grad;
};

inline P2Eval p2_eval(const std::array<double, 4>& l, const std::array<mesh::Vec3, 4>& gl) {
  static constexpr int e[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  P2Eval r;
  for (int a = 0; a < 4; ++a) {
    r.value[a] = l[a] * (2.0 * l[a] - 1.0);
    r.grad[a] = (4.0 * l[a] - 1.0) * gl[a];
  }
  for (int k = 0; k < 6; ++k) {
    const int a = e[k][0], b = e[k][1];
    r.value[4 + k] = 4.0 * l[a] * l[b];
    r.grad[4 + k] = 4.0 * (l[b] * gl[a] + l[a] * gl[b]);
  }
  return r;
}

inline std::array<mesh::Vec3, 4> bary_gradients(const std::array<mesh::Vec3, 4>& x, double& volume) {
  Eigen::Matrix3d j;
  j.col(0) = x[1] - x[0];
  j.col(1) = x[2] - x[0];
  j.col(2) = x[3] - x[0];
  volume = std::abs(j.determinant()) / 6.0;
  const Eigen::Matrix3d inv = j.inverse();
  std::array<mesh::Vec3, 4> g;
  for (int k = 0; k < 3; ++k) g[k + 1] = inv.row(k).transpose();
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

// Velocity value and gradient (row i = grad of component i) at barycentric l.
inline void velocity_at(const fem::FunctionSpaces& sp, std::size_t tet, const std::array<double, 4>& l,
                        const Vector& v, mesh::Vec3& val, Eigen::Matrix3d& grad, double* volume = nullptr) {
  const auto& t = sp.mesh->tets()[tet];
  std::array<mesh::Vec3, 4> x;
  for (int a = 0; a < 4; ++a) x[a] = sp.mesh->nodes()[t[a]];
  double vol;
  const auto gl = bary_gradients(x, vol);
  if (volume) *volume = vol;
  const auto b = p2_eval(l, gl);
  val.setZero();
  grad.setZero();
  for (int a = 0; a < 10; ++a) {
    const int node = sp.tet_nodes[tet][a];
    for (int c = 0; c < 3; ++c) {
      val[c] += v[3 * node + c] * b.value[a];
      grad.row(c) += v[3 * node + c] * b.grad[a].transpose();
    }
  }
}

// Direct quadrature of e(u, v, w) = int ((u . grad) v) . w with an
// independent P2 basis.
inline double direct_trilinear(const fem::FunctionSpaces& sp, const Vector& u, const Vector& v, const Vector& w) {
  const auto& rule = fem::tet_rule();
  double sum = 0.0;
  for (std::size_t t = 0; t < sp.mesh->num_tets(); ++t)
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      mesh::Vec3 uv, vv, wv;
      Eigen::Matrix3d ug, vg, wg;
      double vol;
      fixtures::velocity_at(sp, t, rule.points[q], u, uv, ug, &vol);
      fixtures::velocity_at(sp, t, rule.points[q], v, vv, vg);
      fixtures::velocity_at(sp, t, rule.points[q], w, wv, wg);
      sum += vol * rule.weights[q] * (vg * uv).dot(wv);
    }
  return sum;
}

}  // namespace fixtures
