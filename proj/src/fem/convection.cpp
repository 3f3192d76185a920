#include "ocrom/fem/convection.hpp"

#include <algorithm>

#include "ocrom/errors.hpp"
#include "ocrom/fem/quadrature.hpp"

namespace ocrom::fem {

namespace {

struct Tables {
  std::vector<std::array<double, 10>> values;
  std::vector<std::array<std::array<double, 4>, 10>> derivs;
};

const Tables& tables() {
  static const Tables t = [] {
    Tables out;
    for (const auto& p : tet_rule().points) {
      out.values.push_back(p2_values(p));
      out.derivs.push_back(p2_bary_derivatives(p));
    }
    return out;
  }();
  return t;
}

// Per-element quadrature data: weights times volume, shape values, gradients.
struct ElementData {
  std::array<double, 15> w;
  std::array<std::array<Vec3, 10>, 15> grad;
};

void element_data(const mesh::Mesh& m, const std::array<int, 4>& tet, ElementData& out) {
  const auto& x = m.nodes();
  const TetGeometry g = tet_geometry(x[tet[0]], x[tet[1]], x[tet[2]], x[tet[3]]);
  const auto& rule = tet_rule();
  const auto& tab = tables();
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    out.w[q] = rule.weights[q] * g.volume;
    for (int a = 0; a < 10; ++a) {
      const auto& d = tab.derivs[q][a];
      out.grad[q][a] = d[0] * g.grad_lambda[0] + d[1] * g.grad_lambda[1] + d[2] * g.grad_lambda[2] +
                       d[3] * g.grad_lambda[3];
    }
  }
}

// Field value and gradient (row c = component, col d = derivative) at a point.
void field_at(const Vector& f, const std::array<int, 10>& nodes, const std::array<double, 10>& n,
              const std::array<Vec3, 10>& grad, Vec3& val, Eigen::Matrix3d& g) {
  val.setZero();
  g.setZero();
  for (int a = 0; a < 10; ++a) {
    const Vec3 fa(f[3 * nodes[a]], f[3 * nodes[a] + 1], f[3 * nodes[a] + 2]);
    val += n[a] * fa;
    g += fa * grad[a].transpose();
  }
}

}  // namespace

ConvectionKernel::ConvectionKernel(const FunctionSpaces& spaces)
    : mesh_(spaces.mesh), tet_nodes_(spaces.tet_nodes), n_(spaces.n_v) {
  const int ns = spaces.num_scalar_nodes();
  std::vector<std::vector<int>> adj(ns);
  for (const auto& n : tet_nodes_)
    for (int a : n)
      for (int b : n) adj[a].push_back(b);
  scalar_start_.assign(ns + 1, 0);
  for (int a = 0; a < ns; ++a) {
    std::sort(adj[a].begin(), adj[a].end());
    adj[a].erase(std::unique(adj[a].begin(), adj[a].end()), adj[a].end());
    scalar_start_[a + 1] = scalar_start_[a] + static_cast<int>(adj[a].size());
  }

  outer_.assign(3 * ns + 1, 0);
  inner_.resize(9 * static_cast<std::size_t>(scalar_start_[ns]));
  for (int b = 0; b < ns; ++b) {
    const int deg = scalar_start_[b + 1] - scalar_start_[b];
    for (int d = 0; d < 3; ++d) {
      const int start = 9 * scalar_start_[b] + 3 * d * deg;
      outer_[3 * b + d] = start;
      for (int k = 0; k < deg; ++k)
        for (int c = 0; c < 3; ++c) inner_[start + 3 * k + c] = 3 * adj[b][k] + c;
    }
  }
  outer_[3 * ns] = static_cast<int>(inner_.size());

  local_pos_.resize(tet_nodes_.size());
  for (std::size_t t = 0; t < tet_nodes_.size(); ++t) {
    const auto& n = tet_nodes_[t];
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        local_pos_[t][i][j] = static_cast<int>(
            std::lower_bound(adj[n[i]].begin(), adj[n[i]].end(), n[j]) - adj[n[i]].begin());
  }
}

void ConvectionKernel::check(const Vector& v) const {
  if (v.size() != n_) throw DimensionMismatch("convection: field length differs from velocity space");
}

SparseMatrix ConvectionKernel::fill(Kind kind, const Vector& f) const {
  check(f);
  std::vector<double> values(inner_.size(), 0.0);
  const auto& tab = tables();
  const std::size_t nq = tet_rule().weights.size();
  ElementData ed;
  double loc[10][3][10][3];  // row (a, c), column (b, d)

  for (std::size_t t = 0; t < tet_nodes_.size(); ++t) {
    const auto& nodes = tet_nodes_[t];
    element_data(*mesh_, mesh_->tets()[t], ed);
    std::fill(&loc[0][0][0][0], &loc[0][0][0][0] + 900, 0.0);
    for (std::size_t q = 0; q < nq; ++q) {
      const auto& nv = tab.values[q];
      const auto& gr = ed.grad[q];
      Vec3 val;
      Eigen::Matrix3d g;
      field_at(f, nodes, nv, gr, val, g);
      const double w = ed.w[q];
      switch (kind) {
        case Kind::e:
        case Kind::e_hat:
        case Kind::state_jac:
          for (int a = 0; a < 10; ++a) {
            const double wa = w * nv[a];
            for (int b = 0; b < 10; ++b) {
              if (kind != Kind::e_hat) {
                const double conv = wa * val.dot(gr[b]);
                for (int c = 0; c < 3; ++c) loc[a][c][b][c] += conv;
              }
              if (kind != Kind::e) {
                const double wab = wa * nv[b];
                for (int c = 0; c < 3; ++c)
                  for (int d = 0; d < 3; ++d) loc[a][c][b][d] += wab * g(c, d);
              }
            }
          }
          break;
        case Kind::e_tilde:
        case Kind::adjoint_hess:
          // row (a, c), column (b, d): N_a d_c N_b w_d
          for (int a = 0; a < 10; ++a) {
            const double wa = w * nv[a];
            for (int b = 0; b < 10; ++b)
              for (int c = 0; c < 3; ++c) {
                const double s = wa * gr[b][c];
                for (int d = 0; d < 3; ++d) loc[a][c][b][d] += s * val[d];
              }
          }
          break;
      }
    }
    const auto& pos = local_pos_[t];
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) {
            const double v = loc[a][c][b][d];
            values[outer_[3 * nodes[b] + d] + 3 * pos[b][a] + c] += v;
            if (kind == Kind::adjoint_hess) values[outer_[3 * nodes[a] + c] + 3 * pos[a][b] + d] += v;
          }
  }

  SparseMatrix m(n_, n_);
  m.resizeNonZeros(static_cast<Eigen::Index>(inner_.size()));
  std::copy(outer_.begin(), outer_.end(), m.outerIndexPtr());
  std::copy(inner_.begin(), inner_.end(), m.innerIndexPtr());
  std::copy(values.begin(), values.end(), m.valuePtr());
  return m;
}

SparseMatrix ConvectionKernel::E(const Vector& v) const { return fill(Kind::e, v); }
SparseMatrix ConvectionKernel::E_hat(const Vector& v) const { return fill(Kind::e_hat, v); }
SparseMatrix ConvectionKernel::E_tilde(const Vector& w) const { return fill(Kind::e_tilde, w); }
SparseMatrix ConvectionKernel::state_jacobian(const Vector& v) const { return fill(Kind::state_jac, v); }
SparseMatrix ConvectionKernel::adjoint_hessian(const Vector& w) const {
  return fill(Kind::adjoint_hess, w);
}

SparseMatrix ConvectionKernel::apply(const Vector& v, Direction direction) const {
  return direction == Direction::state ? E(v) : E_tilde(v);
}

Vector ConvectionKernel::convect(const Vector& u, const Vector& v) const {
  check(u);
  check(v);
  Vector out = Vector::Zero(n_);
  const auto& tab = tables();
  const std::size_t nq = tet_rule().weights.size();
  ElementData ed;
  for (std::size_t t = 0; t < tet_nodes_.size(); ++t) {
    const auto& nodes = tet_nodes_[t];
    element_data(*mesh_, mesh_->tets()[t], ed);
    for (std::size_t q = 0; q < nq; ++q) {
      Vec3 uq, vq;
      Eigen::Matrix3d gu, gv;
      field_at(u, nodes, tab.values[q], ed.grad[q], uq, gu);
      field_at(v, nodes, tab.values[q], ed.grad[q], vq, gv);
      const Vec3 conv = ed.w[q] * (gv * uq);
      for (int a = 0; a < 10; ++a)
        for (int c = 0; c < 3; ++c) out[3 * nodes[a] + c] += tab.values[q][a] * conv[c];
    }
  }
  return out;
}

Vector ConvectionKernel::adjoint_convect(const Vector& v, const Vector& w) const {
  check(v);
  check(w);
  Vector out = Vector::Zero(n_);
  const auto& tab = tables();
  const std::size_t nq = tet_rule().weights.size();
  ElementData ed;
  for (std::size_t t = 0; t < tet_nodes_.size(); ++t) {
    const auto& nodes = tet_nodes_[t];
    element_data(*mesh_, mesh_->tets()[t], ed);
    for (std::size_t q = 0; q < nq; ++q) {
      Vec3 vq, wq;
      Eigen::Matrix3d gv, gw;
      field_at(v, nodes, tab.values[q], ed.grad[q], vq, gv);
      field_at(w, nodes, tab.values[q], ed.grad[q], wq, gw);
      // e(phi_j, v, w) for phi_j = N_b e_d: N_b (d_d v) . w
      const Vec3 first = ed.w[q] * (gv.transpose() * wq);
      for (int b = 0; b < 10; ++b) {
        // e(v, phi_j, w): (v . grad N_b) w_d
        const double s = ed.w[q] * vq.dot(ed.grad[q][b]);
        for (int d = 0; d < 3; ++d) out[3 * nodes[b] + d] += tab.values[q][b] * first[d] + s * wq[d];
      }
    }
  }
  return out;
}

double ConvectionKernel::trilinear(const Vector& u, const Vector& v, const Vector& w) const {
  return convect(u, v).dot(w);
}

}  // namespace ocrom::fem
