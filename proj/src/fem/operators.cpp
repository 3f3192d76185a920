#include "ocrom/fem/operators.hpp"

#include <Eigen/Eigenvalues>

#include "ocrom/errors.hpp"
#include "ocrom/fem/quadrature.hpp"

namespace ocrom::fem {

using numerics::Triplet;

namespace {

struct TetTables {
  std::vector<std::array<double, 10>> values;
  std::vector<std::array<std::array<double, 4>, 10>> derivs;
};

const TetTables& tables() {
  static const TetTables t = [] {
    TetTables out;
    for (const auto& p : tet_rule().points) {
      out.values.push_back(p2_values(p));
      out.derivs.push_back(p2_bary_derivatives(p));
    }
    return out;
  }();
  return t;
}

std::array<Vec3, 10> gradients(const TetGeometry& g, const std::array<std::array<double, 4>, 10>& d) {
  std::array<Vec3, 10> out;
  for (int a = 0; a < 10; ++a)
    out[a] = d[a][0] * g.grad_lambda[0] + d[a][1] * g.grad_lambda[1] + d[a][2] * g.grad_lambda[2] +
             d[a][3] * g.grad_lambda[3];
  return out;
}

TetGeometry geometry(const FunctionSpaces& s, std::size_t t) {
  const auto& tet = s.mesh->tets()[t];
  const auto& x = s.mesh->nodes();
  return tet_geometry(x[tet[0]], x[tet[1]], x[tet[2]], x[tet[3]]);
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SparseMatrix assemble_outlet_mass(const FunctionSpaces& s) {
  const auto& rule = tri_rule();
  std::vector<std::array<double, 6>> vals;
  for (const auto& p : rule.points) vals.push_back(p2_tri_values(p));
  std::vector<Triplet> trip;
  const auto& btris = s.mesh->boundary();
  const auto& x = s.mesh->nodes();
  for (std::size_t b = 0; b < btris.size(); ++b) {
    if (!mesh::is_outlet(btris[b].tag)) continue;
    const auto& v = btris[b].nodes;
    const double area = 0.5 * (x[v[1]] - x[v[0]]).cross(x[v[2]] - x[v[0]]).norm();
    const auto& nodes = s.tri_nodes[b];
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        double m = 0.0;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) m += rule.weights[q] * vals[q][i] * vals[q][j];
        m *= area;
        const int ci = s.node_to_control[nodes[i]], cj = s.node_to_control[nodes[j]];
        for (int c = 0; c < 3; ++c) trip.emplace_back(3 * ci + c, 3 * cj + c, m);
      }
  }
  return from_triplets(s.n_u, s.n_u, trip);
}

}  // namespace

SparseMatrix assemble_scalar_stiffness(const FunctionSpaces& s) {
  const auto& rule = tet_rule();
  const auto& tab = tables();
  std::vector<Triplet> trip;
  trip.reserve(s.tet_nodes.size() * 100);
  for (std::size_t t = 0; t < s.tet_nodes.size(); ++t) {
    const TetGeometry g = geometry(s, t);
    double k[10][10] = {};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto grad = gradients(g, tab.derivs[q]);
      const double w = rule.weights[q] * g.volume;
      for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) k[a][b] += w * grad[a].dot(grad[b]);
    }
    const auto& n = s.tet_nodes[t];
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) trip.emplace_back(n[a], n[b], k[a][b]);
  }
  return from_triplets(s.num_scalar_nodes(), s.num_scalar_nodes(), trip);
}

SparseMatrix assemble_scalar_mass(const FunctionSpaces& s) {
  const auto& rule = tet_rule();
  const auto& tab = tables();
  std::vector<Triplet> trip;
  trip.reserve(s.tet_nodes.size() * 100);
  for (std::size_t t = 0; t < s.tet_nodes.size(); ++t) {
    const double vol = geometry(s, t).volume;
    double m[10][10] = {};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = rule.weights[q] * vol;
      for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) m[a][b] += w * tab.values[q][a] * tab.values[q][b];
    }
    const auto& n = s.tet_nodes[t];
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) trip.emplace_back(n[a], n[b], m[a][b]);
  }
  return from_triplets(s.num_scalar_nodes(), s.num_scalar_nodes(), trip);
}

SparseMatrix expand_vector(const SparseMatrix& scalar) {
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(scalar.nonZeros()) * 3);
  for (int j = 0; j < scalar.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(scalar, j); it; ++it)
      for (int c = 0; c < 3; ++c) trip.emplace_back(3 * it.row() + c, 3 * it.col() + c, it.value());
  return from_triplets(3 * scalar.rows(), 3 * scalar.cols(), trip);
}

OperatorSet assemble_operators(const FunctionSpaces& s, double viscosity) {
  if (!(viscosity > 0.0)) throw ConfigError("viscosity must be positive");
  OperatorSet ops;
  ops.viscosity = viscosity;
  ops.K = expand_vector(assemble_scalar_stiffness(s));
  ops.M = expand_vector(assemble_scalar_mass(s));
  ops.A = viscosity * ops.K;
  ops.X_v = ops.K + ops.M;

  const auto& rule = tet_rule();
  const auto& tab = tables();
  std::vector<Triplet> bt, pt;
  bt.reserve(s.tet_nodes.size() * 120);
  pt.reserve(s.tet_nodes.size() * 16);
  for (std::size_t t = 0; t < s.tet_nodes.size(); ++t) {
    const TetGeometry g = geometry(s, t);
    double b[4][10][3] = {};
    double p[4][4] = {};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto grad = gradients(g, tab.derivs[q]);
      const auto& l = rule.points[q];
      const double w = rule.weights[q] * g.volume;
      for (int k = 0; k < 4; ++k) {
        for (int a = 0; a < 10; ++a)
          for (int c = 0; c < 3; ++c) b[k][a][c] -= w * l[k] * grad[a][c];
        for (int m = 0; m < 4; ++m) p[k][m] += w * l[k] * l[m];
      }
    }
    const auto& n = s.tet_nodes[t];
    for (int k = 0; k < 4; ++k) {
      for (int a = 0; a < 10; ++a)
        for (int c = 0; c < 3; ++c) bt.emplace_back(n[k], 3 * n[a] + c, b[k][a][c]);
      for (int m = 0; m < 4; ++m) pt.emplace_back(n[k], n[m], p[k][m]);
    }
  }
  ops.B = from_triplets(s.n_p, s.n_v, bt);
  ops.X_p = from_triplets(s.n_p, s.n_p, pt);

  ops.N_c = assemble_outlet_mass(s);
  std::vector<Triplet> ct;
  for (int j = 0; j < ops.N_c.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(ops.N_c, j); it; ++it)
      ct.emplace_back(s.control_to_velocity[it.row()], static_cast<int>(it.col()), -it.value());
  ops.C = from_triplets(s.n_v, s.n_u, ct);
  return ops;
}

double inf_sup_constant(const SparseMatrix& B, const SparseMatrix& X_v, const SparseMatrix& X_p,
                        const numerics::IndexSelection& free) {
  const SparseMatrix bf = numerics::submatrix(B, nullptr, &free);
  const SparseMatrix xff = numerics::submatrix(X_v, &free, &free);
  numerics::SpdSolver xs(xff);
  const numerics::DenseMatrix y = xs.solve(numerics::DenseMatrix(bf.transpose()));
  numerics::DenseMatrix schur = bf * y;
  schur = 0.5 * (schur + schur.transpose()).eval();
  const numerics::DenseMatrix xp = numerics::DenseMatrix(X_p);

  Eigen::GeneralizedSelfAdjointEigenSolver<numerics::DenseMatrix> eig(schur, xp);
  if (eig.info() != Eigen::Success) throw SolverFailure("inf-sup eigenproblem failed");

  const numerics::Vector ones = numerics::Vector::Ones(B.rows());
  const double bt1 = (bf.transpose() * ones).norm();
  const double scale = std::sqrt(bf.squaredNorm()) * std::sqrt(static_cast<double>(B.rows()));
  Eigen::Index skip = -1;
  if (bt1 <= 1e-10 * scale) {
    const numerics::Vector xp1 = xp * ones;
    double best = -1.0;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
      const double c = std::abs(eig.eigenvectors().col(k).dot(xp1));
      if (c > best) {
        best = c;
        skip = k;
      }
    }
  }
  double lmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
    if (k != skip) lmin = std::min(lmin, eig.eigenvalues()[k]);
  return std::sqrt(std::max(lmin, 0.0));
}

double lbb_constant(const OperatorSet& ops, const FunctionSpaces& spaces) {
  return inf_sup_constant(ops.B, ops.X_v, ops.X_p, spaces.free);
}

}  // namespace ocrom::fem
