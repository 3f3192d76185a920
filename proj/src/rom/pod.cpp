#include "ocrom/rom/pod.hpp"

#include <random>

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "ocrom/errors.hpp"
#include "ocrom/numerics/linear_solvers.hpp"

namespace ocrom::rom {

TrainingSet random_training_set(const std::vector<std::array<double, 2>>& domain, int count,
                                std::uint64_t seed) {
  if (count < 1) throw ConfigError("training set needs at least one point");
  TrainingSet t;
  t.sampling = TrainingSet::Sampling::random;
  t.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    Vector mu(static_cast<Eigen::Index>(domain.size()));
    for (std::size_t d = 0; d < domain.size(); ++d)
      mu[static_cast<Eigen::Index>(d)] = domain[d][0] + unit(rng) * (domain[d][1] - domain[d][0]);
    t.points.push_back(mu);
  }
  return t;
}

TrainingSet grid_training_set(const std::vector<std::array<double, 2>>& domain, int per_dim) {
  if (per_dim < 1) throw ConfigError("grid needs at least one point per parameter");
  TrainingSet t;
  t.sampling = TrainingSet::Sampling::grid;
  const std::size_t dims = domain.size();
  std::vector<int> idx(dims, 0);
  for (;;) {
    Vector mu(static_cast<Eigen::Index>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
      const double f = per_dim == 1 ? 0.5 : static_cast<double>(idx[d]) / (per_dim - 1);
      mu[static_cast<Eigen::Index>(d)] = domain[d][0] + f * (domain[d][1] - domain[d][0]);
    }
    t.points.push_back(mu);
    std::size_t d = 0;
    while (d < dims && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == dims) break;
  }
  return t;
}

SnapshotSet collect_snapshots(const optctrl::FullOrderModel& model, const TrainingSet& training) {
  if (training.points.empty()) throw ConfigError("empty training set");
  std::vector<optctrl::OcpSolution> ok;
  SnapshotSet s;
  for (std::size_t i = 0; i < training.points.size(); ++i) {
    try {
      ok.push_back(optctrl::solve_ocp(model, training.points[i]));
    } catch (const SolverError& e) {
      s.failures.emplace_back(i, e.what());
    }
  }
  if (ok.empty()) throw AllSnapshotsFailed("every training solve failed");
  const auto& sp = model.spaces();
  const auto n = static_cast<Eigen::Index>(ok.size());
  s.v.resize(sp.n_v, n);
  s.p.resize(sp.n_p, n);
  s.u.resize(sp.n_u, n);
  s.w.resize(sp.n_v, n);
  s.q.resize(sp.n_p, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& o = ok[static_cast<std::size_t>(k)];
    s.v.col(k) = o.v_hom;
    s.p.col(k) = o.p;
    s.u.col(k) = o.u;
    s.w.col(k) = o.w;
    s.q.col(k) = o.q;
    s.mu.push_back(o.mu);
    s.J.push_back(o.J);
  }
  return s;
}

DenseMatrix orthonormalize(const DenseMatrix& vectors, const SparseMatrix& x, const DenseMatrix* against,
                           double drop_tol) {
  std::vector<Vector> kept;
  auto project_out = [&](Vector& v, const Vector& q) { v -= q.dot(x * v) * q; };
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Vector v = vectors.col(j);
    const double n0 = std::sqrt(std::max(v.dot(x * v), 0.0));
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (against)
        for (Eigen::Index k = 0; k < against->cols(); ++k) project_out(v, against->col(k));
      for (const auto& q : kept) project_out(v, q);
    }
    const double n1 = std::sqrt(std::max(v.dot(x * v), 0.0));
    if (n1 <= drop_tol * n0) continue;
    kept.push_back(v / n1);
  }
  DenseMatrix out(vectors.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = kept[k];
  return out;
}

FieldPod pod_compress(const DenseMatrix& s, const SparseMatrix& x, const PodOptions& opt) {
  if (s.cols() < 1) throw DimensionMismatch("pod: no snapshots");
  if (x.rows() != s.rows() || x.cols() != s.rows())
    throw DimensionMismatch("pod: inner product size differs from snapshots");
  if (opt.n_max < 1) throw ConfigError("pod: n_max must be positive");
  const auto count = s.cols();

  // With P X P^T = L L^T the correlation matrix is W^T W / |L| for
  // W = L^T P S. Working on the triangular factor of W keeps the small
  // eigenvalues accurate.
  Eigen::SimplicialLLT<SparseMatrix> llt(x);
  if (llt.info() != Eigen::Success) throw SolverFailure("pod: inner product matrix is not positive definite");
  const DenseMatrix w = llt.matrixU() * (llt.permutationP() * s);
  Eigen::HouseholderQR<DenseMatrix> qr(w);
  const auto k = std::min(w.rows(), count);
  const DenseMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<DenseMatrix> svd(r / std::sqrt(static_cast<double>(count)), Eigen::ComputeFullU | Eigen::ComputeFullV);

  FieldPod f;
  f.eigenvalues = Vector::Zero(count);
  f.eigenvalues.head(k) = svd.singularValues().array().square().matrix();
  const double l1 = f.eigenvalues[0];
  for (Eigen::Index i = 0; i < count; ++i)
    if (l1 > 0.0 && f.eigenvalues[i] > opt.eps_rank * l1) ++f.rank;
  const int keep = std::min(opt.n_max, f.rank);
  f.rank_deficient = f.rank < opt.n_max;

  const double total = f.eigenvalues.sum();
  f.retained_energy = total > 0.0 ? f.eigenvalues.head(keep).sum() / total : 1.0;

  // Modes: X-orthonormal preimages of the left singular vectors of W.
  DenseMatrix qu = DenseMatrix::Zero(w.rows(), keep);
  qu.topRows(k) = svd.matrixU().leftCols(keep);
  qu = qr.householderQ() * qu;
  llt.matrixU().solveInPlace(qu);
  f.modes = llt.permutationPinv() * qu;
  // Sign convention: first entry above 1e-12 of the coefficient vector positive.
  for (int i = 0; i < keep; ++i) {
    const auto v = svd.matrixV().col(i);
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (std::abs(v[j]) > 1e-12) {
        if (v[j] < 0.0) f.modes.col(i) *= -1.0;
        break;
      }
  }
  return f;
}

Supremizers compute_supremizers(const optctrl::FullOrderModel& model, const DenseMatrix& pressure) {
  const auto& sp = model.spaces();
  const auto& ops = model.operators();
  if (pressure.rows() != sp.n_p) throw DimensionMismatch("supremizers: pressure modes have wrong length");
  Supremizers out;
  out.raw = DenseMatrix::Zero(sp.n_v, pressure.cols());
  if (pressure.cols() > 0) {
    const SparseMatrix xff = numerics::submatrix(ops.X_v, &sp.free, &sp.free);
    numerics::SpdSolver solver(xff);
    const DenseMatrix rhs = sp.free.restrict_rows(DenseMatrix(ops.B.transpose() * pressure));
    out.raw = sp.free.extend_rows(solver.solve(rhs));
  }
  out.orthonormal = orthonormalize(out.raw, ops.X_v);
  return out;
}

PodBasis build_pod(const optctrl::FullOrderModel& model, const SnapshotSet& s, const PodOptions& options) {
  const auto& ops = model.operators();
  PodBasis b;
  b.options = options;
  b.v = pod_compress(s.v, ops.X_v, options);
  b.p = pod_compress(s.p, ops.X_p, options);
  b.u = pod_compress(s.u, ops.N_c, options);
  b.w = pod_compress(s.w, ops.X_v, options);
  b.q = pod_compress(s.q, ops.X_p, options);
  const std::pair<const char*, const FieldPod*> fields[] = {
      {"v", &b.v}, {"p", &b.p}, {"u", &b.u}, {"w", &b.w}, {"q", &b.q}};
  for (const auto& [name, f] : fields)
    if (f->rank_deficient)
      b.warnings.push_back(std::string("RankDeficiency: field ") + name + " has rank " +
                           std::to_string(f->rank) + " < N_max " + std::to_string(options.n_max));
  b.state_sup = compute_supremizers(model, b.p.modes);
  b.adjoint_sup = compute_supremizers(model, b.q.modes);
  return b;
}

}  // namespace ocrom::rom
