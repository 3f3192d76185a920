#include "ocrom/rom/reduced.hpp"

#include <Eigen/Eigenvalues>

#include "ocrom/errors.hpp"
#include "ocrom/numerics/linear_solvers.hpp"

namespace ocrom::rom {

namespace {

DenseMatrix leading(const DenseMatrix& a, int n) { return a.leftCols(std::min<Eigen::Index>(n, a.cols())); }

DenseMatrix hcat(std::initializer_list<const DenseMatrix*> blocks, Eigen::Index rows) {
  Eigen::Index cols = 0;
  for (auto* b : blocks) cols += b->cols();
  DenseMatrix out(rows, cols);
  Eigen::Index c = 0;
  for (auto* b : blocks) {
    out.middleCols(c, b->cols()) = *b;
    c += b->cols();
  }
  return out;
}

}  // namespace

ReducedBasis build_reduced_basis(const optctrl::FullOrderModel& model, const PodBasis& pod, int n,
                                 bool with_supremizers) {
  if (n < 1) throw ConfigError("reduced basis size must be positive");
  const auto& sp = model.spaces();
  const auto& ops = model.operators();
  ReducedBasis rb;
  rb.n = n;

  const DenseMatrix v = leading(pod.v.modes, n), w = leading(pod.w.modes, n);
  const DenseMatrix ts = with_supremizers ? leading(pod.state_sup.orthonormal, n) : DenseMatrix(sp.n_v, 0);
  const DenseMatrix tq = with_supremizers ? leading(pod.adjoint_sup.orthonormal, n) : DenseMatrix(sp.n_v, 0);
  const DenseMatrix z = orthonormalize(hcat({&v, &ts, &w, &tq}, sp.n_v), ops.X_v);
  rb.m = static_cast<int>(z.cols());

  const auto& lifts = model.liftings();
  rb.num_liftings = static_cast<int>(lifts.size());
  rb.liftings.resize(sp.n_v, rb.num_liftings);
  for (int i = 0; i < rb.num_liftings; ++i) rb.liftings.col(i) = lifts[static_cast<std::size_t>(i)];
  const DenseMatrix ell = orthonormalize(rb.liftings, ops.X_v, &z, 0.0);
  if (ell.cols() != rb.num_liftings) throw InvariantViolation("lifting fields are linearly dependent");
  rb.theta = ell.transpose() * (ops.X_v * rb.liftings);
  rb.Y = hcat({&z, &ell}, sp.n_v);

  const DenseMatrix p = leading(pod.p.modes, n), q = leading(pod.q.modes, n);
  rb.P = orthonormalize(hcat({&p, &q}, sp.n_p), ops.X_p);
  rb.U = leading(pod.u.modes, n);
  return rb;
}

ReducedOperators project_operators(const optctrl::FullOrderModel& model, const ReducedBasis& rb,
                                   bool with_tensor) {
  const auto& ops = model.operators();
  const DenseMatrix& y = rb.Y;
  ReducedOperators r;
  r.M = y.transpose() * (ops.M * y);
  r.A = y.transpose() * (ops.A * y);
  r.X = y.transpose() * (ops.X_v * y);
  r.B = rb.P.transpose() * (ops.B * y);
  r.C = y.transpose() * (ops.C * rb.U);
  r.N = rb.U.transpose() * (ops.N_c * rb.U);
  const Vector mvo = ops.M * model.target();
  r.m_o = y.transpose() * mvo;
  r.c_o = model.target().dot(mvo);
  r.f = y.transpose() * model.forcing();
  r.target_coeffs = r.M.ldlt().solve(r.m_o);
  const Vector rest = model.target() - y * r.target_coeffs;
  r.target_residual = rest.dot(ops.M * rest);
  if (with_tensor) {
    const auto d = y.cols();
    r.tensor.assign(static_cast<std::size_t>(d), DenseMatrix::Zero(d, d));
    const auto& kernel = model.convection();
    for (Eigen::Index j = 0; j < d; ++j) {
      const DenseMatrix proj = y.transpose() * (kernel.E(y.col(j)) * y);  // (i, k) = e(Y_j, Y_k, Y_i)
      for (Eigen::Index i = 0; i < d; ++i) r.tensor[static_cast<std::size_t>(i)].row(j) = proj.row(i);
    }
  }
  return r;
}

void ReducedModel::check_parameter(const Vector& mu) const {
  if (mu.size() != basis.num_liftings)
    throw DimensionMismatch("expected " + std::to_string(basis.num_liftings) + " parameters");
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (static_cast<std::size_t>(i) >= domain.size()) break;
    const auto& d = domain[static_cast<std::size_t>(i)];
    if (!(mu[i] >= d[0] && mu[i] <= d[1]))
      throw ParameterOutOfDomain("parameter " + std::to_string(i) + " = " + std::to_string(mu[i]) +
                                 " outside [" + std::to_string(d[0]) + ", " + std::to_string(d[1]) + "]");
  }
}

ReducedModel build_reduced_model(const optctrl::FullOrderModel& model, const PodBasis& pod, int n,
                                 bool with_supremizers) {
  ReducedModel rm;
  rm.basis = build_reduced_basis(model, pod, n, with_supremizers);
  rm.equation = model.config().equation;
  rm.ops = project_operators(model, rm.basis, rm.equation == optctrl::StateEquation::navier_stokes);
  rm.alpha = model.config().alpha;
  rm.domain = model.config().domain;
  return rm;
}

namespace {

struct Offsets {
  int m, np, nu;
  int a() const { return 0; }
  int p() const { return m; }
  int d() const { return m + np; }
  int b() const { return m + np + nu; }
  int q() const { return 2 * m + np + nu; }
  int size() const { return 2 * (m + np) + nu; }
};

Offsets offsets(const ReducedModel& rm) {
  return {rm.basis.m, rm.basis.pressure_dim(), rm.basis.control_dim()};
}

Vector velocity_coefficients(const ReducedModel& rm, const Vector& mu, const Vector& a) {
  Vector nu(rm.basis.velocity_dim());
  nu.head(rm.basis.m) = a;
  nu.tail(rm.basis.num_liftings) = rm.basis.theta * mu;
  return nu;
}

// Convection contributions: residual pieces and their derivatives with
// respect to a (state and adjoint rows) and b (adjoint rows).
struct Convection {
  Vector state, adjoint;   // m
  DenseMatrix state_a;     // m x m
  DenseMatrix adjoint_a;   // m x m
  DenseMatrix adjoint_b;   // m x m
};

Convection tensor_convection(const ReducedModel& rm, const Vector& nu, const Vector& b) {
  const int m = rm.basis.m;
  const auto& t = rm.ops.tensor;
  const auto dim = nu.size();
  Convection c;
  c.state.resize(m);
  DenseMatrix g(m, dim);  // row i: (T_i + T_i^T) nu
  for (int i = 0; i < m; ++i) {
    const Vector tn = t[static_cast<std::size_t>(i)] * nu;
    c.state[i] = nu.dot(tn);
    g.row(i) = (tn + t[static_cast<std::size_t>(i)].transpose() * nu).transpose();
  }
  c.state_a = g.leftCols(m);
  DenseMatrix wm = DenseMatrix::Zero(dim, dim);
  for (int k = 0; k < m; ++k) wm += b[k] * t[static_cast<std::size_t>(k)];
  const DenseMatrix ws = wm + wm.transpose();
  c.adjoint = (ws * nu).head(m);
  c.adjoint_a = ws.topLeftCorner(m, m);
  c.adjoint_b = g.leftCols(m).transpose();
  return c;
}

Convection reassembled_convection(const ReducedModel& rm, const optctrl::FullOrderModel& full,
                                  const Vector& nu, const Vector& b) {
  const int m = rm.basis.m;
  const auto& kernel = full.convection();
  const DenseMatrix& y = rm.basis.Y;
  const auto z = y.leftCols(m);
  const Vector v = y * nu;
  const Vector w = z * b;
  Convection c;
  c.state = z.transpose() * kernel.convect(v, v);
  c.adjoint = z.transpose() * kernel.adjoint_convect(v, w);
  const SparseMatrix js = kernel.state_jacobian(v);
  c.state_a = z.transpose() * (js * z);
  c.adjoint_b = c.state_a.transpose();
  c.adjoint_a = z.transpose() * (kernel.adjoint_hessian(w) * z);
  return c;
}

bool nonlinear(const ReducedModel& rm) { return rm.equation == optctrl::StateEquation::navier_stokes; }

Convection convection_terms(const ReducedModel& rm, const Vector& nu, const Vector& b, ConvectionMode mode,
                            const optctrl::FullOrderModel* full) {
  if (mode == ConvectionMode::reassemble) {
    if (!full) throw ConfigError("reassembly mode needs the full-order model");
    if (full->spaces().n_v != rm.basis.Y.rows()) throw DimensionMismatch("full model does not match basis");
    return reassembled_convection(rm, *full, nu, b);
  }
  if (rm.ops.tensor.size() != static_cast<std::size_t>(nu.size()))
    throw InvariantViolation("reduced model has no convection tensor");
  return tensor_convection(rm, nu, b);
}

void check_sizes(const ReducedModel& rm, const Vector& mu, const Vector& z) {
  if (mu.size() != rm.basis.num_liftings) throw DimensionMismatch("parameter vector has wrong length");
  if (z.size() != offsets(rm).size()) throw DimensionMismatch("reduced unknown has wrong length");
}

DenseMatrix linear_matrix(const ReducedModel& rm) {
  const Offsets o = offsets(rm);
  const auto& op = rm.ops;
  const int m = o.m;
  const DenseMatrix bz = op.B.leftCols(m);
  const DenseMatrix cz = op.C.topRows(m);
  DenseMatrix j = DenseMatrix::Zero(o.size(), o.size());
  j.block(o.a(), o.a(), m, m) = op.M.topLeftCorner(m, m);
  j.block(o.a(), o.b(), m, m) = op.A.topLeftCorner(m, m).transpose();
  j.block(o.a(), o.q(), m, o.np) = bz.transpose();
  j.block(o.p(), o.b(), o.np, m) = bz;
  j.block(o.d(), o.d(), o.nu, o.nu) = rm.alpha * op.N;
  j.block(o.d(), o.b(), o.nu, m) = cz.transpose();
  j.block(o.b(), o.a(), m, m) = op.A.topLeftCorner(m, m);
  j.block(o.b(), o.p(), m, o.np) = bz.transpose();
  j.block(o.b(), o.d(), m, o.nu) = cz;
  j.block(o.q(), o.a(), o.np, m) = bz;
  return j;
}

}  // namespace

Vector pack(const ReducedModel& rm, const ReducedSolution& s) {
  const Offsets o = offsets(rm);
  Vector z(o.size());
  z << s.a, s.p, s.d, s.b, s.q;
  return z;
}

ReducedSolution unpack(const ReducedModel& rm, const Vector& mu, const Vector& z) {
  const Offsets o = offsets(rm);
  check_sizes(rm, mu, z);
  ReducedSolution s;
  s.mu = mu;
  s.a = z.segment(o.a(), o.m);
  s.p = z.segment(o.p(), o.np);
  s.d = z.segment(o.d(), o.nu);
  s.b = z.segment(o.b(), o.m);
  s.q = z.segment(o.q(), o.np);
  s.nu = velocity_coefficients(rm, mu, s.a);
  return s;
}

Vector reduced_residual(const ReducedModel& rm, const Vector& mu, const Vector& z, ConvectionMode mode,
                        const optctrl::FullOrderModel* full, bool with_convection) {
  const Offsets o = offsets(rm);
  const ReducedSolution s = unpack(rm, mu, z);
  const auto& op = rm.ops;
  const int m = o.m;
  const auto bz = op.B.leftCols(m);
  const auto cz = op.C.topRows(m);
  Vector r(o.size());
  r.segment(o.a(), m) = op.M.topRows(m) * s.nu - op.m_o.head(m) + op.A.topLeftCorner(m, m).transpose() * s.b +
                        bz.transpose() * s.q;
  r.segment(o.p(), o.np) = bz * s.b;
  r.segment(o.d(), o.nu) = rm.alpha * (op.N * s.d) + cz.transpose() * s.b;
  r.segment(o.b(), m) = op.A.topRows(m) * s.nu - op.f.head(m) + bz.transpose() * s.p + cz * s.d;
  r.segment(o.q(), o.np) = op.B * s.nu;
  if (with_convection && nonlinear(rm)) {
    const Convection c = convection_terms(rm, s.nu, s.b, mode, full);
    r.segment(o.a(), m) += c.adjoint;
    r.segment(o.b(), m) += c.state;
  }
  return r;
}

DenseMatrix reduced_jacobian(const ReducedModel& rm, const Vector& mu, const Vector& z, ConvectionMode mode,
                             const optctrl::FullOrderModel* full) {
  const Offsets o = offsets(rm);
  const ReducedSolution s = unpack(rm, mu, z);
  DenseMatrix j = linear_matrix(rm);
  if (nonlinear(rm)) {
    const int m = o.m;
    const Convection c = convection_terms(rm, s.nu, s.b, mode, full);
    j.block(o.a(), o.a(), m, m) += c.adjoint_a;
    j.block(o.a(), o.b(), m, m) += c.adjoint_b;
    j.block(o.b(), o.a(), m, m) += c.state_a;
  }
  return j;
}

ReducedSolution solve_reduced(const ReducedModel& rm, const Vector& mu, ConvectionMode mode,
                              const optctrl::FullOrderModel* full) {
  rm.check_parameter(mu);
  const Offsets o = offsets(rm);
  const Vector zero = Vector::Zero(o.size());

  // One dense solve of the linear part gives the Stokes optimum, which is
  // also the Newton starting point.
  const DenseMatrix jl = linear_matrix(rm);
  Vector rl = reduced_residual(rm, mu, zero, ConvectionMode::tensor, nullptr, false);
  Vector z = -numerics::dense_solve(jl, rl);
  ReducedSolution out;
  if (!nonlinear(rm)) {
    out = unpack(rm, mu, z);
    out.residual_history.push_back((jl * z + rl).norm());
  } else {
    const double r0 = reduced_residual(rm, mu, zero, mode, full).norm();
    const double tol = std::max(rm.newton.tol_rel * r0, rm.newton.tol_abs);
    std::vector<double> history;
    Vector r = reduced_residual(rm, mu, z, mode, full);
    history.push_back(r.norm());
    int growth = 0, it = 0;
    while (history.back() > tol) {
      if (it == rm.newton.max_iter)
        throw NewtonDiverged("reduced Newton did not converge in " + std::to_string(it) + " iterations");
      z -= numerics::dense_solve(reduced_jacobian(rm, mu, z, mode, full), r);
      r = reduced_residual(rm, mu, z, mode, full);
      ++it;
      const double rn = r.norm();
      if (!std::isfinite(rn)) throw NewtonDiverged("reduced Newton produced a non-finite residual");
      growth = rn > history.back() ? growth + 1 : 0;
      history.push_back(rn);
      if (growth >= 3) throw NewtonDiverged("reduced Newton residual grew three times in a row");
    }
    out = unpack(rm, mu, z);
    out.iterations = it;
    out.residual_history = std::move(history);
  }
  out.J = reduced_objective(rm, out);
  return out;
}

double reduced_objective(const ReducedModel& rm, const ReducedSolution& s) {
  const auto& op = rm.ops;
  const Vector e = s.nu - op.target_coeffs;
  return 0.5 * (e.dot(op.M * e) + op.target_residual) + 0.5 * rm.alpha * s.d.dot(op.N * s.d);
}

optctrl::OcpSolution reconstruct(const ReducedModel& rm, const ReducedSolution& s) {
  const auto& b = rm.basis;
  optctrl::OcpSolution f;
  f.mu = s.mu;
  f.v = b.Y * s.nu;
  f.v_hom = f.v - b.liftings * s.mu;
  f.p = b.P * s.p;
  f.u = b.U * s.d;
  f.w = b.Y.leftCols(b.m) * s.b;
  f.q = b.P * s.q;
  f.J = s.J;
  f.iterations = s.iterations;
  f.residual_history = s.residual_history;
  return f;
}

double reduced_inf_sup(const ReducedBasis& basis, const fem::OperatorSet& ops) {
  const auto np = basis.pressure_dim();
  if (np == 0) return 0.0;
  if (np > basis.m) return 0.0;
  const DenseMatrix bz = basis.P.transpose() * (ops.B * basis.Y.leftCols(basis.m));
  const DenseMatrix s = bz * bz.transpose();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(s, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(eig.eigenvalues()[0], 0.0));
}

}  // namespace ocrom::rom
