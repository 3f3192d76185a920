#include "ocrom/optctrl/kkt.hpp"

#include "ocrom/errors.hpp"

namespace ocrom::optctrl {

using numerics::IndexSelection;
using numerics::Triplet;

namespace {

bool has_convection(const FullOrderModel& model) {
  return model.config().equation == StateEquation::navier_stokes;
}

SparseMatrix ff(const SparseMatrix& a, const IndexSelection& free) {
  return numerics::submatrix(a, &free, &free);
}

// [K  B^T; B  0] on free velocity dofs and all pressures.
SparseMatrix saddle(const SparseMatrix& k, const SparseMatrix& bf) {
  const int nf = static_cast<int>(k.rows());
  const int np = static_cast<int>(bf.rows());
  std::vector<Triplet> t;
  numerics::append_block(t, k, 0, 0);
  numerics::append_block(t, SparseMatrix(bf.transpose()), 0, nf);
  numerics::append_block(t, bf, nf, 0);
  SparseMatrix m(nf + np, nf + np);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix kkt_matrix(const FullOrderModel& model, const SparseMatrix& mv, const SparseMatrix& av,
                        const SparseMatrix& aw) {
  const auto& s = model.spaces();
  const auto& ops = model.operators();
  const KktLayout l = kkt_layout(model);
  const SparseMatrix bf = numerics::submatrix(ops.B, nullptr, &s.free);
  const SparseMatrix bft = bf.transpose();
  const SparseMatrix cf = numerics::submatrix(ops.C, &s.free, nullptr);
  const SparseMatrix cft = cf.transpose();

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * mv.nonZeros() + 2 * av.nonZeros() + 4 * bf.nonZeros()));
  // adjoint momentum
  numerics::append_block(t, mv, l.v(), l.v());
  numerics::append_block(t, aw, l.v(), l.w());
  numerics::append_block(t, bft, l.v(), l.q());
  // adjoint continuity
  numerics::append_block(t, bf, l.p(), l.w());
  // optimality
  numerics::append_block(t, ops.N_c, l.u(), l.u(), model.config().alpha);
  numerics::append_block(t, cft, l.u(), l.w());
  // state momentum
  numerics::append_block(t, av, l.w(), l.v());
  numerics::append_block(t, bft, l.w(), l.p());
  numerics::append_block(t, cf, l.w(), l.u());
  // state continuity
  numerics::append_block(t, bf, l.q(), l.v());
  SparseMatrix m(l.size(), l.size());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

Vector stokes_rhs(const FullOrderModel& model, const Vector& mu) {
  const auto& s = model.spaces();
  const auto& ops = model.operators();
  const KktLayout l = kkt_layout(model);
  const Vector vl = model.lifting(mu);
  Vector b = Vector::Zero(l.size());
  b.segment(l.v(), l.nf) = s.free.restrict(ops.M * (model.target() - vl));
  b.segment(l.w(), l.nf) = s.free.restrict(model.forcing() - ops.A * vl);
  b.segment(l.q(), l.np) = -(ops.B * vl);
  return b;
}

Vector residual_impl(const FullOrderModel& model, const Vector& mu, const Vector& x, bool convection) {
  const auto& s = model.spaces();
  const auto& ops = model.operators();
  const KktLayout l = kkt_layout(model);
  if (x.size() != l.size()) throw DimensionMismatch("KKT vector has wrong length");
  const Vector v = s.free.extend(x.segment(l.v(), l.nf)) + model.lifting(mu);
  const Vector p = x.segment(l.p(), l.np);
  const Vector u = x.segment(l.u(), l.nu);
  const Vector w = s.free.extend(x.segment(l.w(), l.nf));
  const Vector q = x.segment(l.q(), l.np);

  Vector adj = ops.M * (v - model.target()) + ops.A * w + ops.B.transpose() * q;
  Vector st = ops.A * v + ops.B.transpose() * p + ops.C * u - model.forcing();
  if (convection) {
    const auto& k = model.convection();
    adj += k.adjoint_convect(v, w);
    st += k.convect(v, v);
  }
  Vector f(l.size());
  f.segment(l.v(), l.nf) = s.free.restrict(adj);
  f.segment(l.p(), l.np) = ops.B * w;
  f.segment(l.u(), l.nu) = model.config().alpha * (ops.N_c * u) + ops.C.transpose() * w;
  f.segment(l.w(), l.nf) = s.free.restrict(st);
  f.segment(l.q(), l.np) = ops.B * v;
  return f;
}

double relative(double num, double den) { return den > 0.0 ? num / den : num; }

}  // namespace

KktLayout kkt_layout(const FullOrderModel& model) {
  const auto& s = model.spaces();
  return KktLayout{static_cast<int>(s.free.size()), s.n_p, s.n_u};
}

KktSystem assemble_kkt(const FullOrderModel& model, const Vector& mu, const OcpSolution* lin) {
  model.check_parameter(mu);
  const auto& s = model.spaces();
  const auto& ops = model.operators();
  KktSystem sys;
  if (!lin) {
    const SparseMatrix a = ff(ops.A, s.free);
    sys.matrix = kkt_matrix(model, ff(ops.M, s.free), a, SparseMatrix(a.transpose()));
    sys.rhs = stokes_rhs(model, mu);
    return sys;
  }
  const auto& k = model.convection();
  const SparseMatrix mv = ff(ops.M + k.adjoint_hessian(lin->w), s.free);
  const SparseMatrix av = ff(ops.A + k.state_jacobian(lin->v), s.free);
  sys.matrix = kkt_matrix(model, mv, av, SparseMatrix(av.transpose()));
  const Vector x = pack(model, *lin);
  sys.rhs = sys.matrix * x - residual_impl(model, mu, x, true);
  return sys;
}

Vector kkt_residual(const FullOrderModel& model, const Vector& mu, const Vector& x) {
  return residual_impl(model, mu, x, has_convection(model));
}

Vector pack(const FullOrderModel& model, const OcpSolution& sol) {
  const auto& s = model.spaces();
  const KktLayout l = kkt_layout(model);
  Vector x(l.size());
  x.segment(l.v(), l.nf) = s.free.restrict(sol.v_hom);
  x.segment(l.p(), l.np) = sol.p;
  x.segment(l.u(), l.nu) = sol.u;
  x.segment(l.w(), l.nf) = s.free.restrict(sol.w);
  x.segment(l.q(), l.np) = sol.q;
  return x;
}

OcpSolution unpack(const FullOrderModel& model, const Vector& mu, const Vector& x) {
  const auto& s = model.spaces();
  const KktLayout l = kkt_layout(model);
  OcpSolution sol;
  sol.mu = mu;
  sol.v_hom = s.free.extend(x.segment(l.v(), l.nf));
  sol.v = sol.v_hom + model.lifting(mu);
  sol.p = x.segment(l.p(), l.np);
  sol.u = x.segment(l.u(), l.nu);
  sol.w = s.free.extend(x.segment(l.w(), l.nf));
  sol.q = x.segment(l.q(), l.np);
  sol.J = evaluate_objective(sol.v, sol.u, model.target(), model.operators(), model.config().alpha);
  return sol;
}

OcpSolution solve_stokes_ocp(const FullOrderModel& model, const Vector& mu, bool reuse_factorization) {
  model.check_parameter(mu);
  const Vector b = stokes_rhs(model, mu);
  Vector x;
  const SparseMatrix* k = nullptr;
  numerics::SparseLu local;
  if (reuse_factorization) {
    x = model.stokes_kkt_factorization().solve(b);
    k = &model.stokes_kkt_matrix();
  } else {
    const KktSystem sys = assemble_kkt(model, mu);
    local.factor(sys.matrix);
    x = local.solve(sys.rhs);
    OcpSolution sol = unpack(model, mu, x);
    sol.residual = relative((sys.matrix * x - sys.rhs).norm(), sys.rhs.norm());
    return sol;
  }
  OcpSolution sol = unpack(model, mu, x);
  sol.residual = relative((*k * x - b).norm(), b.norm());
  return sol;
}

OcpSolution solve_navier_stokes_ocp(const FullOrderModel& model, const Vector& mu) {
  model.check_parameter(mu);
  const auto& nt = model.config().newton;
  const KktLayout l = kkt_layout(model);
  const double f0 = residual_impl(model, mu, Vector::Zero(l.size()), true).norm();
  const double tol = std::max(nt.tol_rel * f0, nt.tol_abs);

  Vector x = pack(model, solve_stokes_ocp(model, mu));
  std::vector<double> history;
  int growth = 0;
  for (int it = 0;; ++it) {
    const Vector f = residual_impl(model, mu, x, true);
    const double rn = f.norm();
    history.push_back(rn);
    if (rn <= tol) {
      OcpSolution sol = unpack(model, mu, x);
      sol.residual = relative(rn, f0);
      sol.iterations = it;
      sol.residual_history = std::move(history);
      return sol;
    }
    if (history.size() > 1 && rn > history[history.size() - 2]) {
      if (++growth >= 3) throw NewtonDiverged("Newton residual grew for 3 consecutive iterations");
    } else {
      growth = 0;
    }
    if (it >= nt.max_iter)
      throw NewtonDiverged("Newton did not converge in " + std::to_string(nt.max_iter) +
                           " iterations (residual " + std::to_string(relative(rn, f0)) + ")");
    const OcpSolution lin = unpack(model, mu, x);
    const KktSystem sys = assemble_kkt(model, mu, &lin);
    numerics::SparseLu lu(sys.matrix);
    x = lu.solve(sys.rhs);
  }
}

OcpSolution solve_ocp(const FullOrderModel& model, const Vector& mu) {
  return has_convection(model) ? solve_navier_stokes_ocp(model, mu) : solve_stokes_ocp(model, mu);
}

StateSolution solve_state(const FullOrderModel& model, const Vector& mu, const Vector& u) {
  model.check_parameter(mu);
  const auto& s = model.spaces();
  const auto& ops = model.operators();
  if (u.size() != s.n_u) throw DimensionMismatch("control has wrong length");
  const int nf = static_cast<int>(s.free.size());
  const SparseMatrix bf = numerics::submatrix(ops.B, nullptr, &s.free);
  const Vector vl = model.lifting(mu);

  auto residual = [&](const Vector& v, const Vector& p) {
    Vector st = ops.A * v + ops.B.transpose() * p + ops.C * u - model.forcing();
    if (has_convection(model)) st += model.convection().convect(v, v);
    Vector r(nf + s.n_p);
    r.head(nf) = s.free.restrict(st);
    r.tail(s.n_p) = ops.B * v;
    return r;
  };

  Vector rhs(nf + s.n_p);
  rhs.head(nf) = s.free.restrict(model.forcing() - ops.A * vl - ops.C * u);
  rhs.tail(s.n_p) = -(ops.B * vl);
  const Vector x0 = numerics::sparse_lu_solve(saddle(ff(ops.A, s.free), bf), rhs);
  StateSolution st{s.free.extend(x0.head(nf)) + vl, x0.tail(s.n_p)};
  if (!has_convection(model)) return st;

  const auto& nt = model.config().newton;
  const double f0 = residual(vl, Vector::Zero(s.n_p)).norm();
  double prev = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int it = 0;; ++it) {
    const Vector r = residual(st.v, st.p);
    const double rn = r.norm();
    if (rn <= std::max(nt.tol_rel * f0, nt.tol_abs)) return st;
    growth = rn > prev ? growth + 1 : 0;
    if (growth >= 3 || it >= nt.max_iter) throw NewtonDiverged("state Newton iteration failed");
    prev = rn;
    const SparseMatrix j = saddle(ff(ops.A + model.convection().state_jacobian(st.v), s.free), bf);
    const Vector dx = numerics::sparse_lu_solve(j, -r);
    st.v += s.free.extend(dx.head(nf));
    st.p += dx.tail(s.n_p);
  }
}

StateSolution solve_adjoint(const FullOrderModel& model, const Vector& v) {
  const auto& s = model.spaces();
  const auto& ops = model.operators();
  if (v.size() != s.n_v) throw DimensionMismatch("state has wrong length");
  const int nf = static_cast<int>(s.free.size());
  SparseMatrix k = ops.A;
  if (has_convection(model)) k += SparseMatrix(model.convection().state_jacobian(v).transpose());
  const SparseMatrix bf = numerics::submatrix(ops.B, nullptr, &s.free);
  Vector rhs = Vector::Zero(nf + s.n_p);
  rhs.head(nf) = -s.free.restrict(ops.M * (v - model.target()));
  const Vector x = numerics::sparse_lu_solve(saddle(ff(k, s.free), bf), rhs);
  return {s.free.extend(x.head(nf)), x.tail(s.n_p)};
}

Vector reduced_gradient(const FullOrderModel& model, const Vector& u, const Vector& w) {
  const auto& ops = model.operators();
  return model.config().alpha * (ops.N_c * u) + ops.C.transpose() * w;
}

}  // namespace ocrom::optctrl
