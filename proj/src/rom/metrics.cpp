#include "ocrom/rom/metrics.hpp"

#include <cmath>

#include "ocrom/errors.hpp"

namespace ocrom::rom {

namespace {

double norm(const numerics::Vector& x, const numerics::SparseMatrix& g) {
  return std::sqrt(std::max(x.dot(g * x), 0.0));
}

double ratio(double num, double den) { return den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0); }

}  // namespace

ErrorReport compute_errors(const optctrl::OcpSolution& h, const optctrl::OcpSolution& n,
                           const fem::OperatorSet& ops) {
  const auto nv = ops.X_v.rows(), np = ops.X_p.rows(), nu = ops.N_c.rows();
  for (const auto* s : {&h, &n})
    if (s->v.size() != nv || s->w.size() != nv || s->p.size() != np || s->q.size() != np || s->u.size() != nu)
      throw DimensionMismatch("compute_errors: solution fields do not match the operators");

  ErrorReport r;
  r.E_v = norm(h.v - n.v, ops.X_v);
  r.E_p = norm(h.p - n.p, ops.X_p);
  r.E_u = norm(h.u - n.u, ops.N_c);
  r.E_w = norm(h.w - n.w, ops.X_v);
  r.E_q = norm(h.q - n.q, ops.X_p);
  r.E_s = std::hypot(r.E_v, r.E_p);
  r.E_z = std::hypot(r.E_w, r.E_q);
  r.E_T = std::sqrt(r.E_s * r.E_s + r.E_z * r.E_z + r.E_u * r.E_u);

  const double s_norm = std::hypot(norm(h.v, ops.X_v), norm(h.p, ops.X_p));
  const double z_norm = std::hypot(norm(h.w, ops.X_v), norm(h.q, ops.X_p));
  const double u_norm = norm(h.u, ops.N_c);
  r.E_s_rel = ratio(r.E_s, s_norm);
  r.E_z_rel = ratio(r.E_z, z_norm);
  r.E_u_rel = ratio(r.E_u, u_norm);
  r.E_T_rel = ratio(r.E_T, std::sqrt(s_norm * s_norm + u_norm * u_norm + z_norm * z_norm));
  r.E_J = std::abs(h.J - n.J);
  return r;
}

}  // namespace ocrom::rom
