#pragma once

#include "ocrom/fem/operators.hpp"
#include "ocrom/optctrl/kkt.hpp"

namespace ocrom::rom {

/// Errors between a full-order and a reduced (lifted) solution. State and
/// adjoint errors combine velocity in the X_v norm and pressure in the X_p
/// norm; control uses the N_c norm.
struct ErrorReport {
  double E_v = 0, E_p = 0, E_u = 0, E_w = 0, E_q = 0;
  double E_s = 0, E_z = 0;
  double E_s_rel = 0, E_z_rel = 0, E_u_rel = 0;
  double E_T = 0, E_T_rel = 0;
  double E_J = 0;
};

ErrorReport compute_errors(const optctrl::OcpSolution& full, const optctrl::OcpSolution& reduced,
                           const fem::OperatorSet& ops);

}  // namespace ocrom::rom
