#pragma once

#include <array>
#include <vector>

namespace ocrom::fem {

/// Quadrature in barycentric coordinates. Weights sum to one, so an integral
/// is measure * sum(w_q f(x_q)).
template <int NBary>
struct QuadratureRule {
  std::vector<std::array<double, NBary>> points;
  std::vector<double> weights;
  int degree = 0;
};

using TetRule = QuadratureRule<4>;
using TriRule = QuadratureRule<3>;

/// Keast 15-point rule, exact for polynomials of degree 5 on a tetrahedron.
const TetRule& tet_rule();

/// Dunavant 6-point rule, exact for polynomials of degree 4 on a triangle.
const TriRule& tri_rule();

}  // namespace ocrom::fem
