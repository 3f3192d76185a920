#include "ocrom/fem/quadrature.hpp"

namespace ocrom::fem {

namespace {

TetRule make_keast15() {
  TetRule r;
  r.degree = 5;
  auto add = [&](double a, double b, double c, double d, double w) {
    r.points.push_back({a, b, c, d});
    r.weights.push_back(6.0 * w);  // reference tet volume is 1/6
  };
  add(0.25, 0.25, 0.25, 0.25, 0.0302836780970891856);

  const double third = 1.0 / 3.0;
  const double w1 = 0.00602678571428571597;
  add(0.0, third, third, third, w1);
  add(third, 0.0, third, third, w1);
  add(third, third, 0.0, third, w1);
  add(third, third, third, 0.0, w1);

  const double a2 = 1.0 / 11.0, b2 = 8.0 / 11.0;
  const double w2 = 0.011645249086028992;
  add(b2, a2, a2, a2, w2);
  add(a2, b2, a2, a2, w2);
  add(a2, a2, b2, a2, w2);
  add(a2, a2, a2, b2, w2);

  const double a3 = 0.0665501535736642813, b3 = 0.433449846426335728;
  const double w3 = 0.0109491415613864534;
  add(a3, a3, b3, b3, w3);
  add(a3, b3, a3, b3, w3);
  add(a3, b3, b3, a3, w3);
  add(b3, a3, a3, b3, w3);
  add(b3, a3, b3, a3, w3);
  add(b3, b3, a3, a3, w3);
  return r;
}

TriRule make_dunavant6() {
  TriRule r;
  r.degree = 4;
  const double a1 = 0.445948490915964886, w1 = 0.223381589678011466;
  const double a2 = 0.091576213509770743, w2 = 0.109951743655321868;
  for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({b, a, a});
    r.points.push_back({a, b, a});
    r.points.push_back({a, a, b});
    for (int k = 0; k < 3; ++k) r.weights.push_back(w);
  }
  return r;
}

}  // namespace

const TetRule& tet_rule() {
  static const TetRule rule = make_keast15();
  return rule;
}

const TriRule& tri_rule() {
  static const TriRule rule = make_dunavant6();
  return rule;
}

}  // namespace ocrom::fem
