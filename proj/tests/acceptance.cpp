// Acceptance run: one PASS/FAIL line per criterion. Criterion numbers given
// as arguments select a subset.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "ocrom/errors.hpp"
#include "ocrom/rom/metrics.hpp"
#include "ocrom/study/study.hpp"
#include "unit/fixtures.hpp"

using namespace ocrom;
using numerics::Vector;
using optctrl::StateEquation;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("ocrom_acceptance_" + name); }

std::vector<std::pair<std::string, study::PodCheck>> pod_checks;
std::vector<fs::path> outputs;

study::StudyConfig config(const std::string& text, const std::string& name) {
  auto c = study::parse_config(text);
  c.output = scratch(name);
  outputs.push_back(c.output);
  return c;
}

struct OfflineStudy {
  study::StudyConfig config;
  study::OfflineResult offline;
};

OfflineStudy offline_study(const std::string& text, const std::string& name) {
  OfflineStudy s{config(text, name), {}};
  s.offline = study::run_offline(s.config);
  pod_checks.emplace_back(name, study::check_pod(s.offline.pod, s.offline.artifact.model, s.offline.model->operators()));
  return s;
}

// Bent tube, Stokes, |training| = 50, sweep 1..10.
const char* kBentStokes = R"([mesh]
generator = bent_tube
radius = 1
bend_radius = 3
bend_angle = 90
resolution = 0.5
[problem]
equation = stokes
domain = 70, 80
[training]
size = 50
seed = 1
[test]
size = 20
seed = 2
[pod]
n_max = 10
[study]
sweep = 1-10
)";

const char* kGraftGrouped = R"([mesh]
generator = graft
radius = 1
resolution = 0.5
[problem]
equation = navier-stokes
inlet_groups = 2, 3
domain = 70, 80
[training]
size = 10
seed = 1
[test]
size = 20
seed = 7
[pod]
n_max = 6
)";

const char* kGraftTwoInlets = R"([mesh]
generator = graft
radius = 1
resolution = 0.5
[problem]
equation = navier-stokes
inlet_groups = 2; 3
domain = 70, 80; 45, 50
[training]
size = 16
seed = 1
[test]
size = 1
seed = 2
[pod]
n_max = 10
)";

struct BentStudy {
  OfflineStudy s;
  study::StudyReport report;
};

const BentStudy& bent_study() {
  static const BentStudy b = [] {
    BentStudy r{offline_study(kBentStokes, "bent"), {}};
    r.report = study::run_error_study(r.s.config, r.s.offline);
    pod_checks.emplace_back("bent error study", r.report.pod_check);
    return r;
  }();
  return b;
}

const OfflineStudy& graft_grouped() {
  static const OfflineStudy s = offline_study(kGraftGrouped, "graft_grouped");
  return s;
}

// L2 distance between the discrete velocity and Poiseuille flow along z.
double poiseuille_error(double h) {
  const auto m = fixtures::model(fixtures::tube(h, 3.0), StateEquation::stokes);
  const Vector mu = fixtures::mu1(80.0);
  const Vector v = m->lifting(mu);
  // Re = 2 R U / nu with mean speed U; peak speed is 2 U.
  const double peak = mu[0] * m->config().viscosity;
  const auto& sp = m->spaces();
  const auto& rule = fem::tet_rule();
  double err = 0.0, ref = 0.0;
  for (std::size_t t = 0; t < sp.mesh->num_tets(); ++t) {
    const auto& tet = sp.mesh->tets()[t];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      mesh::Vec3 x = mesh::Vec3::Zero();
      for (int a = 0; a < 4; ++a) x += l[a] * sp.mesh->nodes()[tet[a]];
      mesh::Vec3 vh;
      Eigen::Matrix3d g;
      double vol;
      fixtures::velocity_at(sp, t, l, v, vh, g, &vol);
      const mesh::Vec3 ve(0.0, 0.0, peak * (1.0 - x[0] * x[0] - x[1] * x[1]));
      err += vol * rule.weights[q] * (vh - ve).squaredNorm();
      ref += vol * rule.weights[q] * ve.squaredNorm();
    }
  }
  return std::sqrt(err / ref);
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  const double e4 = poiseuille_error(0.25), e6 = poiseuille_error(1.0 / 6.0);
  o.require(e4 <= 0.02, "error at h = R/4 " + num(e4));
  o.require(e6 <= 0.5 * e4, "error at h = R/6 " + num(e6));
  const double s = seconds_since(t0);
  o.require(s <= 60.0, "runtime " + num(s) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  for (auto eq : {StateEquation::stokes, StateEquation::navier_stokes}) {
    const std::string name = eq == StateEquation::stokes ? "Stokes" : "Navier-Stokes";
    auto m = fixtures::model(fixtures::small_tube(), eq);
    const Vector mu = fixtures::mu1(eq == StateEquation::stokes ? 72.0 : 80.0);
    m->set_target(optctrl::solve_state(*m, mu, Vector::Zero(m->spaces().n_u)).v);
    // Stokes is one-shot, so its reference is the zero field; Newton starts
    // from the Stokes optimum.
    const double j0 = eq == StateEquation::stokes ? 0.5 * m->target().dot(m->operators().M * m->target())
                                                  : optctrl::solve_stokes_ocp(*m, mu).J;
    const auto s = optctrl::solve_ocp(*m, mu);
    const double un = std::sqrt(s.u.dot(m->operators().N_c * s.u));
    const double vn = std::sqrt(s.v.dot(m->operators().M * s.v));
    o.require(s.J <= 1e-8 * j0, name + " J/J0 " + num(s.J / j0));
    o.require(un <= 1e-6 * vn, name + " |u|/|v| " + num(un / vn));
  }
  const double s = seconds_since(t0);
  o.require(s <= 300.0, "runtime " + num(s) + " s");
  return o;
}

Outcome criterion3() {
  Outcome o;
  for (auto eq : {StateEquation::stokes, StateEquation::navier_stokes}) {
    const double tol = eq == StateEquation::stokes ? 1e-4 : 1e-3;
    const auto m = fixtures::model(fixtures::small_tube(), eq);
    const Vector mu = fixtures::mu1(76.0);
    std::mt19937_64 rng(eq == StateEquation::stokes ? 31 : 32);
    const Vector u = 50.0 * fixtures::random_vector(m->spaces().n_u, rng);
    const auto objective = [&](const Vector& c) {
      const auto st = optctrl::solve_state(*m, mu, c);
      return optctrl::evaluate_objective(st.v, c, m->target(), m->operators(), m->config().alpha);
    };
    const auto st = optctrl::solve_state(*m, mu, u);
    const Vector g = optctrl::reduced_gradient(*m, u, optctrl::solve_adjoint(*m, st.v).v);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Vector d = fixtures::random_vector(u.size(), rng).normalized();
      const double eps = 1e-2 * u.norm();
      const double fd = (objective(u + eps * d) - objective(u - eps * d)) / (2 * eps);
      worst = std::max(worst, std::abs(fd - g.dot(d)) / std::abs(g.dot(d)));
    }
    o.require(worst <= tol, std::string(eq == StateEquation::stokes ? "Stokes" : "Navier-Stokes") +
                                " worst relative mismatch " + num(worst));
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  const int one = graft_grouped().offline.artifact.model.basis.dimension();
  o.require(one == 79, "one inlet, N_max 6: " + std::to_string(one));
  const auto two = offline_study(kGraftTwoInlets, "graft_two_inlets");
  const int d = two.offline.artifact.model.basis.dimension();
  o.require(d == 132, "two inlets, N_max 10: " + std::to_string(d));
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto& r = bent_study().report;
  const auto& first = r.rows.front().mean;
  const auto& last = r.rows.back().mean;
  o.require(r.rows.size() == 10, "sweep length " + std::to_string(r.rows.size()));
  o.require(last.E_T_rel <= 1e-5 * first.E_T_rel, "E_T_rel " + num(first.E_T_rel) + " -> " + num(last.E_T_rel));
  o.require(last.E_J <= 1e-5 * first.E_J, "E_J " + num(first.E_J) + " -> " + num(last.E_J));
  const double s = seconds_since(t0);
  o.require(s <= 1800.0, "runtime " + num(s) + " s");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto& b = bent_study().s;
  const auto& model = *b.offline.model;
  const auto& pod = b.offline.pod;
  const int full = std::max({pod.v.rank, pod.p.rank, pod.u.rank, pod.w.rank, pod.q.rank});
  const auto rm = rom::build_reduced_model(model, pod, full);
  double worst = 0.0;
  for (const auto& mu : b.offline.snapshots.mu) {
    const auto e = rom::compute_errors(optctrl::solve_ocp(model, mu), rom::reconstruct(rm, rom::solve_reduced(rm, mu)),
                                       model.operators());
    worst = std::max(worst, e.E_T_rel);
  }
  o.require(worst <= 1e-7, "n = " + std::to_string(full) + ", worst E_T_rel over " +
                               std::to_string(b.offline.snapshots.size()) + " training points " + num(worst));
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto& b = bent_study();
  const auto& model = *b.s.offline.model;
  const int n = 6;
  const auto with = rom::build_reduced_model(model, b.s.offline.pod, n);
  const double beta = rom::reduced_inf_sup(with.basis, model.operators());
  o.require(beta >= 1e-6, "inf-sup with supremizers " + num(beta));

  const auto without = rom::build_reduced_model(model, b.s.offline.pod, n, false);
  o.detail += "; inf-sup without " + num(rom::reduced_inf_sup(without.basis, model.operators()));
  const auto test = study::make_samples(b.s.config.test, model.config().domain);
  double ep_with = 0.0, ep_without = 0.0;
  int failures = 0;
  for (const auto& mu : test.points) {
    const auto full = optctrl::solve_ocp(model, mu);
    ep_with += rom::compute_errors(full, rom::reconstruct(with, rom::solve_reduced(with, mu)), model.operators()).E_p;
    try {
      ep_without +=
          rom::compute_errors(full, rom::reconstruct(without, rom::solve_reduced(without, mu)), model.operators()).E_p;
    } catch (const SolverError&) {
      ++failures;
    }
  }
  const auto count = static_cast<double>(test.points.size());
  ep_with /= count;
  if (failures > 0) {
    o.require(true, "reduced solve without supremizers failed at " + std::to_string(failures) + " of " +
                        std::to_string(test.points.size()) + " points");
  } else {
    ep_without /= count;
    o.require(ep_without >= 100.0 * ep_with, "mean E_p at n = 6: " + num(ep_with) + " with, " + num(ep_without) +
                                                 " without");
  }
  return o;
}

struct SpeedupRun {
  int dofs = 0;
  double full = 0.0, online = 0.0, speedup = 0.0;
};

const char* kSpeedTube = R"([mesh]
generator = tube
radius = 1
length = 6
[problem]
equation = stokes
domain = 70, 80
[training]
size = 4
seed = 1
[test]
size = 5
seed = 2
[pod]
n_max = 4
)";

SpeedupRun speedup_run(double h) {
  auto c = config(kSpeedTube, "speed_" + num(h));
  c.mesh.resolution = h;
  const auto off = study::run_offline(c);
  pod_checks.emplace_back("speedup h = " + num(h), study::check_pod(off.pod, off.artifact.model, off.model->operators()));
  const auto mus = study::make_samples(c.test, c.problem.domain).points;
  const auto r = study::run_speedup_study(c, *off.model, off.artifact, mus);
  SpeedupRun s;
  s.dofs = r.full_dofs;
  s.full = r.full_mean_seconds;
  s.speedup = r.speedup_mean;
  // Online solves take microseconds; use the median of repeated solves.
  for (const auto& mu : mus) {
    std::vector<double> t;
    for (int k = 0; k < 41; ++k) {
      const auto t0 = Clock::now();
      const auto red = rom::solve_reduced(off.artifact.model, mu);
      t.push_back(seconds_since(t0));
      if (red.J < 0.0) std::abort();
    }
    std::nth_element(t.begin(), t.begin() + 20, t.end());
    s.online += t[20] / static_cast<double>(mus.size());
  }
  return s;
}

Outcome criterion8() {
  Outcome o;
  const auto coarse = speedup_run(0.4);
  const auto fine = speedup_run(0.25);
  o.require(fine.dofs >= 50000, "N = " + std::to_string(fine.dofs) + " (coarse " + std::to_string(coarse.dofs) + ")");
  o.require(fine.speedup >= 50.0, "mean speedup " + num(fine.speedup));
  const double online = std::max(fine.online, coarse.online) / std::min(fine.online, coarse.online);
  const double full = fine.full / coarse.full;
  o.require(online <= 1.5, "online time ratio " + num(online));
  o.require(full >= 3.0, "full time ratio " + num(full));
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto& g = graft_grouped();
  const auto& model = *g.offline.model;
  const auto& rm = g.offline.artifact.model;
  const auto mus = study::make_samples(g.config.test, model.config().domain).points;
  int converged = 0;
  double worst = 0.0;
  for (const auto& mu : mus) {
    try {
      const auto t = rom::solve_reduced(rm, mu);
      const auto r = rom::solve_reduced(rm, mu, rom::ConvectionMode::reassemble, &model);
      ++converged;
      const Vector a = rom::pack(rm, t), b = rom::pack(rm, r);
      worst = std::max(worst, (a - b).norm() / a.norm());
    } catch (const SolverError&) {
    }
  }
  o.require(converged == static_cast<int>(mus.size()),
            "converged at " + std::to_string(converged) + " of " + std::to_string(mus.size()) + " points");
  o.require(worst <= 1e-8, "tensor vs reassembly " + num(worst));
  return o;
}

Outcome criterion10() {
  Outcome o;
  if (pod_checks.empty()) bent_study();
  for (const auto& [name, c] : pod_checks)
    o.require(c.ok(), name + ": energy " + num(c.min_retained_energy) + ", orthonormality " +
                          num(c.max_orthonormality_error));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d %s (%.1f s): %s\n", id, r.pass ? "PASS" : "FAIL", seconds_since(t0), r.detail.c_str());
    std::fflush(stdout);
    all = all && r.pass;
  }
  for (const auto& p : outputs) fs::remove_all(p);
  return all ? 0 : 1;
}
