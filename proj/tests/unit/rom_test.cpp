#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fixtures.hpp"
#include "ocrom/errors.hpp"
#include "ocrom/fem/convection.hpp"
#include "ocrom/rom/artifact.hpp"
#include "ocrom/rom/metrics.hpp"

using namespace ocrom;
using fixtures::DenseMatrix;
using fixtures::mu1;
using fixtures::SparseMatrix;
using fixtures::Vector;

namespace {

SparseMatrix spd_matrix(int n) {
  std::vector<numerics::Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 + 0.1 * i);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  SparseMatrix x(n, n);
  x.setFromTriplets(t.begin(), t.end());
  return x;
}

double x_norm(const Vector& v, const SparseMatrix& x) { return std::sqrt(v.dot(x * v)); }

struct Offline {
  rom::TrainingSet training;
  rom::SnapshotSet snaps;
  rom::PodBasis pod;
};

const Offline& stokes_offline() {
  static const Offline o = [] {
    Offline r;
    r.training = rom::random_training_set({{70.0, 80.0}}, 6, 11);
    r.snaps = rom::collect_snapshots(fixtures::stokes_tube(), r.training);
    r.pod = rom::build_pod(fixtures::stokes_tube(), r.snaps, rom::PodOptions{6, 1e-4, 1e-22});
    return r;
  }();
  return o;
}

const Offline& ns_offline() {
  static const Offline o = [] {
    Offline r;
    r.training = rom::random_training_set({{70.0, 80.0}}, 4, 12);
    r.snaps = rom::collect_snapshots(fixtures::ns_tube(), r.training);
    r.pod = rom::build_pod(fixtures::ns_tube(), r.snaps, rom::PodOptions{4, 1e-4, 1e-22});
    return r;
  }();
  return o;
}

const rom::ReducedModel& ns_reduced() {
  static const rom::ReducedModel rm = rom::build_reduced_model(fixtures::ns_tube(), ns_offline().pod, 3);
  return rm;
}

}  // namespace

TEST_CASE("training sets") {
  const auto a = rom::random_training_set({{70.0, 80.0}, {45.0, 50.0}}, 30, 5);
  const auto b = rom::random_training_set({{70.0, 80.0}, {45.0, 50.0}}, 30, 5);
  REQUIRE(a.points.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK((a.points[i].array() == b.points[i].array()).all());
    CHECK(a.points[i][0] >= 70.0);
    CHECK(a.points[i][0] <= 80.0);
    CHECK(a.points[i][1] >= 45.0);
    CHECK(a.points[i][1] <= 50.0);
  }
  const auto g = rom::grid_training_set({{70.0, 80.0}, {45.0, 50.0}}, 3);
  CHECK(g.points.size() == 9);
  CHECK(g.points.front() == Vector{{70.0, 45.0}});
  CHECK(g.points.back() == Vector{{80.0, 50.0}});
  CHECK_THROWS_AS(rom::random_training_set({{70.0, 80.0}}, 0, 1), ConfigError);
}

TEST_CASE("POD of identical snapshots") {
  const SparseMatrix x = spd_matrix(30);
  std::mt19937_64 rng(1);
  const Vector s = fixtures::random_vector(30, rng);
  const DenseMatrix snaps = s.replicate(1, 4);
  const auto f = rom::pod_compress(snaps, x, rom::PodOptions{3, 1e-4, 1e-22});
  CHECK(f.rank == 1);
  CHECK(f.rank_deficient);
  REQUIRE(f.modes.cols() == 1);
  CHECK(f.eigenvalues[0] == doctest::Approx(s.dot(x * s)).epsilon(1e-13));
  CHECK((f.modes.col(0) - s / x_norm(s, x)).norm() <= 1e-12);
  CHECK(f.retained_energy == doctest::Approx(1.0));
}

TEST_CASE("POD of two X-orthogonal snapshots") {
  const SparseMatrix x = spd_matrix(20);
  std::mt19937_64 rng(2);
  Vector a = fixtures::random_vector(20, rng), b = fixtures::random_vector(20, rng);
  a /= x_norm(a, x);
  b -= b.dot(x * a) * a;
  b /= x_norm(b, x);
  DenseMatrix s(20, 2);
  s.col(0) = 2.0 * a;
  s.col(1) = b;
  const auto f = rom::pod_compress(s, x, rom::PodOptions{2, 1e-4, 1e-22});
  CHECK(f.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(f.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(f.retained_energy == 1.0);
  CHECK((f.modes.transpose() * (x * f.modes) - DenseMatrix::Identity(2, 2)).norm() <= 1e-12);
  CHECK(std::abs(std::abs(f.modes.col(0).dot(x * a)) - 1.0) <= 1e-12);
}

TEST_CASE("POD of random snapshots") {
  const SparseMatrix x = spd_matrix(60);
  std::mt19937_64 rng(3);
  DenseMatrix s(60, 12);
  for (int j = 0; j < 12; ++j) s.col(j) = fixtures::random_vector(60, rng) * std::pow(0.3, j);
  const auto f = rom::pod_compress(s, x, rom::PodOptions{12, 1e-4, 1e-22});
  CHECK(f.rank == 12);
  CHECK(f.retained_energy == doctest::Approx(1.0).epsilon(1e-15));
  for (int i = 1; i < 12; ++i) CHECK(f.eigenvalues[i - 1] >= f.eigenvalues[i]);
  CHECK(f.eigenvalues.minCoeff() >= 0.0);
  CHECK((f.modes.transpose() * (x * f.modes) - DenseMatrix::Identity(12, 12)).norm() <= 1e-10);

  // Same eigenvalues as the weighted correlation matrix.
  const DenseMatrix c = s.transpose() * (x * s) / 12.0;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> e(c);
  for (int i = 0; i < 12; ++i) CHECK(f.eigenvalues[i] == doctest::Approx(e.eigenvalues()[11 - i]).epsilon(1e-8));

  const auto part = rom::pod_compress(s, x, rom::PodOptions{4, 1e-4, 1e-22});
  CHECK(part.modes.cols() == 4);
  CHECK(part.retained_energy == doctest::Approx(f.eigenvalues.head(4).sum() / f.eigenvalues.sum()));
  CHECK_THROWS_AS(rom::pod_compress(s, spd_matrix(10), rom::PodOptions{}), DimensionMismatch);
}

TEST_CASE("orthonormalize") {
  const SparseMatrix x = spd_matrix(15);
  std::mt19937_64 rng(4);
  DenseMatrix v(15, 4);
  for (int j = 0; j < 3; ++j) v.col(j) = fixtures::random_vector(15, rng);
  v.col(3) = v.col(0) - 2.0 * v.col(2);
  const DenseMatrix q = rom::orthonormalize(v, x);
  CHECK(q.cols() == 3);
  CHECK((q.transpose() * (x * q) - DenseMatrix::Identity(3, 3)).norm() <= 1e-13);
  const DenseMatrix more = rom::orthonormalize(DenseMatrix(fixtures::random_vector(15, rng)), x, &q);
  CHECK((q.transpose() * (x * more)).norm() <= 1e-13);
}

TEST_CASE("snapshots") {
  const auto& m = fixtures::stokes_tube();
  rom::TrainingSet one;
  one.points = {mu1(71.0)};
  const auto s = rom::collect_snapshots(m, one);
  CHECK(s.size() == 1);
  CHECK(s.v.cols() == 1);
  CHECK(s.v.rows() == m.spaces().n_v);
  CHECK(s.u.rows() == m.spaces().n_u);

  rom::TrainingSet twice;
  twice.points = {mu1(74.0), mu1(74.0)};
  const auto t = rom::collect_snapshots(m, twice);
  CHECK((t.v.col(0).array() == t.v.col(1).array()).all());
  CHECK((t.q.col(0).array() == t.q.col(1).array()).all());

  const auto& o = stokes_offline();
  for (int k = 0; k < o.snaps.size(); ++k) {
    optctrl::OcpSolution sol;
    sol.v_hom = o.snaps.v.col(k);
    sol.p = o.snaps.p.col(k);
    sol.u = o.snaps.u.col(k);
    sol.w = o.snaps.w.col(k);
    sol.q = o.snaps.q.col(k);
    const Vector& mu = o.snaps.mu[static_cast<std::size_t>(k)];
    const Vector r = optctrl::kkt_residual(m, mu, optctrl::pack(m, sol));
    CHECK(r.norm() <= 1e-9 * optctrl::assemble_kkt(m, mu).rhs.norm());
  }
}

TEST_CASE("all snapshots failing") {
  optctrl::OcpConfig cfg;
  cfg.equation = optctrl::StateEquation::navier_stokes;
  cfg.newton.max_iter = 1;
  cfg.newton.tol_rel = 1e-300;
  cfg.newton.tol_abs = 0.0;
  const optctrl::FullOrderModel m(fixtures::small_tube(), cfg);
  rom::TrainingSet t;
  t.points = {mu1(75.0)};
  CHECK_THROWS_AS(rom::collect_snapshots(m, t), AllSnapshotsFailed);
}

TEST_CASE("supremizers") {
  const auto& m = fixtures::stokes_tube();
  const auto& sp = m.spaces();
  const auto& ops = m.operators();
  const auto& pod = stokes_offline().pod;
  const DenseMatrix& t = pod.state_sup.raw;
  REQUIRE(t.cols() == pod.p.modes.cols());
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vector v = sp.free.extend(fixtures::random_vector(sp.free.size(), rng));
    for (Eigen::Index n = 0; n < t.cols(); ++n) {
      const double lhs = t.col(n).dot(ops.X_v * v);
      const double rhs = pod.p.modes.col(n).dot(ops.B * v);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
  for (int d : sp.dirichlet_dofs) CHECK(t(d, 0) == 0.0);
  const auto zero = rom::compute_supremizers(m, DenseMatrix::Zero(sp.n_p, 1));
  CHECK(zero.raw.norm() == 0.0);
  CHECK(zero.orthonormal.cols() == 0);
}

TEST_CASE("reduced basis bookkeeping and projection") {
  const auto& m = fixtures::stokes_tube();
  const auto& ops = m.operators();
  const auto& pod = stokes_offline().pod;
  CHECK(pod.v.rank == 2);
  CHECK_FALSE(pod.warnings.empty());
  const auto rm = rom::build_reduced_model(m, pod, 2);
  const auto& b = rm.basis;
  CHECK(b.m == 8);
  CHECK(b.pressure_dim() == 4);
  CHECK(b.control_dim() == 2);
  CHECK(b.num_liftings == 1);
  CHECK(b.dimension() == 13 * 2 + 1);
  CHECK(rm.ops.tensor.empty());

  const auto d = b.velocity_dim();
  CHECK((rm.ops.X - DenseMatrix::Identity(d, d)).norm() <= 1e-10);
  CHECK((b.P.transpose() * (ops.X_p * b.P) - DenseMatrix::Identity(4, 4)).norm() <= 1e-10);
  CHECK((b.U.transpose() * (ops.N_c * b.U) - DenseMatrix::Identity(2, 2)).norm() <= 1e-10);
  CHECK((rm.ops.M - b.Y.transpose() * (DenseMatrix(ops.M) * b.Y)).norm() <= 1e-10 * rm.ops.M.norm());
  CHECK((rm.ops.B - b.P.transpose() * (DenseMatrix(ops.B) * b.Y)).norm() <= 1e-10 * rm.ops.B.norm());
  const Vector lift = m.lifting(mu1(75.0));
  const Vector coef = b.Y.transpose() * (ops.X_v * lift);
  CHECK((b.Y * coef - lift).norm() <= 1e-10 * lift.norm());
  CHECK((coef.tail(1) - b.theta * mu1(75.0)).norm() <= 1e-10 * coef.norm());

  CHECK(rom::reduced_inf_sup(b, ops) >= 1e-6);
  CHECK_THROWS_AS(rom::build_reduced_basis(m, pod, 0), ConfigError);
}

TEST_CASE("Stokes training reproduction") {
  const auto& m = fixtures::stokes_tube();
  const auto& o = stokes_offline();
  const auto rm = rom::build_reduced_model(m, o.pod, o.pod.v.rank);
  for (int k = 0; k < o.snaps.size(); ++k) {
    const Vector& mu = o.snaps.mu[static_cast<std::size_t>(k)];
    const auto r = rom::solve_reduced(rm, mu);
    CHECK(r.iterations == 0);
    CHECK(r.J == doctest::Approx(o.snaps.J[static_cast<std::size_t>(k)]).epsilon(1e-8));
    const auto full = optctrl::solve_stokes_ocp(m, mu);
    const auto e = rom::compute_errors(full, rom::reconstruct(rm, r), m.operators());
    CHECK(e.E_T_rel <= 1e-7);
  }
  CHECK_THROWS_AS(rom::solve_reduced(rm, mu1(60.0)), ParameterOutOfDomain);
}

TEST_CASE("error metrics") {
  const auto& m = fixtures::stokes_tube();
  const auto& ops = m.operators();
  const auto full = optctrl::solve_stokes_ocp(m, mu1(76.0));
  const auto zero = rom::compute_errors(full, full, ops);
  CHECK(zero.E_T == 0.0);
  CHECK(zero.E_J == 0.0);

  std::mt19937_64 rng(6);
  Vector dv = fixtures::random_vector(full.v.size(), rng);
  dv /= std::sqrt(dv.dot(ops.X_v * dv));
  auto pert = full;
  pert.v += dv;
  const auto e = rom::compute_errors(full, pert, ops);
  CHECK(e.E_v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.E_s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.E_u == 0.0);
  CHECK(e.E_z == 0.0);

  pert.u += fixtures::random_vector(full.u.size(), rng);
  pert.q += fixtures::random_vector(full.q.size(), rng);
  pert.J += 3.0;
  const auto g = rom::compute_errors(full, pert, ops);
  const double sum = g.E_s * g.E_s + g.E_z * g.E_z + g.E_u * g.E_u;
  CHECK(g.E_T * g.E_T == doctest::Approx(sum).epsilon(1e-14));
  CHECK(g.E_J == doctest::Approx(3.0));
  CHECK(g.E_q == doctest::Approx(std::sqrt((pert.q - full.q).dot(ops.X_p * (pert.q - full.q)))));

  auto bad = full;
  bad.u.resize(3);
  CHECK_THROWS_AS(rom::compute_errors(full, bad, ops), DimensionMismatch);
}

TEST_CASE("convection tensor matches direct quadrature") {
  const auto& m = fixtures::ns_tube();
  const auto& rm = ns_reduced();
  const auto& y = rm.basis.Y;
  const auto d = y.cols();
  REQUIRE(static_cast<Eigen::Index>(rm.ops.tensor.size()) == d);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Eigen::Index> pick(0, d - 1);
  for (int s = 0; s < 10; ++s) {
    const auto i = pick(rng), j = pick(rng), k = pick(rng);
    const double direct = fixtures::direct_trilinear(m.spaces(), y.col(j), y.col(k), y.col(i));
    CHECK(rm.ops.tensor[static_cast<std::size_t>(i)](j, k) == doctest::Approx(direct).epsilon(1e-10).scale(1e-10));
  }
}

TEST_CASE("reduced Jacobian matches finite differences") {
  const auto& rm = ns_reduced();
  const Vector mu = mu1(77.0);
  const auto sol = rom::solve_reduced(rm, mu);
  std::mt19937_64 rng(8);
  const Vector z = rom::pack(rm, sol) + 0.1 * fixtures::random_vector(rom::pack(rm, sol).size(), rng);
  const DenseMatrix j = rom::reduced_jacobian(rm, mu, z);
  DenseMatrix fd(j.rows(), j.cols());
  for (Eigen::Index c = 0; c < z.size(); ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(z[c]));
    Vector zp = z, zm = z;
    zp[c] += h;
    zm[c] -= h;
    fd.col(c) = (rom::reduced_residual(rm, mu, zp) - rom::reduced_residual(rm, mu, zm)) / (2 * h);
  }
  CHECK((fd - j).norm() <= 1e-5 * j.norm());
}

TEST_CASE("reduced Navier-Stokes solve") {
  const auto& m = fixtures::ns_tube();
  const auto& rm = ns_reduced();
  const Vector mu = mu1(73.5);
  const auto t = rom::solve_reduced(rm, mu);
  CHECK(t.iterations >= 1);
  CHECK(t.residual_history.back() <= std::max(1e-12 * t.residual_history.front(), 1e-13));
  const auto r = rom::solve_reduced(rm, mu, rom::ConvectionMode::reassemble, &m);
  CHECK((rom::pack(rm, t) - rom::pack(rm, r)).norm() <= 1e-8 * rom::pack(rm, t).norm());
  CHECK(rom::reduced_objective(rm, t) == doctest::Approx(t.J).epsilon(1e-14));
  CHECK_THROWS_AS(rom::solve_reduced(rm, mu, rom::ConvectionMode::reassemble), ConfigError);

  const auto full = optctrl::solve_navier_stokes_ocp(m, mu);
  const auto e = rom::compute_errors(full, rom::reconstruct(rm, t), m.operators());
  CHECK(e.E_T_rel <= 1e-3);
}

TEST_CASE("artifact round trip") {
  const auto& rm = ns_reduced();
  rom::OfflineArtifact a;
  a.model = rm;
  a.config_hash = 0xfedcba9876543210ull;
  a.training = ns_offline().training;
  a.eigenvalues = {ns_offline().pod.v.eigenvalues, ns_offline().pod.p.eigenvalues, ns_offline().pod.u.eigenvalues,
                   ns_offline().pod.w.eigenvalues, ns_offline().pod.q.eigenvalues};
  a.offline_seconds = 1.25;
  const auto path = std::filesystem::temp_directory_path() / "ocrom_test_artifact.rb";
  rom::save_artifact(path, a);
  const auto b = rom::load_artifact(path);
  std::filesystem::remove(path);
  CHECK(b.config_hash == a.config_hash);
  CHECK(b.offline_seconds == a.offline_seconds);
  CHECK(b.model.basis.dimension() == rm.basis.dimension());
  CHECK((b.model.ops.M.array() == rm.ops.M.array()).all());
  for (std::size_t i = 0; i < rm.ops.tensor.size(); ++i)
    CHECK((b.model.ops.tensor[i].array() == rm.ops.tensor[i].array()).all());
  const Vector mu = mu1(71.0);
  CHECK(rom::solve_reduced(b.model, mu).J == rom::solve_reduced(rm, mu).J);

  CHECK_THROWS_AS(rom::load_artifact("/nonexistent/artifact.rb"), MissingArtifact);
  const auto junk = std::filesystem::temp_directory_path() / "ocrom_junk.rb";
  { std::ofstream(junk) << "not an artifact\n"; }
  CHECK_THROWS_AS(rom::load_artifact(junk), IoError);
  std::filesystem::remove(junk);
  CHECK(rom::fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(rom::fnv1a("a") == 0xaf63dc4c8601ec8cull);
}
