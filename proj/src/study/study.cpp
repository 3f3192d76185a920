#include "ocrom/study/study.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "ocrom/errors.hpp"
#include "ocrom/io/records.hpp"

namespace ocrom::study {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string describe(const numerics::Vector& mu) {
  std::ostringstream o;
  o << '(';
  for (Eigen::Index i = 0; i < mu.size(); ++i) o << (i ? ", " : "") << mu[i];
  o << ')';
  return o.str();
}

std::vector<double> as_std(const numerics::Vector& v) { return {v.data(), v.data() + v.size()}; }

void accumulate(rom::ErrorReport& mean, rom::ErrorReport& max, const rom::ErrorReport& e, double weight) {
  auto visit = [&](double rom::ErrorReport::*f) {
    mean.*f += weight * (e.*f);
    max.*f = std::max(max.*f, e.*f);
  };
  for (auto f : {&rom::ErrorReport::E_v, &rom::ErrorReport::E_p, &rom::ErrorReport::E_u, &rom::ErrorReport::E_w,
                 &rom::ErrorReport::E_q, &rom::ErrorReport::E_s, &rom::ErrorReport::E_z, &rom::ErrorReport::E_s_rel,
                 &rom::ErrorReport::E_z_rel, &rom::ErrorReport::E_u_rel, &rom::ErrorReport::E_T,
                 &rom::ErrorReport::E_T_rel, &rom::ErrorReport::E_J})
    visit(f);
}

double orthonormality_error(const numerics::DenseMatrix& basis, const numerics::SparseMatrix& x) {
  if (basis.cols() == 0) return 0.0;
  const numerics::DenseMatrix g = basis.transpose() * (x * basis);
  return (g - numerics::DenseMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

const rom::FieldPod& field(const rom::PodBasis& pod, int k) {
  const rom::FieldPod* f[] = {&pod.v, &pod.p, &pod.u, &pod.w, &pod.q};
  return *f[k];
}

void fill_pod_summary(StudyReport& r, const rom::PodBasis& pod) {
  for (int k = 0; k < 5; ++k) {
    const auto& f = field(pod, k);
    r.eigenvalues[static_cast<std::size_t>(k)] = as_std(f.eigenvalues);
    r.retained_energy[static_cast<std::size_t>(k)] = f.retained_energy;
    r.rank[static_cast<std::size_t>(k)] = f.rank;
  }
  r.warnings.insert(r.warnings.end(), pod.warnings.begin(), pod.warnings.end());
}

std::filesystem::path field_path(const StudyConfig& c, std::size_t test_index, int n) {
  return c.output / "fields" /
         (n == 0 ? "test" + std::to_string(test_index) + "_full.bin"
                 : "test" + std::to_string(test_index) + "_n" + std::to_string(n) + ".bin");
}

}  // namespace

std::shared_ptr<optctrl::FullOrderModel> build_model(const StudyConfig& config) {
  auto mesh = std::make_shared<const mesh::Mesh>(build_mesh(config.mesh));
  return std::make_shared<optctrl::FullOrderModel>(mesh, config.problem);
}

OfflineResult run_offline(const StudyConfig& config) { return run_offline(config, build_model(config)); }

OfflineResult run_offline(const StudyConfig& config, std::shared_ptr<optctrl::FullOrderModel> model) {
  OfflineResult out;
  out.model = std::move(model);
  const auto t0 = Clock::now();
  const auto training = make_samples(config.training, out.model->config().domain);
  for (const auto& mu : training.points) out.model->check_parameter(mu);
  out.snapshots = rom::collect_snapshots(*out.model, training);
  out.pod = rom::build_pod(*out.model, out.snapshots, config.pod);
  for (const auto& [index, reason] : out.snapshots.failures)
    out.pod.warnings.push_back("snapshot " + std::to_string(index) + " failed: " + reason);
  auto& a = out.artifact;
  a.model = rom::build_reduced_model(*out.model, out.pod, config.pod.n_max, config.supremizers);
  a.offline_seconds = seconds_since(t0) + out.model->assembly_seconds();
  a.config_hash = config.hash();
  a.training = training;
  for (int k = 0; k < 5; ++k) a.eigenvalues[static_cast<std::size_t>(k)] = field(out.pod, k).eigenvalues;
  return out;
}

PodCheck check_pod(const rom::PodBasis& pod, const rom::ReducedModel& reduced, const fem::OperatorSet& ops) {
  PodCheck c;
  for (int k = 0; k < 5; ++k) {
    const auto& f = field(pod, k);
    for (Eigen::Index i = 0; i < f.eigenvalues.size(); ++i) {
      if (f.eigenvalues[i] < 0.0) c.nonnegative = false;
      if (i > 0 && f.eigenvalues[i] > f.eigenvalues[i - 1]) c.descending = false;
    }
    c.min_retained_energy = std::min(c.min_retained_energy, f.retained_energy);
  }
  c.energy_ok = c.min_retained_energy >= 1.0 - pod.options.eps_tol;
  const auto& b = reduced.basis;
  c.max_orthonormality_error = std::max({orthonormality_error(b.Y, ops.X_v), orthonormality_error(b.P, ops.X_p),
                                         orthonormality_error(b.U, ops.N_c)});
  c.orthonormal = c.max_orthonormality_error <= 1e-10;
  return c;
}

StudyReport run_error_study(const StudyConfig& config) { return run_error_study(config, run_offline(config)); }

StudyReport run_error_study(const StudyConfig& config, const OfflineResult& off) {
  const auto& model = *off.model;
  const auto& ops = model.operators();
  StudyReport r;
  r.kind = "errors";
  r.config_hash = config.hash();
  r.training_seed = config.training.seed;
  r.test_seed = config.test.seed;
  r.training_size = off.snapshots.size();
  r.full_dofs = static_cast<int>(2 * (model.spaces().free.size() + model.spaces().n_p) + model.spaces().n_u);
  r.offline_seconds = off.artifact.offline_seconds;
  r.environment = environment_record();
  fill_pod_summary(r, off.pod);

  const auto test = make_samples(config.test, model.config().domain);
  r.test_size = static_cast<int>(test.points.size());
  std::vector<optctrl::OcpSolution> full;
  for (std::size_t t = 0; t < test.points.size(); ++t) {
    const auto t0 = Clock::now();
    try {
      full.push_back(optctrl::solve_ocp(model, test.points[t]));
    } catch (const SolverError& e) {
      throw SolverFailure("test point " + std::to_string(t) + " mu = " + describe(test.points[t]) + ": " + e.what());
    }
    TimingRow row;
    row.mu = as_std(test.points[t]);
    row.full_seconds = seconds_since(t0) + model.assembly_seconds();
    r.timings.push_back(row);
    if (config.dump_fields) write_fields(field_path(config, t, 0), full.back());
  }

  r.pod_check = check_pod(off.pod, off.artifact.model, ops);
  const auto sweep = config.sweep_values();
  const int n_top = sweep.empty() ? 0 : *std::max_element(sweep.begin(), sweep.end());
  for (int n : sweep) {
    const rom::ReducedModel rm =
        n == config.pod.n_max ? off.artifact.model : rom::build_reduced_model(model, off.pod, n, config.supremizers);
    const auto check = check_pod(off.pod, rm, ops);
    r.pod_check.max_orthonormality_error = std::max(r.pod_check.max_orthonormality_error, check.max_orthonormality_error);
    r.pod_check.orthonormal = r.pod_check.orthonormal && check.orthonormal;
    ErrorRow row;
    row.n = n;
    row.dimension = rm.basis.dimension();
    row.inf_sup = rom::reduced_inf_sup(rm.basis, ops);
    const double w = full.empty() ? 0.0 : 1.0 / static_cast<double>(full.size());
    for (std::size_t t = 0; t < full.size(); ++t) {
      const auto t0 = Clock::now();
      rom::ReducedSolution red;
      try {
        red = rom::solve_reduced(rm, test.points[t]);
      } catch (const SolverError& e) {
        throw SolverFailure("reduced solve n = " + std::to_string(n) + ", test point " + std::to_string(t) +
                            " mu = " + describe(test.points[t]) + ": " + e.what());
      }
      const double online = seconds_since(t0);
      const auto t1 = Clock::now();
      const auto lifted = rom::reconstruct(rm, red);
      const double rebuild = seconds_since(t1);
      accumulate(row.mean, row.max, rom::compute_errors(full[t], lifted, ops), w);
      if (config.dump_fields) write_fields(field_path(config, t, n), lifted);
      if (n == n_top) {
        auto& tr = r.timings[t];
        tr.online_seconds = online;
        tr.reconstruct_seconds = rebuild;
        tr.speedup = tr.full_seconds / (online + rebuild);
        tr.speedup_J = tr.full_seconds / online;
        tr.newton_iterations = red.iterations;
      }
    }
    r.rows.push_back(row);
  }
  summarize_timings(r);
  if (!r.pod_check.energy_ok)
    r.warnings.push_back("retained energy " + std::to_string(r.pod_check.min_retained_energy) + " below 1 - eps_tol");
  if (!r.pod_check.descending || !r.pod_check.nonnegative || !r.pod_check.orthonormal)
    throw InvariantViolation("POD check failed (eigenvalue order/sign or basis orthonormality)");

  write_csv(r, config.output / "errors.csv");
  write_json(r, config.output / "errors.json");
  return r;
}

StudyReport run_speedup_study(const StudyConfig& config, const std::filesystem::path& artifact,
                              const std::vector<numerics::Vector>& mus) {
  if (mus.empty()) throw ConfigError("speedup study needs at least one parameter value");
  const auto a = rom::load_artifact(artifact);
  if (a.config_hash != config.hash())
    throw ConfigError("artifact " + artifact.string() + " was built from a different configuration");
  const auto model = build_model(config);
  return run_speedup_study(config, *model, a, mus);
}

StudyReport run_speedup_study(const StudyConfig& config, const optctrl::FullOrderModel& model,
                              const rom::OfflineArtifact& a, const std::vector<numerics::Vector>& mus) {
  if (mus.empty()) throw ConfigError("speedup study needs at least one parameter value");
  if (a.model.basis.Y.rows() != model.spaces().n_v)
    throw ConfigError("artifact basis does not match the mesh of this configuration");
  StudyReport r;
  r.kind = "speedup";
  r.config_hash = a.config_hash;
  r.training_seed = a.training.seed;
  r.training_size = static_cast<int>(a.training.points.size());
  r.test_size = static_cast<int>(mus.size());
  r.test_seed = config.test.seed;
  r.full_dofs = static_cast<int>(2 * (model.spaces().free.size() + model.spaces().n_p) + model.spaces().n_u);
  r.offline_seconds = a.offline_seconds;
  r.environment = environment_record();
  for (int k = 0; k < 5; ++k) r.eigenvalues[static_cast<std::size_t>(k)] = as_std(a.eigenvalues[static_cast<std::size_t>(k)]);

  for (const auto& mu : mus) {
    model.check_parameter(mu);
    TimingRow row;
    row.mu = as_std(mu);
    model.clear_cache();
    auto t0 = Clock::now();
    try {
      optctrl::solve_ocp(model, mu);
    } catch (const SolverError& e) {
      throw SolverFailure("full solve at mu = " + describe(mu) + ": " + e.what());
    }
    row.full_seconds = seconds_since(t0) + model.assembly_seconds();
    t0 = Clock::now();
    const auto red = rom::solve_reduced(a.model, mu);
    row.online_seconds = seconds_since(t0);
    t0 = Clock::now();
    const auto lifted = rom::reconstruct(a.model, red);
    row.reconstruct_seconds = seconds_since(t0);
    row.speedup = row.full_seconds / (row.online_seconds + row.reconstruct_seconds);
    row.speedup_J = row.full_seconds / row.online_seconds;
    row.newton_iterations = red.iterations;
    r.timings.push_back(row);
  }
  summarize_timings(r);
  write_json(r, config.output / "speedup.json");
  return r;
}

void write_fields(const std::filesystem::path& path, const optctrl::OcpSolution& s) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  io::RecordWriter w(path, "ocrom-fields 1");
  w.vector("mu", s.mu);
  w.vector("v", s.v);
  w.vector("p", s.p);
  w.vector("u", s.u);
  w.vector("w", s.w);
  w.vector("q", s.q);
  w.scalar("J", s.J);
  w.close();
}

optctrl::OcpSolution read_fields(const std::filesystem::path& path) {
  const io::RecordReader r(path, "ocrom-fields 1");
  optctrl::OcpSolution s;
  s.mu = r.vector("mu");
  s.v = r.vector("v");
  s.p = r.vector("p");
  s.u = r.vector("u");
  s.w = r.vector("w");
  s.q = r.vector("q");
  s.J = r.scalar("J");
  return s;
}

double cross_check(const StudyConfig& config, const nlohmann::json& report) {
  const auto model = build_model(config);
  const auto& ops = model->operators();
  double worst = 0.0;
  try {
    const int tests = report.at("test").at("size").get<int>();
    for (const auto& row : report.at("rows")) {
      const int n = row.at("n").get<int>();
      rom::ErrorReport mean, max;
      for (int t = 0; t < tests; ++t) {
        const auto full = read_fields(field_path(config, static_cast<std::size_t>(t), 0));
        const auto red = read_fields(field_path(config, static_cast<std::size_t>(t), n));
        accumulate(mean, max, rom::compute_errors(full, red, ops), 1.0 / tests);
      }
      const auto& stored = row.at("mean");
      for (auto [name, value] : {std::pair{"E_v", mean.E_v}, {"E_p", mean.E_p}, {"E_u", mean.E_u},
                                 {"E_w", mean.E_w}, {"E_q", mean.E_q}, {"E_T", mean.E_T},
                                 {"E_T_rel", mean.E_T_rel}, {"E_J", mean.E_J}}) {
        const double s = stored.at(name).get<double>();
        const double scale = std::max(std::abs(s), std::abs(value));
        if (scale > 0.0) worst = std::max(worst, std::abs(s - value) / scale);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  return worst;
}

}  // namespace ocrom::study
