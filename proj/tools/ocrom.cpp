#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ocrom/errors.hpp"
#include "ocrom/mesh/generators.hpp"
#include "ocrom/mesh/mesh_io.hpp"
#include "ocrom/study/study.hpp"

using namespace ocrom;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

numerics::Vector parse_mu(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad parameter value '" + item + "'");
    }
  }
  if (values.empty()) throw ConfigError("empty parameter value");
  return Eigen::Map<numerics::Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void print_mesh_summary(const mesh::Mesh& m) {
  std::map<int, int> per_tag;
  for (const auto& b : m.boundary()) ++per_tag[b.tag];
  std::printf("nodes %zu\ntets %zu\nboundary triangles %zu\n", m.num_nodes(), m.num_tets(), m.boundary().size());
  for (const auto& [tag, count] : per_tag) std::printf("  tag %d: %d\n", tag, count);
  std::printf("centerline branches %zu\nvolume %.10g\nmin dihedral angle %.4g deg\n", m.centerlines().size(),
              m.volume(), mesh::min_dihedral_angle(m));
}

void print_solution(const optctrl::OcpSolution& s, double seconds) {
  std::printf("J %.17g\niterations %d\n|u|_2 %.10g\nseconds %.6g\n", s.J, s.iterations, s.u.norm(), seconds);
}

void print_rows(const study::StudyReport& r) {
  std::printf("%4s %5s %12s %12s %12s\n", "n", "dim", "E_T_rel", "E_J", "beta_N");
  for (const auto& row : r.rows)
    std::printf("%4d %5d %12.4e %12.4e %12.4e\n", row.n, row.dimension, row.mean.E_T_rel, row.mean.E_J, row.inf_sup);
}

int run(int argc, char** argv) {
  CLI::App app{"Reduced-order optimal flow control"};
  app.require_subcommand(1);

  auto* mesh_cmd = app.add_subcommand("mesh", "Generate or inspect meshes");
  mesh_cmd->require_subcommand(1);
  auto* gen = mesh_cmd->add_subcommand("gen", "Generate a mesh");
  std::string generator = "tube", config_path, out_path;
  double radius = 1.0, length = 3.0, bend_radius = 3.0, bend_angle = 90.0, h = 0.4;
  gen->add_option("--generator", generator, "tube, bent_tube or graft")->check(CLI::IsMember({"tube", "bent_tube", "graft"}));
  gen->add_option("--radius", radius);
  gen->add_option("--length", length);
  gen->add_option("--bend-radius", bend_radius);
  gen->add_option("--bend-angle", bend_angle);
  gen->add_option("--resolution", h, "target edge length");
  gen->add_option("--config,--spec", config_path, "take the [mesh] section from a study config");
  gen->add_option("-o,--out", out_path)->required();
  auto* check = mesh_cmd->add_subcommand("check", "Validate a mesh file and print statistics");
  std::string mesh_file;
  check->add_option("file", mesh_file)->required();

  auto* solve = app.add_subcommand("solve", "Full-order optimal control solve");
  std::string mu_text, fields_out;
  solve->add_option("--config", config_path)->required();
  solve->add_option("--mu", mu_text, "comma-separated parameter values")->required();
  solve->add_option("--fields", fields_out, "write the solution fields here");
  std::string json_out;
  solve->add_option("--out", json_out, "write a JSON summary here");

  auto* offline = app.add_subcommand("offline", "Build the reduced model");
  std::string artifact_path;
  offline->add_option("--config", config_path)->required();
  offline->add_option("--artifact", artifact_path, "default: <output>/artifact.rb");

  auto* online = app.add_subcommand("online", "Solve the reduced problem");
  online->add_option("--artifact", artifact_path)->required();
  online->add_option("--mu", mu_text)->required();

  auto* study_cmd = app.add_subcommand("study", "Error and speedup studies");
  study_cmd->require_subcommand(1);
  auto* errors = study_cmd->add_subcommand("errors", "Error decay over the basis size sweep");
  errors->add_option("--config", config_path)->required();
  auto* speedup = study_cmd->add_subcommand("speedup", "Full versus online wall time");
  std::vector<std::string> mu_list;
  speedup->add_option("--config", config_path)->required();
  speedup->add_option("--artifact", artifact_path, "default: <output>/artifact.rb");
  speedup->add_option("--mu", mu_list, "parameter values (repeatable); default: the test set");

  auto* exp = app.add_subcommand("export", "Convert or verify a study report");
  std::string report_path, format = "csv";
  bool verify = false;
  exp->add_option("--report", report_path)->required();
  exp->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  exp->add_option("-o,--out", out_path);
  exp->add_flag("--verify", verify, "recompute errors from field dumps (needs --config)");
  exp->add_option("--config", config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  using Clock = std::chrono::steady_clock;
  if (gen->parsed()) {
    study::MeshSource src;
    if (!config_path.empty()) {
      src = study::load_config(config_path).mesh;
    } else {
      src.kind = generator == "tube"        ? study::MeshSource::Kind::tube
                 : generator == "bent_tube" ? study::MeshSource::Kind::bent_tube
                                            : study::MeshSource::Kind::graft;
      src.radius = radius;
      src.length = length;
      src.bend_radius = bend_radius;
      src.bend_angle = bend_angle;
      src.resolution = h;
    }
    const auto m = study::build_mesh(src);
    mesh::write_mesh(m, out_path);
    print_mesh_summary(m);
  } else if (check->parsed()) {
    print_mesh_summary(mesh::load_mesh(mesh_file));
  } else if (solve->parsed()) {
    const auto cfg = study::load_config(config_path);
    const auto model = study::build_model(cfg);
    const auto mu = parse_mu(mu_text);
    model->check_parameter(mu);
    const auto t0 = Clock::now();
    const auto s = optctrl::solve_ocp(*model, mu);
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count() + model->assembly_seconds();
    print_solution(s, seconds);
    if (!fields_out.empty()) study::write_fields(fields_out, s);
    if (!json_out.empty()) {
      nlohmann::json j;
      j["mu"] = std::vector<double>(s.mu.data(), s.mu.data() + s.mu.size());
      j["J"] = s.J;
      j["residual"] = s.residual;
      j["iterations"] = s.iterations;
      j["residual_history"] = s.residual_history;
      j["seconds"] = seconds;
      j["assembly_seconds"] = model->assembly_seconds();
      j["dofs"] = {{"v", s.v.size()}, {"p", s.p.size()}, {"u", s.u.size()}};
      std::ofstream out(json_out, std::ios::binary);
      if (!(out << study::dump_json(j))) throw IoError("cannot write " + json_out);
    }
  } else if (offline->parsed()) {
    const auto cfg = study::load_config(config_path);
    const auto res = study::run_offline(cfg);
    const auto path = artifact_path.empty() ? cfg.output / "artifact.rb" : std::filesystem::path(artifact_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    rom::save_artifact(path, res.artifact);
    const auto& b = res.artifact.model.basis;
    std::printf("snapshots %d (failed %zu)\nreduced dimension %d (velocity %d, pressure %d, control %d, liftings %d)\n",
                res.snapshots.size(), res.snapshots.failures.size(), b.dimension(), b.m, b.pressure_dim(),
                b.control_dim(), b.num_liftings);
    std::printf("offline seconds %.6g\nartifact %s\n", res.artifact.offline_seconds, path.string().c_str());
    for (const auto& w : res.pod.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  } else if (online->parsed()) {
    const auto a = rom::load_artifact(artifact_path);
    const auto mu = parse_mu(mu_text);
    const auto t0 = Clock::now();
    const auto s = rom::solve_reduced(a.model, mu);
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("J %.17g\niterations %d\nreduced dimension %d\nseconds %.6g\n", s.J, s.iterations,
                a.model.basis.dimension(), dt);
  } else if (errors->parsed()) {
    const auto cfg = study::load_config(config_path);
    const auto r = study::run_error_study(cfg);
    print_rows(r);
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("wrote %s\n", (cfg.output / "errors.csv").string().c_str());
  } else if (speedup->parsed()) {
    const auto cfg = study::load_config(config_path);
    const auto path = artifact_path.empty() ? cfg.output / "artifact.rb" : std::filesystem::path(artifact_path);
    std::vector<numerics::Vector> mus;
    for (const auto& t : mu_list) mus.push_back(parse_mu(t));
    if (mu_list.empty()) {
      const auto a = rom::load_artifact(path);
      mus = study::make_samples(cfg.test, a.model.domain).points;
    }
    const auto r = study::run_speedup_study(cfg, path, mus);
    std::printf("full mean %.6g s\nonline mean %.6g s (max %.6g s)\nspeedup mean %.6g (max %.6g)\n"
                "J speedup mean %.6g (max %.6g)\n",
                r.full_mean_seconds, r.online_mean_seconds, r.online_max_seconds, r.speedup_mean, r.speedup_max,
                r.speedup_J_mean, r.speedup_J_max);
  } else if (exp->parsed()) {
    const auto report = study::read_json(report_path);
    if (verify) {
      if (config_path.empty()) throw ConfigError("--verify needs --config");
      const double worst = study::cross_check(study::load_config(config_path), report);
      std::printf("largest relative discrepancy %.3e\n", worst);
      if (worst > 1e-12) return kSolver;
    }
    const std::string text = format == "csv" ? study::csv_from_json(report) : study::dump_json(report);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!(out << text)) throw IoError("cannot write " + out_path);
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const UnknownTag& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const ParameterOutOfDomain& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const DegenerateGeometry& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const NonIntersectingBranches& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const DimensionMismatch& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
