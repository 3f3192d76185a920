#include "ocrom/study/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ocrom/errors.hpp"
#include "ocrom/mesh/mesh_io.hpp"
#include "ocrom/rom/artifact.hpp"

namespace ocrom::study {

namespace {

using boost::property_tree::ptree;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x)) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

rom::TrainingSet::Sampling to_sampling(const std::string& key, const std::string& v) {
  if (v == "random") return rom::TrainingSet::Sampling::random;
  if (v == "grid") return rom::TrainingSet::Sampling::grid;
  throw ConfigError(key + ": expected random or grid, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split(v, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto a = to_int(key, trim(item.substr(0, dash))), b = to_int(key, trim(item.substr(dash + 1)));
      if (b < a) throw ConfigError(key + ": empty range '" + item + "'");
      for (auto k = a; k <= b; ++k) out.push_back(static_cast<int>(k));
    } else {
      out.push_back(static_cast<int>(to_int(key, item)));
    }
  }
  return out;
}

class Section {
 public:
  Section(const ptree& root, const std::string& name, std::set<std::string> allowed) : name_(name) {
    auto it = root.find(name);
    if (it == root.not_found()) return;
    for (const auto& [key, value] : it->second) {
      if (!allowed.count(key)) throw ConfigError("[" + name + "] unknown key '" + key + "'");
      values_[key] = trim(value.data());
    }
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key) const { return values_.at(key); }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  void get(const std::string& key, double& out) const {
    if (has(key)) out = to_double(where(key), str(key));
  }
  void get(const std::string& key, int& out) const {
    if (has(key)) out = static_cast<int>(to_int(where(key), str(key)));
  }
  void get(const std::string& key, bool& out) const {
    if (has(key)) out = to_bool(where(key), str(key));
  }
  void get(const std::string& key, std::uint64_t& out) const {
    if (has(key)) {
      const auto v = to_int(where(key), str(key));
      if (v < 0) throw ConfigError(where(key) + ": must be nonnegative");
      out = static_cast<std::uint64_t>(v);
    }
  }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
};

void read_samples(const Section& s, SampleSpec& spec) {
  s.get("size", spec.size);
  s.get("seed", spec.seed);
  if (s.has("sampling")) spec.sampling = to_sampling(s.where("sampling"), s.str("sampling"));
}

std::string format(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

StudyConfig parse_config(const std::string& text) {
  ptree root;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::set<std::string> sections{"mesh", "problem", "newton", "training", "test", "pod", "study"};
  for (const auto& [name, child] : root) {
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
    if (child.empty() && !child.data().empty()) throw ConfigError("key '" + name + "' outside a section");
  }

  StudyConfig c;
  const Section m(root, "mesh", {"generator", "file", "radius", "length", "bend_radius", "bend_angle", "resolution"});
  if (m.has("file")) {
    c.mesh.kind = MeshSource::Kind::file;
    c.mesh.file = m.str("file");
    if (m.has("generator")) throw ConfigError("[mesh] give either file or generator");
  } else if (m.has("generator")) {
    const auto g = m.str("generator");
    if (g == "tube") c.mesh.kind = MeshSource::Kind::tube;
    else if (g == "bent_tube") c.mesh.kind = MeshSource::Kind::bent_tube;
    else if (g == "graft") c.mesh.kind = MeshSource::Kind::graft;
    else throw ConfigError("[mesh] generator: expected tube, bent_tube or graft, got '" + g + "'");
  }
  m.get("radius", c.mesh.radius);
  m.get("length", c.mesh.length);
  m.get("bend_radius", c.mesh.bend_radius);
  m.get("bend_angle", c.mesh.bend_angle);
  m.get("resolution", c.mesh.resolution);

  const Section p(root, "problem", {"equation", "viscosity", "v_const", "alpha", "inlet_groups", "domain", "body_force"});
  if (p.has("equation")) {
    const auto e = p.str("equation");
    if (e == "stokes") c.problem.equation = optctrl::StateEquation::stokes;
    else if (e == "navier-stokes") c.problem.equation = optctrl::StateEquation::navier_stokes;
    else throw ConfigError("[problem] equation: expected stokes or navier-stokes, got '" + e + "'");
  }
  p.get("viscosity", c.problem.viscosity);
  p.get("v_const", c.problem.v_const);
  p.get("alpha", c.problem.alpha);
  if (p.has("inlet_groups"))
    for (const auto& group : split(p.str("inlet_groups"), ';'))
      c.problem.inlet_groups.push_back(parse_int_list(p.where("inlet_groups"), group));
  if (p.has("domain"))
    for (const auto& interval : split(p.str("domain"), ';')) {
      const auto ends = split(interval, ',');
      if (ends.size() != 2) throw ConfigError("[problem] domain: expected 'lo, hi' intervals separated by ';'");
      c.problem.domain.push_back({to_double(p.where("domain"), ends[0]), to_double(p.where("domain"), ends[1])});
    }
  if (p.has("body_force")) {
    const auto parts = split(p.str("body_force"), ',');
    if (parts.size() != 3) throw ConfigError("[problem] body_force: expected three components");
    for (int k = 0; k < 3; ++k) c.problem.body_force[k] = to_double(p.where("body_force"), parts[static_cast<std::size_t>(k)]);
  }

  const Section n(root, "newton", {"tol_rel", "tol_abs", "max_iter"});
  n.get("tol_rel", c.problem.newton.tol_rel);
  n.get("tol_abs", c.problem.newton.tol_abs);
  n.get("max_iter", c.problem.newton.max_iter);

  read_samples(Section(root, "training", {"size", "sampling", "seed"}), c.training);
  read_samples(Section(root, "test", {"size", "sampling", "seed"}), c.test);

  const Section pod(root, "pod", {"n_max", "eps_tol", "eps_rank", "supremizers"});
  pod.get("n_max", c.pod.n_max);
  pod.get("eps_tol", c.pod.eps_tol);
  pod.get("eps_rank", c.pod.eps_rank);
  pod.get("supremizers", c.supremizers);

  const Section st(root, "study", {"sweep", "output", "dump_fields"});
  if (st.has("sweep")) c.sweep = parse_int_list(st.where("sweep"), st.str("sweep"));
  if (st.has("output")) c.output = st.str("output");
  st.get("dump_fields", c.dump_fields);

  c.validate();
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse_config(ss.str());
  if (c.mesh.kind == MeshSource::Kind::file && c.mesh.file.is_relative())
    c.mesh.file = path.parent_path() / c.mesh.file;
  return c;
}

void StudyConfig::validate() const {
  problem.validate();
  if (mesh.kind != MeshSource::Kind::file && !(mesh.resolution > 0.0 && mesh.radius > 0.0))
    throw ConfigError("[mesh] radius and resolution must be positive");
  if (mesh.kind == MeshSource::Kind::tube && !(mesh.length > 0.0)) throw ConfigError("[mesh] length must be positive");
  if (training.size < 1) throw ConfigError("[training] size must be at least 1");
  if (test.size < 0) throw ConfigError("[test] size must be nonnegative");
  if (training.sampling == rom::TrainingSet::Sampling::random && test.sampling == rom::TrainingSet::Sampling::random &&
      training.seed == test.seed)
    throw ConfigError("training and test sets share a seed; they would coincide");
  if (pod.n_max < 1) throw ConfigError("[pod] n_max must be positive");
  if (!(pod.eps_tol > 0.0 && pod.eps_tol < 1.0)) throw ConfigError("[pod] eps_tol must lie in (0, 1)");
  if (!(pod.eps_rank >= 0.0 && pod.eps_rank < 1.0)) throw ConfigError("[pod] eps_rank must lie in [0, 1)");
  const int samples = training.sampling == rom::TrainingSet::Sampling::grid
                          ? static_cast<int>(std::pow(training.size, std::max<std::size_t>(problem.domain.size(), 1)))
                          : training.size;
  for (int n : sweep_values()) {
    if (n < 1) throw ConfigError("[study] sweep values must be positive");
    if (n > pod.n_max) throw ConfigError("[study] sweep value " + std::to_string(n) + " exceeds n_max");
    if (n > samples) throw ConfigError("[study] sweep value " + std::to_string(n) + " exceeds the training set size");
  }
}

std::vector<int> StudyConfig::sweep_values() const {
  if (!sweep.empty()) return sweep;
  std::vector<int> all;
  for (int n = 1; n <= pod.n_max; ++n) all.push_back(n);
  return all;
}

std::string StudyConfig::canonical() const {
  std::ostringstream o;
  static const char* kinds[] = {"file", "tube", "bent_tube", "graft"};
  o << "mesh.kind=" << kinds[static_cast<int>(mesh.kind)] << '\n';
  if (mesh.kind == MeshSource::Kind::file) {
    o << "mesh.file=" << mesh.file.string() << '\n';
  } else {
    o << "mesh.radius=" << format(mesh.radius) << "\nmesh.resolution=" << format(mesh.resolution) << '\n';
    if (mesh.kind == MeshSource::Kind::tube) o << "mesh.length=" << format(mesh.length) << '\n';
    if (mesh.kind == MeshSource::Kind::bent_tube)
      o << "mesh.bend_radius=" << format(mesh.bend_radius) << "\nmesh.bend_angle=" << format(mesh.bend_angle) << '\n';
  }
  o << "equation=" << (problem.equation == optctrl::StateEquation::stokes ? "stokes" : "navier-stokes") << '\n';
  o << "viscosity=" << format(problem.viscosity) << "\nv_const=" << format(problem.v_const)
    << "\nalpha=" << format(problem.alpha) << '\n';
  o << "inlet_groups=";
  for (const auto& g : problem.inlet_groups) {
    for (int t : g) o << t << ',';
    o << ';';
  }
  o << "\ndomain=";
  for (const auto& d : problem.domain) o << format(d[0]) << ',' << format(d[1]) << ';';
  o << "\nbody_force=" << format(problem.body_force[0]) << ',' << format(problem.body_force[1]) << ','
    << format(problem.body_force[2]) << '\n';
  o << "newton=" << format(problem.newton.tol_rel) << ',' << format(problem.newton.tol_abs) << ','
    << problem.newton.max_iter << '\n';
  o << "training=" << training.size << ',' << static_cast<int>(training.sampling) << ',' << training.seed << '\n';
  o << "pod=" << pod.n_max << ',' << format(pod.eps_tol) << ',' << format(pod.eps_rank) << ',' << supremizers << '\n';
  return o.str();
}

std::uint64_t StudyConfig::hash() const { return rom::fnv1a(canonical()); }

mesh::Mesh build_mesh(const MeshSource& s) {
  switch (s.kind) {
    case MeshSource::Kind::file:
      return mesh::load_mesh(s.file);
    case MeshSource::Kind::tube:
      return mesh::generate_tube(mesh::straight_tube_spec(s.radius, s.length, s.resolution));
    case MeshSource::Kind::bent_tube:
      return mesh::generate_tube(mesh::bent_tube_spec(s.radius, s.bend_radius, s.bend_angle, s.resolution));
    case MeshSource::Kind::graft:
      return mesh::generate_graft(mesh::single_graft_spec(s.radius, s.resolution));
  }
  throw ConfigError("unknown mesh source");
}

rom::TrainingSet make_samples(const SampleSpec& spec, const std::vector<std::array<double, 2>>& domain) {
  if (spec.sampling == rom::TrainingSet::Sampling::grid) return rom::grid_training_set(domain, spec.size);
  return rom::random_training_set(domain, spec.size, spec.seed);
}

}  // namespace ocrom::study
