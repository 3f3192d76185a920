#include "ocrom/optctrl/model.hpp"

#include <chrono>
#include <set>

#include "ocrom/errors.hpp"
#include "ocrom/optctrl/kkt.hpp"

namespace ocrom::optctrl {

using numerics::IndexSelection;
using numerics::Triplet;

void OcpConfig::validate() const {
  if (!(viscosity > 0.0)) throw ConfigError("viscosity must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  for (const auto& d : domain)
    if (!(d[0] <= d[1])) throw ConfigError("parameter interval bounds out of order");
  if (!domain.empty() && !inlet_groups.empty() && domain.size() != inlet_groups.size())
    throw ConfigError("one parameter interval per inlet group required");
  if (newton.max_iter < 1 || !(newton.tol_rel >= 0.0) || !(newton.tol_abs >= 0.0))
    throw ConfigError("invalid Newton settings");
}

Vector build_target(const mesh::Mesh& mesh, const fem::FunctionSpaces& spaces, double v_const) {
  if (mesh.centerlines().empty()) throw InvariantViolation("target field needs centerlines");
  Vector vo = Vector::Zero(spaces.n_v);
  for (int n = 0; n < spaces.num_scalar_nodes(); ++n) {
    const auto hit = mesh::centerline_query(mesh, spaces.node_coords[n]);
    const double factor = std::max(0.0, 1.0 - hit.r * hit.r / (hit.R * hit.R));
    for (int c = 0; c < 3; ++c) vo[3 * n + c] = v_const * factor * hit.tangent[c];
  }
  return vo;
}

namespace {

struct InletFrame {
  mesh::Vec3 center;
  mesh::Vec3 normal;  // outward
  double radius;
};

InletFrame inlet_frame(const mesh::Mesh& mesh, int tag) {
  const auto& x = mesh.nodes();
  std::map<std::array<int, 3>, std::size_t> faces;
  for (std::size_t b = 0; b < mesh.boundary().size(); ++b) {
    if (mesh.boundary()[b].tag != tag) continue;
    auto key = mesh.boundary()[b].nodes;
    std::sort(key.begin(), key.end());
    faces.emplace(key, b);
  }
  if (faces.empty()) throw UnknownTag("no boundary triangles with tag " + std::to_string(tag));

  mesh::Vec3 center = mesh::Vec3::Zero(), normal = mesh::Vec3::Zero();
  double area = 0.0;
  static constexpr std::array<std::array<int, 3>, 4> kFaces{{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
  for (const auto& tet : mesh.tets()) {
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> key{tet[kFaces[f][0]], tet[kFaces[f][1]], tet[kFaces[f][2]]};
      std::sort(key.begin(), key.end());
      if (!faces.count(key)) continue;
      const mesh::Vec3 &a = x[key[0]], &b = x[key[1]], &c = x[key[2]];
      mesh::Vec3 n = (b - a).cross(c - a);
      if (n.dot(x[tet[f]] - a) > 0.0) n = -n;  // point away from the opposite vertex
      const double ar = 0.5 * n.norm();
      center += ar * (a + b + c) / 3.0;
      normal += 0.5 * n;
      area += ar;
    }
  }
  center /= area;
  const auto hit = mesh::centerline_query(mesh, center);
  return {center, normal.normalized(), hit.R};
}

}  // namespace

Vector build_inflow(const mesh::Mesh& mesh, const fem::FunctionSpaces& spaces, int tag, double re,
                    double viscosity) {
  if (!mesh::is_inlet(tag)) throw UnknownTag("tag " + std::to_string(tag) + " is not an inlet");
  const InletFrame f = inlet_frame(mesh, tag);
  Vector g = Vector::Zero(spaces.n_v);
  auto it = spaces.inlet_dofs.find(tag);
  if (it == spaces.inlet_dofs.end()) return g;
  const double peak = viscosity * re / f.radius;
  for (std::size_t k = 0; k < it->second.size(); k += 3) {
    const int node = it->second[k] / 3;
    mesh::Vec3 d = spaces.node_coords[node] - f.center;
    d -= d.dot(f.normal) * f.normal;
    const double factor = std::max(0.0, 1.0 - d.squaredNorm() / (f.radius * f.radius));
    for (int c = 0; c < 3; ++c) g[3 * node + c] = -peak * factor * f.normal[c];
  }
  return g;
}

double evaluate_objective(const Vector& v, const Vector& u, const Vector& target,
                          const fem::OperatorSet& ops, double alpha) {
  if (v.size() != ops.M.rows() || target.size() != ops.M.rows() || u.size() != ops.N_c.rows())
    throw DimensionMismatch("evaluate_objective: vector sizes do not match operators");
  const Vector e = v - target;
  return 0.5 * e.dot(ops.M * e) + 0.5 * alpha * u.dot(ops.N_c * u);
}

FullOrderModel::FullOrderModel(const mesh::Mesh& mesh, OcpConfig config)
    : FullOrderModel(std::make_shared<const mesh::Mesh>(mesh), std::move(config)) {}

FullOrderModel::FullOrderModel(std::shared_ptr<const mesh::Mesh> mesh, OcpConfig config)
    : mesh_(std::move(mesh)), config_(std::move(config)) {
  config_.validate();
  const auto inlets = mesh_->inlet_tags();
  if (config_.inlet_groups.empty())
    for (int t : inlets) config_.inlet_groups.push_back({t});
  std::set<int> seen;
  for (const auto& group : config_.inlet_groups) {
    if (group.empty()) throw ConfigError("empty inlet group");
    for (int t : group) {
      if (std::find(inlets.begin(), inlets.end(), t) == inlets.end())
        throw UnknownTag("inlet tag " + std::to_string(t) + " not present in mesh");
      if (!seen.insert(t).second) throw ConfigError("inlet tag listed in two groups");
    }
  }
  if (config_.domain.empty()) config_.domain.assign(config_.inlet_groups.size(), {70.0, 80.0});
  config_.validate();

  const auto t0 = std::chrono::steady_clock::now();
  spaces_ = fem::build_spaces(mesh_);
  ops_ = fem::assemble_operators(spaces_, config_.viscosity);
  assembly_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Vector f = Vector::Zero(spaces_.n_v);
  for (int n = 0; n < spaces_.num_scalar_nodes(); ++n)
    for (int c = 0; c < 3; ++c) f[3 * n + c] = config_.body_force[c];
  forcing_ = ops_.M * f;

  // Liftings: Stokes problems with unit-Reynolds inflow on each group.
  const IndexSelection& free = spaces_.free;
  const int nf = static_cast<int>(free.size());
  const SparseMatrix aff = numerics::submatrix(ops_.A, &free, &free);
  const SparseMatrix bf = numerics::submatrix(ops_.B, nullptr, &free);
  std::vector<Triplet> trip;
  numerics::append_block(trip, aff, 0, 0);
  numerics::append_block(trip, SparseMatrix(bf.transpose()), 0, nf);
  numerics::append_block(trip, bf, nf, 0);
  SparseMatrix stokes(nf + spaces_.n_p, nf + spaces_.n_p);
  stokes.setFromTriplets(trip.begin(), trip.end());
  numerics::SparseLu lu(stokes);
  for (const auto& group : config_.inlet_groups) {
    Vector g = Vector::Zero(spaces_.n_v);
    for (int t : group) g += build_inflow(*mesh_, spaces_, t, 1.0, config_.viscosity);
    Vector rhs(nf + spaces_.n_p);
    rhs.head(nf) = -free.restrict(ops_.A * g);
    rhs.tail(spaces_.n_p) = -(ops_.B * g);
    const Vector x = lu.solve(rhs);
    liftings_.push_back(g + free.extend(x.head(nf)));
  }

  target_ = build_target(*mesh_, spaces_, config_.v_const);
}

const fem::ConvectionKernel& FullOrderModel::convection() const {
  if (!convection_) convection_ = std::make_shared<fem::ConvectionKernel>(spaces_);
  return *convection_;
}

Vector FullOrderModel::lifting(const Vector& mu) const {
  if (mu.size() != num_parameters()) throw DimensionMismatch("parameter vector has wrong length");
  Vector v = Vector::Zero(spaces_.n_v);
  for (int i = 0; i < num_parameters(); ++i) v += mu[i] * liftings_[i];
  return v;
}

void FullOrderModel::set_target(Vector target) {
  if (target.size() != spaces_.n_v) throw DimensionMismatch("target has wrong length");
  target_ = std::move(target);
}

void FullOrderModel::check_parameter(const Vector& mu) const {
  if (mu.size() != num_parameters())
    throw DimensionMismatch("expected " + std::to_string(num_parameters()) + " parameters");
  for (int i = 0; i < num_parameters(); ++i) {
    const auto& d = config_.domain[i];
    if (!(mu[i] >= d[0] && mu[i] <= d[1]))
      throw ParameterOutOfDomain("parameter " + std::to_string(i) + " = " + std::to_string(mu[i]) +
                                 " outside [" + std::to_string(d[0]) + ", " + std::to_string(d[1]) + "]");
  }
}

const SparseMatrix& FullOrderModel::stokes_kkt_matrix() const {
  if (!stokes_kkt_) {
    Vector mu = Vector::Zero(num_parameters());
    for (int i = 0; i < num_parameters(); ++i) mu[i] = config_.domain[i][0];
    stokes_kkt_ = std::make_shared<SparseMatrix>(assemble_kkt(*this, mu).matrix);
  }
  return *stokes_kkt_;
}

const numerics::SparseLu& FullOrderModel::stokes_kkt_factorization() const {
  if (!stokes_lu_) stokes_lu_ = std::make_shared<numerics::SparseLu>(stokes_kkt_matrix());
  return *stokes_lu_;
}

void FullOrderModel::clear_cache() const {
  stokes_kkt_.reset();
  stokes_lu_.reset();
}

}  // namespace ocrom::optctrl
