#include "ocrom/mesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "ocrom/errors.hpp"

namespace ocrom::mesh {

namespace {

using FaceKey = std::array<int, 3>;

FaceKey sorted_face(int a, int b, int c) {
  FaceKey f{a, b, c};
  std::sort(f.begin(), f.end());
  return f;
}

// Local faces of a positively oriented tet, ordered so the normal is outward.
constexpr std::array<std::array<int, 3>, 4> kTetFaces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

void validate_centerline(const Centerline& c, std::size_t branch) {
  const std::string where = "centerline " + std::to_string(branch);
  if (c.points.size() < 2) throw InvariantViolation(where + ": fewer than 2 points");
  if (c.points.size() != c.radii.size())
    throw InvariantViolation(where + ": point/radius count mismatch");
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (!(c.radii[i] > 0.0)) throw InvariantViolation(where + ": non-positive radius");
    if (i > 0 && (c.points[i] - c.points[i - 1]).norm() == 0.0)
      throw InvariantViolation(where + ": repeated consecutive point");
  }
}

}  // namespace

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

Mesh::Mesh(std::vector<Vec3> nodes, std::vector<Tet> tets, std::vector<BoundaryTriangle> btris,
           std::vector<Centerline> centerlines)
    : nodes_(std::move(nodes)),
      tets_(std::move(tets)),
      btris_(std::move(btris)),
      centerlines_(std::move(centerlines)) {
  const int n = static_cast<int>(nodes_.size());
  for (std::size_t t = 0; t < tets_.size(); ++t) {
    auto& tet = tets_[t];
    for (int v : tet)
      if (v < 0 || v >= n) throw InvariantViolation("tet " + std::to_string(t) + ": node out of range");
    const double vol = signed_volume(nodes_[tet[0]], nodes_[tet[1]], nodes_[tet[2]], nodes_[tet[3]]);
    if (vol == 0.0 || !std::isfinite(vol))
      throw InvariantViolation("tet " + std::to_string(t) + ": degenerate (zero volume)");
    if (vol < 0.0) std::swap(tet[2], tet[3]);
  }

  std::map<FaceKey, int> face_count;
  for (const auto& tet : tets_)
    for (const auto& lf : kTetFaces) ++face_count[sorted_face(tet[lf[0]], tet[lf[1]], tet[lf[2]])];

  std::set<FaceKey> seen;
  for (std::size_t b = 0; b < btris_.size(); ++b) {
    const auto& tri = btris_[b];
    for (int v : tri.nodes)
      if (v < 0 || v >= n)
        throw InvariantViolation("boundary triangle " + std::to_string(b) + ": node out of range");
    if (tri.tag < kWallTag)
      throw InvariantViolation("boundary triangle " + std::to_string(b) + ": invalid tag " +
                               std::to_string(tri.tag));
    const FaceKey key = sorted_face(tri.nodes[0], tri.nodes[1], tri.nodes[2]);
    if (!seen.insert(key).second)
      throw InvariantViolation("boundary triangle " + std::to_string(b) + ": listed twice");
    auto it = face_count.find(key);
    if (it == face_count.end() || it->second != 1)
      throw InvariantViolation("boundary triangle " + std::to_string(b) +
                               ": not a face of exactly one tet");
  }
  for (const auto& [key, count] : face_count) {
    if (count > 2) throw InvariantViolation("face shared by more than two tets");
    if (count == 1 && !seen.count(key)) throw InvariantViolation("untagged boundary face");
  }
  for (std::size_t c = 0; c < centerlines_.size(); ++c) validate_centerline(centerlines_[c], c);
}

double Mesh::tet_volume(std::size_t t) const {
  const auto& tet = tets_[t];
  return signed_volume(nodes_[tet[0]], nodes_[tet[1]], nodes_[tet[2]], nodes_[tet[3]]);
}

double Mesh::volume() const {
  double v = 0.0;
  for (std::size_t t = 0; t < tets_.size(); ++t) v += tet_volume(t);
  return v;
}

std::vector<int> Mesh::tags() const {
  std::set<int> s;
  for (const auto& b : btris_) s.insert(b.tag);
  return {s.begin(), s.end()};
}

std::vector<int> Mesh::inlet_tags() const {
  std::vector<int> out;
  for (int t : tags())
    if (is_inlet(t)) out.push_back(t);
  return out;
}

std::vector<int> Mesh::outlet_tags() const {
  std::vector<int> out;
  for (int t : tags())
    if (is_outlet(t)) out.push_back(t);
  return out;
}

std::vector<std::array<int, 3>> exterior_faces(const std::vector<Vec3>& nodes,
                                               const std::vector<Tet>& tets) {
  std::map<FaceKey, std::pair<int, std::array<int, 3>>> faces;
  for (auto tet : tets) {
    if (signed_volume(nodes[tet[0]], nodes[tet[1]], nodes[tet[2]], nodes[tet[3]]) < 0.0)
      std::swap(tet[2], tet[3]);
    for (const auto& lf : kTetFaces) {
      const std::array<int, 3> f{tet[lf[0]], tet[lf[1]], tet[lf[2]]};
      auto& entry = faces[sorted_face(f[0], f[1], f[2])];
      ++entry.first;
      entry.second = f;
    }
  }
  std::vector<std::array<int, 3>> out;
  for (const auto& [key, entry] : faces)
    if (entry.first == 1) out.push_back(entry.second);
  return out;
}

CenterlineHit centerline_query(const std::vector<Centerline>& centerlines, const Vec3& x) {
  CenterlineHit best{INFINITY, 0.0, Vec3::Zero(), -1};
  for (std::size_t b = 0; b < centerlines.size(); ++b) {
    const auto& c = centerlines[b];
    const std::size_t np = c.points.size();
    auto vertex_tangent = [&](std::size_t k) {
      const Vec3 d = c.points[std::min(k + 1, np - 1)] - c.points[k == 0 ? 0 : k - 1];
      return Vec3(d.normalized());
    };
    for (std::size_t s = 0; s + 1 < np; ++s) {
      const Vec3& p0 = c.points[s];
      const Vec3 d = c.points[s + 1] - p0;
      const double t = std::clamp((x - p0).dot(d) / d.squaredNorm(), 0.0, 1.0);
      const double dist = (x - (p0 + t * d)).norm();
      if (dist < best.r) {
        const Vec3 tan = (1.0 - t) * vertex_tangent(s) + t * vertex_tangent(s + 1);
        const double tn = tan.norm();
        best.r = dist;
        best.R = (1.0 - t) * c.radii[s] + t * c.radii[s + 1];
        best.tangent = tn > 0.0 ? Vec3(tan / tn) : Vec3(d.normalized());
        best.branch = static_cast<int>(b);
      }
    }
  }
  return best;
}

CenterlineHit centerline_query(const Mesh& mesh, const Vec3& x) {
  return centerline_query(mesh.centerlines(), x);
}

Mesh renumbered(const Mesh& mesh, const std::vector<int>& new_id,
                const std::vector<std::size_t>& tet_order) {
  std::vector<Vec3> nodes(mesh.num_nodes());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[new_id[i]] = mesh.nodes()[i];
  std::vector<Tet> tets;
  tets.reserve(mesh.num_tets());
  for (std::size_t t : tet_order) {
    Tet tet = mesh.tets()[t];
    for (int& v : tet) v = new_id[v];
    tets.push_back(tet);
  }
  std::vector<BoundaryTriangle> btris = mesh.boundary();
  for (auto& b : btris)
    for (int& v : b.nodes) v = new_id[v];
  return Mesh(std::move(nodes), std::move(tets), std::move(btris), mesh.centerlines());
}

}  // namespace ocrom::mesh
