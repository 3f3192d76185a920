#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <vector>

namespace ocrom::mesh {

using Vec3 = Eigen::Vector3d;

/// Boundary tag convention: 1 wall, 2..99 inlets, 100+ outlets.
inline constexpr int kWallTag = 1;
inline constexpr int kFirstInletTag = 2;
inline constexpr int kFirstOutletTag = 100;

constexpr bool is_wall(int tag) { return tag == kWallTag; }
constexpr bool is_inlet(int tag) { return tag >= kFirstInletTag && tag < kFirstOutletTag; }
constexpr bool is_outlet(int tag) { return tag >= kFirstOutletTag; }

/// Polyline through a vessel branch with the maximal inscribed radius at each
/// point (mm).
struct Centerline {
  std::vector<Vec3> points;
  std::vector<double> radii;
};

using Tet = std::array<int, 4>;

struct BoundaryTriangle {
  std::array<int, 3> nodes;
  int tag;
};

/// Tetrahedral volume mesh. Construction validates every invariant and
/// reorients tets to positive signed volume; the object is immutable after.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec3> nodes, std::vector<Tet> tets, std::vector<BoundaryTriangle> btris,
       std::vector<Centerline> centerlines);

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<BoundaryTriangle>& boundary() const { return btris_; }
  const std::vector<Centerline>& centerlines() const { return centerlines_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_tets() const { return tets_.size(); }

  double tet_volume(std::size_t t) const;
  double volume() const;
  /// Sorted list of distinct boundary tags.
  std::vector<int> tags() const;
  std::vector<int> inlet_tags() const;
  std::vector<int> outlet_tags() const;

 private:
  std::vector<Vec3> nodes_;
  std::vector<Tet> tets_;
  std::vector<BoundaryTriangle> btris_;
  std::vector<Centerline> centerlines_;
};

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Faces that belong to exactly one tet, with the node ordering taken from
/// the tet so that the normal points outward.
std::vector<std::array<int, 3>> exterior_faces(const std::vector<Vec3>& nodes,
                                               const std::vector<Tet>& tets);

struct CenterlineHit {
  double r;      // distance to the nearest centerline point
  double R;      // inscribed radius there
  Vec3 tangent;  // unit tangent, oriented from the branch start to its end
  int branch;
};

/// Nearest centerline point over every branch; ties resolve to the lowest
/// branch id.
CenterlineHit centerline_query(const Mesh& mesh, const Vec3& x);
CenterlineHit centerline_query(const std::vector<Centerline>& centerlines, const Vec3& x);

/// Same mesh with node ids permuted by `new_id[old] = new` and tets listed in
/// `tet_order`. Used to check numbering invariance.
Mesh renumbered(const Mesh& mesh, const std::vector<int>& new_id,
                const std::vector<std::size_t>& tet_order);

}  // namespace ocrom::mesh
