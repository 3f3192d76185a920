#include <filesystem>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "ocrom/errors.hpp"
#include "ocrom/mesh/mesh_io.hpp"

using namespace ocrom;
using mesh::Vec3;

namespace {

const char* kSingleTet = R"(ocrom-mesh 1
$nodes 4
0 0 0 0
1 1 0 0
2 0 1 0
3 0 0 1
$tets 1
0 0 1 2 3
$btris 4
0 1 2 3 1
1 0 2 3 1
2 0 1 3 1
3 0 1 2 1
$end
)";

// Points inside the union of capped cylinders around each polyline segment.
bool inside_branch(const mesh::BranchSpec& b, const Vec3& x) {
  for (std::size_t i = 0; i + 1 < b.points.size(); ++i) {
    const Vec3 d = b.points[i + 1] - b.points[i];
    const double t = (x - b.points[i]).dot(d) / d.squaredNorm();
    if (t < 0.0 || t > 1.0) continue;
    if ((x - b.points[i] - t * d).norm() < b.radii[i]) return true;
  }
  return false;
}

double brute_distance(const std::vector<Vec3>& pts, const Vec3& x) {
  // Dense sampling, then a second dense pass around the best sample.
  const int k = 100000;
  double best = 1e300, best_t = 0.0;
  std::size_t best_seg = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (int s = 0; s <= k; ++s) {
      const double t = static_cast<double>(s) / k;
      const double d = (pts[i] + t * (pts[i + 1] - pts[i]) - x).norm();
      if (d < best) {
        best = d;
        best_t = t;
        best_seg = i;
      }
    }
  for (int s = -k; s <= k; ++s) {
    const double t = std::clamp(best_t + static_cast<double>(s) / k / k, 0.0, 1.0);
    best = std::min(best, (pts[best_seg] + t * (pts[best_seg + 1] - pts[best_seg]) - x).norm());
  }
  return best;
}

}  // namespace

TEST_CASE("single tet file") {
  const auto m = mesh::parse_mesh(kSingleTet);
  CHECK(m.num_nodes() == 4);
  CHECK(m.num_tets() == 1);
  CHECK(m.boundary().size() == 4);
  CHECK(m.volume() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("mesh parse errors") {
  std::string dup = kSingleTet;
  dup.replace(dup.find("$btris 4"), 8, "$btris 5");
  dup.insert(dup.find("$end"), "4 0 1 2 1\n");
  CHECK_THROWS_AS(mesh::parse_mesh(dup), InvariantViolation);

  std::string missing = kSingleTet;
  missing.replace(missing.find("$btris 4"), 8, "$btris 3");
  missing.erase(missing.find("3 0 1 2 1\n"), 10);
  CHECK_THROWS_AS(mesh::parse_mesh(missing), InvariantViolation);

  std::string unknown = kSingleTet;
  unknown.insert(unknown.find("$end"), "$extra 0\n");
  try {
    mesh::parse_mesh(unknown);
    FAIL("unknown section accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 14);
  }
  CHECK_THROWS_AS(mesh::parse_mesh("ocrom-mesh 2\n"), ParseError);
  std::string bad_number = kSingleTet;
  bad_number.replace(bad_number.find("1 1 0 0"), 7, "1 1 x 0");
  CHECK_THROWS_AS(mesh::parse_mesh(bad_number), ParseError);
  CHECK_THROWS_AS(mesh::load_mesh("/nonexistent/file.mesh"), IoError);
}

TEST_CASE("inverted tets are reoriented") {
  std::string inv = kSingleTet;
  inv.replace(inv.find("0 0 1 2 3"), 9, "0 1 0 2 3");
  const auto m = mesh::parse_mesh(inv);
  CHECK(m.tet_volume(0) > 0.0);
}

TEST_CASE("generate_tube") {
  const auto m = mesh::generate_tube(mesh::straight_tube_spec(1.0, 10.0, 0.4));
  CHECK(m.tags() == std::vector<int>{1, 2, 100});
  const double exact = std::numbers::pi * 10.0;
  CHECK(std::abs(m.volume() - exact) <= 0.05 * exact);
  for (std::size_t t = 0; t < m.num_tets(); ++t) CHECK_UNARY(m.tet_volume(t) > 0.0);
  CHECK(m.centerlines().size() == 1);

  CHECK_THROWS_AS(mesh::generate_tube(mesh::straight_tube_spec(0.1, 10.0, 0.4)), DegenerateGeometry);

  const auto again = mesh::generate_tube(mesh::straight_tube_spec(1.0, 10.0, 0.4));
  CHECK(mesh::format_mesh(again) == mesh::format_mesh(m));
}

TEST_CASE("every boundary face carries exactly one tag") {
  const auto& m = *fixtures::small_tube();
  const auto faces = mesh::exterior_faces(m.nodes(), m.tets());
  std::multiset<std::array<int, 3>> tagged;
  for (const auto& b : m.boundary()) {
    auto k = b.nodes;
    std::sort(k.begin(), k.end());
    tagged.insert(k);
  }
  CHECK(tagged.size() == faces.size());
  for (auto f : faces) {
    std::sort(f.begin(), f.end());
    CHECK(tagged.count(f) == 1);
  }
}

TEST_CASE("mesh round trip is bit exact") {
  const auto m = mesh::generate_tube(mesh::bent_tube_spec(1.0, 3.0, 90.0, 0.5));
  const auto path = std::filesystem::temp_directory_path() / "ocrom_roundtrip.mesh";
  mesh::write_mesh(m, path);
  const auto r = mesh::load_mesh(path);
  std::filesystem::remove(path);
  REQUIRE(r.num_nodes() == m.num_nodes());
  for (std::size_t i = 0; i < m.num_nodes(); ++i) CHECK((r.nodes()[i].array() == m.nodes()[i].array()).all());
  CHECK(r.tets() == m.tets());
  REQUIRE(r.boundary().size() == m.boundary().size());
  for (std::size_t i = 0; i < m.boundary().size(); ++i) {
    CHECK(r.boundary()[i].nodes == m.boundary()[i].nodes);
    CHECK(r.boundary()[i].tag == m.boundary()[i].tag);
  }
  REQUIRE(r.centerlines().size() == 1);
  CHECK(r.centerlines()[0].radii == m.centerlines()[0].radii);
}

TEST_CASE("generate_graft") {
  const auto spec = mesh::single_graft_spec(1.0, 1.0 / 3.0);
  const auto m = mesh::generate_graft(spec);
  CHECK(m.tags() == std::vector<int>{1, 2, 3, 100});
  CHECK(m.centerlines().size() == 2);

  // Monte-Carlo volumes of the branch tubes and their union.
  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (const auto& b : spec.branches)
    for (const auto& p : b.points) {
      lo = lo.cwiseMin(p - Vec3::Constant(1.0));
      hi = hi.cwiseMax(p + Vec3::Constant(1.0));
    }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int samples = 400000;
  int in0 = 0, in1 = 0, in_union = 0;
  for (int s = 0; s < samples; ++s) {
    const Vec3 x(lo[0] + u(rng) * (hi[0] - lo[0]), lo[1] + u(rng) * (hi[1] - lo[1]), lo[2] + u(rng) * (hi[2] - lo[2]));
    const bool a = inside_branch(spec.branches[0], x), b = inside_branch(spec.branches[1], x);
    in0 += a;
    in1 += b;
    in_union += a || b;
  }
  const double box = (hi - lo).prod();
  const double v0 = box * in0 / samples, v1 = box * in1 / samples, vu = box * in_union / samples;
  CHECK(vu >= std::max(v0, v1));
  CHECK(vu <= v0 + v1);
  CHECK(m.volume() >= 0.95 * vu);
  CHECK(m.volume() <= 1.05 * vu);

  mesh::GeometrySpec apart;
  apart.resolution = 0.5;
  apart.branches.push_back({{Vec3(0, 0, 0), Vec3(8, 0, 0)}, {1.0, 1.0}});
  apart.branches.push_back({{Vec3(0, 5, 0), Vec3(8, 5, 0)}, {1.0, 1.0}});
  CHECK_THROWS_AS(mesh::generate_graft(apart), NonIntersectingBranches);
}

TEST_CASE("tube volume against Monte-Carlo at h <= R/3") {
  const auto spec = mesh::bent_tube_spec(1.0, 3.0, 90.0, 1.0 / 3.0);
  const auto m = mesh::generate_tube(spec);
  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (const auto& p : spec.branches[0].points) {
    lo = lo.cwiseMin(p - Vec3::Constant(1.0));
    hi = hi.cwiseMax(p + Vec3::Constant(1.0));
  }
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int samples = 400000;
  int in = 0;
  for (int s = 0; s < samples; ++s) {
    const Vec3 x(lo[0] + u(rng) * (hi[0] - lo[0]), lo[1] + u(rng) * (hi[1] - lo[1]), lo[2] + u(rng) * (hi[2] - lo[2]));
    in += inside_branch(spec.branches[0], x);
  }
  const double mc = (hi - lo).prod() * in / samples;
  CHECK(std::abs(m.volume() - mc) <= 0.05 * mc);
}

TEST_CASE("centerline_query") {
  const auto& m = *fixtures::small_tube();
  const auto on = mesh::centerline_query(m, Vec3(0, 0, 1.3));
  CHECK(on.r == doctest::Approx(0.0));
  CHECK(on.branch == 0);
  const auto wall = mesh::centerline_query(m, Vec3(std::cos(0.3), std::sin(0.3), 1.3));
  CHECK(wall.r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wall.R == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(wall.tangent.norm() - 1.0) <= 1e-12);

  const auto bent = mesh::generate_tube(mesh::bent_tube_spec(1.0, 3.0, 90.0, 0.5));
  const auto& pts = bent.centerlines()[0].points;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, bent.num_nodes() - 1);
  for (int k = 0; k < 10; ++k) {
    const Vec3 x = bent.nodes()[pick(rng)];
    const auto hit = mesh::centerline_query(bent, x);
    CHECK(hit.r == doctest::Approx(brute_distance(pts, x)).epsilon(1e-8));
    CHECK(std::abs(hit.tangent.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("centerline ties resolve to the lowest branch") {
  std::vector<mesh::Centerline> cl(2);
  cl[0].points = {Vec3(0, -1, 0), Vec3(10, -1, 0)};
  cl[0].radii = {1.0, 1.0};
  cl[1].points = {Vec3(0, 1, 0), Vec3(10, 1, 0)};
  cl[1].radii = {2.0, 2.0};
  CHECK(mesh::centerline_query(cl, Vec3(5, 0, 0)).branch == 0);
  CHECK(mesh::centerline_query(cl, Vec3(5, 0.1, 0)).branch == 1);
}
