#include "ocrom/mesh/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "ocrom/errors.hpp"

namespace ocrom::mesh {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_branch(const BranchSpec& b) {
  if (b.points.size() < 2 || b.points.size() != b.radii.size())
    throw DegenerateGeometry("branch needs >= 2 points with one radius each");
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    if (!(b.radii[i] > 0.0)) throw DegenerateGeometry("branch radius must be positive");
    if (i > 0 && (b.points[i] - b.points[i - 1]).norm() == 0.0)
      throw DegenerateGeometry("branch has repeated consecutive points");
  }
}

double min_radius(const BranchSpec& b) { return *std::min_element(b.radii.begin(), b.radii.end()); }

Centerline to_centerline(const BranchSpec& b) { return Centerline{b.points, b.radii}; }

// Any unit vector orthogonal to t.
Vec3 orthogonal(const Vec3& t) {
  const Vec3 trial = std::abs(t.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (trial - trial.dot(t) * t).normalized();
}

void check_quality(const Mesh& m, double min_deg) {
  if (min_deg <= 0.0) return;
  const double got = min_dihedral_angle(m);
  if (got < min_deg)
    throw DegenerateGeometry("minimum dihedral angle " + std::to_string(got) +
                             " deg below requested " + std::to_string(min_deg));
}

// Unit disk of rings: ring k (1..nr) has 6k nodes; node 0 is the center.
struct Disk {
  std::vector<double> rho;    // radial fraction in [0, 1]
  std::vector<double> theta;  // angle
  std::vector<std::array<int, 3>> tris;
};

Disk make_disk(int nr) {
  Disk d;
  d.rho.push_back(0.0);
  d.theta.push_back(0.0);
  auto ring_start = [](int k) { return k == 0 ? 0 : 1 + 3 * k * (k - 1); };
  auto ring_size = [](int k) { return k == 0 ? 1 : 6 * k; };
  for (int k = 1; k <= nr; ++k)
    for (int j = 0; j < 6 * k; ++j) {
      d.rho.push_back(static_cast<double>(k) / nr);
      d.theta.push_back(2.0 * kPi * j / (6 * k));
    }
  for (int k = 1; k <= nr; ++k) {
    const int s0 = ring_start(k - 1), n0 = ring_size(k - 1);
    const int s1 = ring_start(k), n1 = ring_size(k);
    if (k == 1) {
      for (int j = 0; j < n1; ++j) d.tris.push_back({0, s1 + j, s1 + (j + 1) % n1});
      continue;
    }
    int i = 0, j = 0;
    while (i < n0 || j < n1) {
      const double ai = static_cast<double>(i + 1) / n0;
      const double bj = static_cast<double>(j + 1) / n1;
      if (j == n1 || (i < n0 && ai < bj)) {
        d.tris.push_back({s0 + i % n0, s0 + (i + 1) % n0, s1 + j % n1});
        ++i;
      } else {
        d.tris.push_back({s0 + i % n0, s1 + j % n1, s1 + (j + 1) % n1});
        ++j;
      }
    }
  }
  return d;
}

struct Sample {
  Vec3 point;
  double radius;
};

// Resample a polyline at `n + 1` points equally spaced in arc length.
std::vector<Sample> resample(const BranchSpec& b, int n) {
  std::vector<double> s(b.points.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) s[i] = s[i - 1] + (b.points[i] - b.points[i - 1]).norm();
  std::vector<Sample> out;
  std::size_t seg = 0;
  for (int k = 0; k <= n; ++k) {
    const double target = s.back() * k / n;
    while (seg + 2 < s.size() && s[seg + 1] < target) ++seg;
    const double t = std::clamp((target - s[seg]) / (s[seg + 1] - s[seg]), 0.0, 1.0);
    out.push_back({(1.0 - t) * b.points[seg] + t * b.points[seg + 1],
                   (1.0 - t) * b.radii[seg] + t * b.radii[seg + 1]});
  }
  return out;
}

double polyline_length(const std::vector<Vec3>& p) {
  double l = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) l += (p[i] - p[i - 1]).norm();
  return l;
}

// Tube segment used for carving the graft union. Open ends are cut by the
// plane through the end point instead of being capped by a half ball.
struct Segment {
  Vec3 a, b;
  double ra, rb;
  bool open_a, open_b;

  // Signed distance-like value (negative inside) and the foot point.
  double level(const Vec3& x, Vec3* foot, double* radius, bool clip) const {
    const Vec3 d = b - a;
    double t = (x - a).dot(d) / d.squaredNorm();
    if (clip && ((t < -1e-12 && open_a) || (t > 1.0 + 1e-12 && open_b)))
      return std::numeric_limits<double>::infinity();
    t = std::clamp(t, 0.0, 1.0);
    const Vec3 f = a + t * d;
    const double r = (1.0 - t) * ra + t * rb;
    if (foot) *foot = f;
    if (radius) *radius = r;
    return (x - f).norm() - r;
  }
};

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  // Minimum over a fine parameter sweep of the first segment of the exact
  // point-segment distance; adequate for the junction proximity check.
  double best = std::numeric_limits<double>::infinity();
  const Vec3 dq = q1 - q0;
  for (int i = 0; i <= 200; ++i) {
    const Vec3 x = p0 + (p1 - p0) * (i / 200.0);
    const double t = std::clamp((x - q0).dot(dq) / dq.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (x - (q0 + t * dq)).norm());
  }
  return best;
}

}  // namespace

Mesh generate_tube(const GeometrySpec& spec) {
  if (spec.branches.size() != 1) throw ConfigError("generate_tube: exactly one branch required");
  const BranchSpec& br = spec.branches.front();
  check_branch(br);
  const double h = spec.resolution;
  if (!(h > 0.0)) throw ConfigError("generate_tube: resolution must be positive");
  if (min_radius(br) <= h) throw DegenerateGeometry("generate_tube: radius must exceed resolution");

  const double rmax = *std::max_element(br.radii.begin(), br.radii.end());
  const int nr = static_cast<int>(std::ceil(rmax / h - 1e-9));
  const int nl = std::max(1, static_cast<int>(std::lround(polyline_length(br.points) / h)));
  const Disk disk = make_disk(nr);
  const int nd = static_cast<int>(disk.rho.size());
  const auto samples = resample(br, nl);

  std::vector<Vec3> tangents(nl + 1);
  for (int k = 0; k <= nl; ++k)
    tangents[k] = (samples[std::min(k + 1, nl)].point - samples[std::max(k - 1, 0)].point).normalized();

  std::vector<Vec3> nodes;
  nodes.reserve(static_cast<std::size_t>(nd) * (nl + 1));
  Vec3 normal = orthogonal(tangents[0]);
  for (int k = 0; k <= nl; ++k) {
    const Vec3& t = tangents[k];
    normal = (normal - normal.dot(t) * t).normalized();
    const Vec3 binormal = t.cross(normal);
    for (int i = 0; i < nd; ++i) {
      const double r = disk.rho[i] * samples[k].radius;
      nodes.push_back(samples[k].point +
                      r * (std::cos(disk.theta[i]) * normal + std::sin(disk.theta[i]) * binormal));
    }
  }

  std::vector<Tet> tets;
  tets.reserve(disk.tris.size() * 3 * nl);
  for (int k = 0; k < nl; ++k) {
    const int lo = k * nd, hi = (k + 1) * nd;
    for (auto tri : disk.tris) {
      std::sort(tri.begin(), tri.end());
      const int a = lo + tri[0], b = lo + tri[1], c = lo + tri[2];
      const int a1 = hi + tri[0], b1 = hi + tri[1], c1 = hi + tri[2];
      tets.push_back({a, b, c, c1});
      tets.push_back({a, b, b1, c1});
      tets.push_back({a, a1, b1, c1});
    }
  }

  std::vector<BoundaryTriangle> btris;
  for (const auto& f : exterior_faces(nodes, tets)) {
    int layer_min = nl, layer_max = 0;
    for (int v : f) {
      layer_min = std::min(layer_min, v / nd);
      layer_max = std::max(layer_max, v / nd);
    }
    int tag = kWallTag;
    if (layer_max == 0) tag = kFirstInletTag;
    else if (layer_min == nl) tag = kFirstOutletTag;
    btris.push_back({f, tag});
  }

  Mesh m(std::move(nodes), std::move(tets), std::move(btris), {to_centerline(br)});
  check_quality(m, spec.min_dihedral_deg);
  return m;
}

Mesh generate_graft(const GeometrySpec& spec) {
  if (spec.branches.size() != 2) throw ConfigError("generate_graft: exactly two branches required");
  const BranchSpec& host = spec.branches[0];
  const BranchSpec& graft = spec.branches[1];
  check_branch(host);
  check_branch(graft);
  const double h = spec.resolution;
  if (!(h > 0.0)) throw ConfigError("generate_graft: resolution must be positive");
  if (std::min(min_radius(host), min_radius(graft)) <= h)
    throw DegenerateGeometry("generate_graft: radius must exceed resolution");

  // Local frame: ex along the host, ey towards the graft start.
  const Vec3 origin = host.points.front();
  const double host_len = (host.points.back() - origin).norm();
  const Vec3 ex = (host.points.back() - origin) / host_len;
  for (const auto& p : host.points) {
    const Vec3 d = p - origin;
    if ((d - d.dot(ex) * ex).norm() > 1e-9 * host_len)
      throw DegenerateGeometry("generate_graft: host centerline must be straight");
  }
  Vec3 ey = graft.points.front() - origin;
  ey -= ey.dot(ex) * ex;
  ey = ey.norm() > 1e-12 ? Vec3(ey.normalized()) : orthogonal(ex);
  const Vec3 ez = ex.cross(ey);
  auto to_local = [&](const Vec3& p) {
    const Vec3 d = p - origin;
    return Vec3(d.dot(ex), d.dot(ey), d.dot(ez));
  };

  const Vec3 g0 = graft.points.front(), g1 = graft.points[1];
  if ((g1 - g0).normalized().dot(ex) < 1.0 - 1e-12)
    throw DegenerateGeometry("generate_graft: graft must start parallel to the host");

  // Junction: first graft vertex lying on the host axis.
  std::size_t junction = graft.points.size();
  for (std::size_t i = 0; i < graft.points.size(); ++i) {
    const Vec3 l = to_local(graft.points[i]);
    if (std::hypot(l.y(), l.z()) <= 1e-9 * host_len && l.x() >= -1e-9 && l.x() <= host_len * (1 + 1e-12)) {
      junction = i;
      break;
    }
  }
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < graft.points.size(); ++i)
    gap = std::min(gap, segment_distance(graft.points[i], graft.points[i + 1], host.points.front(),
                                         host.points.back()));
  if (junction == graft.points.size() || gap > min_radius(host))
    throw NonIntersectingBranches("generate_graft: graft centerline never reaches the host");
  const bool graft_reaches_outlet = (graft.points.back() - host.points.back()).norm() <= 1e-9 * host_len;

  // Lattice spacing chosen so that every end plane is a lattice plane.
  const int nx_host = std::max(1, static_cast<int>(std::lround(host_len / h)));
  const double s = host_len / nx_host;
  const double gx = to_local(g0).x();
  const double gsteps = gx / s;
  if (std::abs(gsteps - std::round(gsteps)) > 1e-6)
    throw DegenerateGeometry("generate_graft: graft start must lie on a lattice plane");

  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < host.points.size(); ++i)
    segs.push_back({to_local(host.points[i]), to_local(host.points[i + 1]), host.radii[i],
                    host.radii[i + 1], i == 0, i + 2 == host.points.size()});
  for (std::size_t i = 0; i + 1 < graft.points.size(); ++i)
    segs.push_back({to_local(graft.points[i]), to_local(graft.points[i + 1]), graft.radii[i],
                    graft.radii[i + 1], i == 0, graft_reaches_outlet && i + 2 == graft.points.size()});

  auto level = [&](const Vec3& x, Vec3* foot, double* radius, bool clip) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sg : segs) {
      Vec3 f;
      double r = 0.0;
      const double v = sg.level(x, &f, &r, clip);
      if (v < best) {
        best = v;
        if (foot) *foot = f;
        if (radius) *radius = r;
      }
    }
    return best;
  };

  // Lattice bounds in units of s.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& sg : segs) {
    const double r = std::max(sg.ra, sg.rb);
    lo = lo.cwiseMin(sg.a.cwiseMin(sg.b) - Vec3::Constant(r));
    hi = hi.cwiseMax(sg.a.cwiseMax(sg.b) + Vec3::Constant(r));
  }
  std::array<int, 3> imin{}, imax{};
  for (int d = 0; d < 3; ++d) {
    imin[d] = static_cast<int>(std::floor(lo[d] / s)) - 1;
    imax[d] = static_cast<int>(std::ceil(hi[d] / s)) + 1;
  }
  imin[0] = std::max(imin[0], static_cast<int>(std::lround(std::min(0.0, gx) / s)));
  imax[0] = std::min(imax[0], nx_host);
  const int nx = imax[0] - imin[0] + 1, ny = imax[1] - imin[1] + 1, nz = imax[2] - imin[2] + 1;
  auto lattice_id = [&](int i, int j, int k) { return (static_cast<long>(i) * ny + j) * nz + k; };
  auto lattice_point = [&](long id) {
    const int k = static_cast<int>(id % nz);
    const int j = static_cast<int>((id / nz) % ny);
    const int i = static_cast<int>(id / (static_cast<long>(ny) * nz));
    return Vec3((imin[0] + i) * s, (imin[1] + j) * s, (imin[2] + k) * s);
  };

  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<long, 4>> kept;
  for (int i = 0; i + 1 < nx; ++i)
    for (int j = 0; j + 1 < ny; ++j)
      for (int k = 0; k + 1 < nz; ++k)
        for (const auto& perm : kPerms) {
          std::array<int, 3> c{i, j, k};
          std::array<long, 4> tet{};
          tet[0] = lattice_id(c[0], c[1], c[2]);
          for (int q = 0; q < 3; ++q) {
            ++c[perm[q]];
            tet[q + 1] = lattice_id(c[0], c[1], c[2]);
          }
          Vec3 centroid = Vec3::Zero();
          for (long v : tet) centroid += lattice_point(v);
          centroid /= 4.0;
          if (level(centroid, nullptr, nullptr, true) < 0.0) kept.push_back(tet);
        }

  std::map<long, int> compact;
  for (const auto& t : kept)
    for (long v : t) compact.emplace(v, 0);
  std::vector<Vec3> local;
  for (auto& [id, idx] : compact) {
    idx = static_cast<int>(local.size());
    local.push_back(lattice_point(id));
  }
  std::vector<Tet> tets;
  tets.reserve(kept.size());
  for (const auto& t : kept) tets.push_back({compact[t[0]], compact[t[1]], compact[t[2]], compact[t[3]]});

  // End caps in local coordinates.
  struct Cap {
    double x;
    Vec3 center;
    double radius;
    int tag;
  };
  const std::array<Cap, 3> caps{{{0.0, to_local(host.points.front()), host.radii.front(), 2},
                                 {gx, to_local(g0), graft.radii.front(), 3},
                                 {host_len, to_local(host.points.back()), host.radii.back(), 100}}};
  auto cap_tag = [&](const std::array<int, 3>& f) {
    for (const auto& cap : caps) {
      bool on = true;
      Vec3 c = Vec3::Zero();
      for (int v : f) {
        on = on && std::abs(local[v].x() - cap.x) <= 1e-9 * s;
        c += local[v];
      }
      if (on && (c / 3.0 - cap.center).norm() <= cap.radius + s) return cap.tag;
    }
    return kWallTag;
  };

  // Snap wall nodes onto the tube surfaces, backing off where tets degrade.
  auto faces = exterior_faces(local, tets);
  std::vector<char> on_wall(local.size(), 0);
  for (const auto& f : faces)
    if (cap_tag(f) == kWallTag)
      for (int v : f) on_wall[v] = 1;
  std::vector<Vec3> shift(local.size(), Vec3::Zero());
  for (std::size_t v = 0; v < local.size(); ++v) {
    if (!on_wall[v]) continue;
    Vec3 foot;
    double radius = 0.0;
    level(local[v], &foot, &radius, false);
    const Vec3 d = local[v] - foot;
    if (d.norm() > 1e-12) shift[v] = foot + radius * d.normalized() - local[v];
  }
  std::vector<double> vol0(tets.size());
  for (std::size_t t = 0; t < tets.size(); ++t)
    vol0[t] = std::abs(signed_volume(local[tets[t][0]], local[tets[t][1]], local[tets[t][2]], local[tets[t][3]]));
  std::vector<double> scale(local.size(), 1.0);
  for (int round = 0; round < 30; ++round) {
    bool changed = false;
    for (std::size_t t = 0; t < tets.size(); ++t) {
      std::array<Vec3, 4> p;
      std::array<Vec3, 4> p0;
      for (int q = 0; q < 4; ++q) {
        p0[q] = local[tets[t][q]];
        p[q] = p0[q] + scale[tets[t][q]] * shift[tets[t][q]];
      }
      const double v_old = signed_volume(p0[0], p0[1], p0[2], p0[3]);
      const double v_new = signed_volume(p[0], p[1], p[2], p[3]);
      if (v_new * (v_old > 0 ? 1.0 : -1.0) < 0.25 * vol0[t]) {
        for (int v : tets[t])
          if (scale[v] > 0.0 && shift[v].squaredNorm() > 0.0) {
            scale[v] = round >= 20 ? 0.0 : 0.5 * scale[v];
            changed = true;
          }
      }
    }
    if (!changed) break;
  }

  std::vector<Vec3> nodes(local.size());
  for (std::size_t v = 0; v < local.size(); ++v) {
    const Vec3 l = local[v] + scale[v] * shift[v];
    nodes[v] = origin + l.x() * ex + l.y() * ey + l.z() * ez;
  }
  std::vector<BoundaryTriangle> btris;
  btris.reserve(faces.size());
  for (const auto& f : faces) btris.push_back({f, cap_tag(f)});
  for (int tag : {2, 3, 100})
    if (std::none_of(btris.begin(), btris.end(), [&](const auto& b) { return b.tag == tag; }))
      throw DegenerateGeometry("generate_graft: resolution too coarse to resolve tag " + std::to_string(tag));

  Mesh m(std::move(nodes), std::move(tets), std::move(btris), {to_centerline(host), to_centerline(graft)});
  check_quality(m, spec.min_dihedral_deg);
  return m;
}

GeometrySpec straight_tube_spec(double radius, double length, double h) {
  GeometrySpec spec;
  spec.branches.push_back({{Vec3(0, 0, 0), Vec3(0, 0, length)}, {radius, radius}});
  spec.resolution = h;
  return spec;
}

GeometrySpec bent_tube_spec(double radius, double bend_radius, double angle_deg, double h) {
  if (!(bend_radius > radius)) throw DegenerateGeometry("bend radius must exceed the tube radius");
  if (!(angle_deg > 0.0 && angle_deg < 360.0)) throw ConfigError("bend angle must lie in (0, 360) degrees");
  const double sweep = angle_deg * std::numbers::pi / 180.0;
  const int pieces = std::max(8, static_cast<int>(std::ceil(bend_radius * sweep / (0.5 * h))));
  BranchSpec b;
  for (int i = 0; i <= pieces; ++i) {
    const double t = sweep * i / pieces;
    b.points.emplace_back(bend_radius * std::sin(t), 0.0, bend_radius * (1.0 - std::cos(t)));
    b.radii.push_back(radius);
  }
  GeometrySpec spec;
  spec.branches.push_back(std::move(b));
  spec.resolution = h;
  return spec;
}

GeometrySpec single_graft_spec(double radius, double h, double host_length, double offset,
                               double graft_lead) {
  const double xm = 0.5 * host_length;
  GeometrySpec spec;
  spec.branches.push_back({{Vec3(0, 0, 0), Vec3(host_length, 0, 0)}, {radius, radius}});
  spec.branches.push_back({{Vec3(xm - offset - graft_lead, offset, 0), Vec3(xm - offset, offset, 0),
                            Vec3(xm, 0, 0), Vec3(host_length, 0, 0)},
                           {radius, radius, radius, radius}});
  spec.resolution = h;
  return spec;
}

double min_dihedral_angle(const Mesh& mesh) {
  static constexpr std::array<std::array<int, 2>, 6> kEdges{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  double best = 180.0;
  for (const auto& tet : mesh.tets()) {
    std::array<Vec3, 4> p;
    for (int q = 0; q < 4; ++q) p[q] = mesh.nodes()[tet[q]];
    for (const auto& e : kEdges) {
      // The two faces through edge (a,b) contain the remaining vertices c,d.
      int others[2], n = 0;
      for (int q = 0; q < 4; ++q)
        if (q != e[0] && q != e[1]) others[n++] = q;
      const Vec3 axis = (p[e[1]] - p[e[0]]).normalized();
      Vec3 u = p[others[0]] - p[e[0]];
      Vec3 w = p[others[1]] - p[e[0]];
      u -= u.dot(axis) * axis;
      w -= w.dot(axis) * axis;
      const double c = std::clamp(u.normalized().dot(w.normalized()), -1.0, 1.0);
      best = std::min(best, std::acos(c) * 180.0 / kPi);
    }
  }
  return best;
}

}  // namespace ocrom::mesh
