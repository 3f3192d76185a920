#pragma once

#include <vector>

#include "ocrom/mesh/mesh.hpp"

namespace ocrom::mesh {

struct BranchSpec {
  std::vector<Vec3> points;   // centerline control points (mm)
  std::vector<double> radii;  // one radius per control point (mm)
};

struct GeometrySpec {
  std::vector<BranchSpec> branches;
  double resolution = 0.0;  // target edge length h (mm)
  // Reject meshes whose smallest dihedral angle (degrees) falls below this.
  double min_dihedral_deg = 1.0;
};

/// Structured tube: rings of nodes swept along the centerline with
/// parallel-transport frames, each prism layer split into three tets.
/// Tags: 2 at the first centerline end, 100 at the last, 1 on the wall.
Mesh generate_tube(const GeometrySpec& spec);

/// Host vessel plus one graft branch that joins it and then shares its path to
/// the outlet. Branch 0 is the host and must be straight; the graft must start
/// with a segment parallel to the host. The union is cut from a Kuhn-split
/// cube lattice aligned with the host, and wall nodes are snapped onto the
/// tube surfaces. Tags: 2 host inlet, 3 graft inlet, 100 outlet, 1 wall.
Mesh generate_graft(const GeometrySpec& spec);

/// Straight tube along +z from the origin.
GeometrySpec straight_tube_spec(double radius, double length, double h);

/// Tube of the given radius following a circular arc of radius
/// `bend_radius` through `angle_deg` degrees, leaving the origin along +x and
/// bending toward +z.
GeometrySpec bent_tube_spec(double radius, double bend_radius, double angle_deg, double h);

/// Host along +x of length `host_length`; the graft runs parallel at lateral
/// offset `offset`, turns 45 degrees and joins the host at its midpoint.
GeometrySpec single_graft_spec(double radius, double h, double host_length = 8.0,
                               double offset = 3.0, double graft_lead = 2.0);

/// Smallest dihedral angle over all tets, in degrees.
double min_dihedral_angle(const Mesh& mesh);

}  // namespace ocrom::mesh
