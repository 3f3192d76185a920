#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ocrom/mesh/mesh.hpp"

namespace ocrom::mesh {

// Text format "ocrom-mesh 1":
//
//   ocrom-mesh 1
//   $nodes <n>
//   <id> <x> <y> <z>
//   $tets <m>
//   <id> <n0> <n1> <n2> <n3>
//   $btris <k>
//   <id> <n0> <n1> <n2> <tag>
//   $centerline <branch-id> <p>      (zero or more, branch ids 0,1,...)
//   <x> <y> <z> <R>
//   $end
//
// Floats are written with 17 significant digits so a write/read cycle is
// bit-exact.

std::string format_mesh(const Mesh& mesh);
Mesh parse_mesh(std::string_view text);

Mesh load_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace ocrom::mesh
