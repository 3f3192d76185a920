#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "ocrom/rom/reduced.hpp"

namespace ocrom::rom {

/// Everything the online phase needs, plus a record of how it was built.
struct OfflineArtifact {
  ReducedModel model;
  std::uint64_t config_hash = 0;
  TrainingSet training;
  std::array<Vector, 5> eigenvalues;  // v, p, u, w, q
  double offline_seconds = 0.0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Record file (see io::RecordWriter) with header line "ocrom-rb 1".
void save_artifact(const std::filesystem::path& path, const OfflineArtifact& artifact);
OfflineArtifact load_artifact(const std::filesystem::path& path);

}  // namespace ocrom::rom
