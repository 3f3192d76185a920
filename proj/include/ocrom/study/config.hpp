#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ocrom/mesh/generators.hpp"
#include "ocrom/optctrl/model.hpp"
#include "ocrom/rom/pod.hpp"

namespace ocrom::study {

struct MeshSource {
  enum class Kind { file, tube, bent_tube, graft };
  Kind kind = Kind::tube;
  std::filesystem::path file;
  double radius = 1.0;
  double length = 3.0;        // tube
  double bend_radius = 3.0;   // bent tube
  double bend_angle = 90.0;   // bent tube, degrees
  double resolution = 0.4;
};

struct SampleSpec {
  int size = 1;
  rom::TrainingSet::Sampling sampling = rom::TrainingSet::Sampling::random;
  std::uint64_t seed = 1;
};

struct StudyConfig {
  MeshSource mesh;
  optctrl::OcpConfig problem;
  SampleSpec training{50, rom::TrainingSet::Sampling::random, 1};
  SampleSpec test{20, rom::TrainingSet::Sampling::random, 2};
  rom::PodOptions pod;
  bool supremizers = true;
  std::vector<int> sweep;  // empty: 1..pod.n_max
  std::filesystem::path output = "study_out";
  bool dump_fields = false;

  void validate() const;
  /// Canonical key = value text of every setting that influences results.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::vector<int> sweep_values() const;
};

/// Flat INI text with sections [mesh], [problem], [newton], [training],
/// [test], [pod], [study]. Unknown keys are rejected. Throws ConfigError.
StudyConfig parse_config(const std::string& text);
StudyConfig load_config(const std::filesystem::path& path);

mesh::Mesh build_mesh(const MeshSource& source);
rom::TrainingSet make_samples(const SampleSpec& spec, const std::vector<std::array<double, 2>>& domain);

}  // namespace ocrom::study
