#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "ocrom/rom/artifact.hpp"
#include "ocrom/study/config.hpp"
#include "ocrom/study/report.hpp"

namespace ocrom::study {

std::shared_ptr<optctrl::FullOrderModel> build_model(const StudyConfig& config);

struct OfflineResult {
  std::shared_ptr<optctrl::FullOrderModel> model;
  rom::SnapshotSet snapshots;
  rom::PodBasis pod;
  rom::OfflineArtifact artifact;  // reduced model at n_max
};

/// Snapshots, POD and projection at n_max. Timing excludes mesh generation.
OfflineResult run_offline(const StudyConfig& config);
OfflineResult run_offline(const StudyConfig& config, std::shared_ptr<optctrl::FullOrderModel> model);

PodCheck check_pod(const rom::PodBasis& pod, const rom::ReducedModel& reduced, const fem::OperatorSet& ops);

/// Offline once at the largest sweep value, then for every n: truncate,
/// re-project and evaluate errors over the test set. Writes errors.csv and
/// errors.json (and field dumps when enabled) into config.output.
StudyReport run_error_study(const StudyConfig& config);
StudyReport run_error_study(const StudyConfig& config, const OfflineResult& offline);

/// Wall-clock full solve versus online solve at each mu. Throws ConfigError
/// for an empty list and MissingArtifact when the artifact does not exist.
StudyReport run_speedup_study(const StudyConfig& config, const std::filesystem::path& artifact,
                              const std::vector<numerics::Vector>& mus);
StudyReport run_speedup_study(const StudyConfig& config, const optctrl::FullOrderModel& model,
                              const rom::OfflineArtifact& artifact, const std::vector<numerics::Vector>& mus);

/// Field dump files ("ocrom-fields 1").
void write_fields(const std::filesystem::path& path, const optctrl::OcpSolution& s);
optctrl::OcpSolution read_fields(const std::filesystem::path& path);

/// Recomputes every error row of `report` from the field dumps written by an
/// error study; returns the largest relative discrepancy.
double cross_check(const StudyConfig& config, const nlohmann::json& report);

}  // namespace ocrom::study
