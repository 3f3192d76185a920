#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ocrom/rom/metrics.hpp"
#include "json.hpp"

namespace ocrom::study {

struct ErrorRow {
  int n = 0;
  int dimension = 0;  // reduced basis count, liftings included
  double inf_sup = 0.0;
  rom::ErrorReport mean, max;
};

struct TimingRow {
  std::vector<double> mu;
  double full_seconds = 0.0;
  double online_seconds = 0.0;       // reduced solve including J
  double reconstruct_seconds = 0.0;  // lifting the reduced fields to full order
  double speedup = 0.0;              // full / (online + reconstruct)
  double speedup_J = 0.0;            // full / online
  int newton_iterations = 0;
};

/// Checks asserted on every study: eigenvalues descending and nonnegative,
/// retained energy, orthonormality of the aggregated bases.
struct PodCheck {
  bool descending = true;
  bool nonnegative = true;
  bool energy_ok = true;
  bool orthonormal = true;
  double min_retained_energy = 1.0;
  double max_orthonormality_error = 0.0;
  bool ok() const { return descending && nonnegative && energy_ok && orthonormal; }
};

struct StudyReport {
  std::string kind;  // "errors" or "speedup"
  std::uint64_t config_hash = 0;
  std::uint64_t training_seed = 0, test_seed = 0;
  int training_size = 0, test_size = 0;
  int full_dofs = 0;
  std::vector<ErrorRow> rows;
  std::vector<TimingRow> timings;
  double offline_seconds = 0.0;
  double full_mean_seconds = 0.0;
  double online_mean_seconds = 0.0, online_max_seconds = 0.0;
  double speedup_mean = 0.0, speedup_max = 0.0;
  double speedup_J_mean = 0.0, speedup_J_max = 0.0;
  std::array<std::vector<double>, 5> eigenvalues;  // v, p, u, w, q
  std::array<double, 5> retained_energy{};
  std::array<int, 5> rank{};
  PodCheck pod_check;
  std::vector<std::string> warnings;
  nlohmann::json environment;
};

/// Fills the timing summary (means, maxima) from `timings`.
void summarize_timings(StudyReport& report);

nlohmann::json environment_record();

/// Header n,E_v,E_p,E_u,E_w,E_q,E_T,E_T_rel,E_J; one row of test-set means
/// per sweep value, 17 significant digits.
std::string to_csv(const StudyReport& report);
nlohmann::json to_json(const StudyReport& report);
/// JSON text with every floating-point number printed with 17 significant digits.
std::string dump_json(const nlohmann::json& j);

void write_csv(const StudyReport& report, const std::filesystem::path& path);
void write_json(const StudyReport& report, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
/// Rebuilds the CSV from a report JSON document.
std::string csv_from_json(const nlohmann::json& report);

}  // namespace ocrom::study
