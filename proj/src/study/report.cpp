#include "ocrom/study/report.hpp"

#include <sys/utsname.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "ocrom/errors.hpp"

namespace ocrom::study {

using nlohmann::json;

namespace {

std::string g17(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no NaN/Infinity; those map to null.
std::string json_number(double x) {
  if (!std::isfinite(x)) return "null";
  std::string s = g17(x);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void dump(const json& j, std::ostringstream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << inner << json(it.key()).dump() << ": ";
        dump(it.value(), out, indent + 1);
      }
      out << '\n' << pad << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << (flat ? ", " : ",");
        if (!flat) out << '\n' << inner;
        first = false;
        dump(e, out, indent + 1);
      }
      if (!flat) out << '\n' << pad;
      out << ']';
      return;
    }
    case json::value_t::number_float:
      out << json_number(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

json errors_json(const rom::ErrorReport& e) {
  return {{"E_v", e.E_v},         {"E_p", e.E_p},         {"E_u", e.E_u},         {"E_w", e.E_w},
          {"E_q", e.E_q},         {"E_s", e.E_s},         {"E_z", e.E_z},         {"E_s_rel", e.E_s_rel},
          {"E_z_rel", e.E_z_rel}, {"E_u_rel", e.E_u_rel}, {"E_T", e.E_T},         {"E_T_rel", e.E_T_rel},
          {"E_J", e.E_J}};
}

constexpr const char* kFields[] = {"v", "p", "u", "w", "q"};
constexpr const char* kCsvColumns[] = {"E_v", "E_p", "E_u", "E_w", "E_q", "E_T", "E_T_rel", "E_J"};

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void summarize_timings(StudyReport& r) {
  if (r.timings.empty()) return;
  double full = 0, online = 0, omax = 0, s = 0, smax = 0, sj = 0, sjmax = 0;
  for (const auto& t : r.timings) {
    full += t.full_seconds;
    online += t.online_seconds;
    omax = std::max(omax, t.online_seconds);
    s += t.speedup;
    smax = std::max(smax, t.speedup);
    sj += t.speedup_J;
    sjmax = std::max(sjmax, t.speedup_J);
  }
  const double n = static_cast<double>(r.timings.size());
  r.full_mean_seconds = full / n;
  r.online_mean_seconds = online / n;
  r.online_max_seconds = omax;
  r.speedup_mean = s / n;
  r.speedup_max = smax;
  r.speedup_J_mean = sj / n;
  r.speedup_J_max = sjmax;
}

json environment_record() {
  json env;
  utsname u{};
  if (uname(&u) == 0) {
    env["system"] = std::string(u.sysname) + " " + u.release;
    env["machine"] = u.machine;
  }
#if defined(__clang__)
  env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  env["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  env["cxx_standard"] = static_cast<long>(__cplusplus);
#ifdef NDEBUG
  env["assertions"] = false;
#else
  env["assertions"] = true;
#endif
  env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
  env["hardware_threads"] = std::thread::hardware_concurrency();
  env["threads_used"] = 1;
  return env;
}

std::string to_csv(const StudyReport& r) {
  std::ostringstream o;
  o << "n";
  for (const char* c : kCsvColumns) o << ',' << c;
  o << '\n';
  for (const auto& row : r.rows) {
    const auto& e = row.mean;
    o << row.n;
    for (double x : {e.E_v, e.E_p, e.E_u, e.E_w, e.E_q, e.E_T, e.E_T_rel, e.E_J}) o << ',' << g17(x);
    o << '\n';
  }
  return o.str();
}

json to_json(const StudyReport& r) {
  json j;
  j["kind"] = r.kind;
  j["config_hash"] = [&] {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.config_hash));
    return std::string(buf);
  }();
  j["training"] = {{"size", r.training_size}, {"seed", r.training_seed}};
  j["test"] = {{"size", r.test_size}, {"seed", r.test_seed}};
  j["full_dofs"] = r.full_dofs;
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"dimension", row.dimension}, {"inf_sup", row.inf_sup},
                    {"mean", errors_json(row.mean)}, {"max", errors_json(row.max)}});
  j["rows"] = rows;
  json timings = json::array();
  for (const auto& t : r.timings)
    timings.push_back({{"mu", t.mu},
                       {"full_seconds", t.full_seconds},
                       {"online_seconds", t.online_seconds},
                       {"reconstruct_seconds", t.reconstruct_seconds},
                       {"speedup", t.speedup},
                       {"speedup_J", t.speedup_J},
                       {"newton_iterations", t.newton_iterations}});
  j["timings"] = timings;
  j["timing_summary"] = {{"offline_seconds", r.offline_seconds},     {"full_mean_seconds", r.full_mean_seconds},
                         {"online_mean_seconds", r.online_mean_seconds}, {"online_max_seconds", r.online_max_seconds},
                         {"speedup_mean", r.speedup_mean},           {"speedup_max", r.speedup_max},
                         {"speedup_J_mean", r.speedup_J_mean},       {"speedup_J_max", r.speedup_J_max}};
  json pod;
  for (int k = 0; k < 5; ++k)
    pod[kFields[k]] = {{"eigenvalues", r.eigenvalues[static_cast<std::size_t>(k)]},
                       {"retained_energy", r.retained_energy[static_cast<std::size_t>(k)]},
                       {"rank", r.rank[static_cast<std::size_t>(k)]}};
  j["pod"] = pod;
  const auto& c = r.pod_check;
  j["pod_check"] = {{"descending", c.descending},
                    {"nonnegative", c.nonnegative},
                    {"energy_ok", c.energy_ok},
                    {"orthonormal", c.orthonormal},
                    {"min_retained_energy", c.min_retained_energy},
                    {"max_orthonormality_error", c.max_orthonormality_error}};
  j["warnings"] = r.warnings;
  j["environment"] = r.environment;
  return j;
}

std::string dump_json(const json& j) {
  std::ostringstream out;
  dump(j, out, 0);
  out << '\n';
  return out.str();
}

void write_csv(const StudyReport& r, const std::filesystem::path& path) { write_text(path, to_csv(r)); }

void write_json(const StudyReport& r, const std::filesystem::path& path) { write_text(path, dump_json(to_json(r))); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string csv_from_json(const json& report) {
  std::ostringstream o;
  o << "n";
  for (const char* c : kCsvColumns) o << ',' << c;
  o << '\n';
  try {
    for (const auto& row : report.at("rows")) {
      o << row.at("n").get<int>();
      for (const char* c : kCsvColumns) {
        const auto& v = row.at("mean").at(c);
        o << ',' << (v.is_null() ? std::string("NaN") : g17(v.get<double>()));
      }
      o << '\n';
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  return o.str();
}

}  // namespace ocrom::study
