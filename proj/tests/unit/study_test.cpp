#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ocrom/errors.hpp"
#include "ocrom/study/study.hpp"

using namespace ocrom;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small straight tube
[mesh]
generator = tube
radius = 1
length = 3
resolution = 0.5

[problem]
equation = stokes
domain = 70, 80

[training]
size = 6
seed = 3

[test]
size = 3
seed = 4

[pod]
n_max = 2

[study]
sweep = 1, 2
dump_fields = true
)";

study::StudyConfig small_config(const std::string& dir) {
  auto c = study::parse_config(kSmall);
  c.output = fs::temp_directory_path() / dir;
  fs::remove_all(c.output);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = study::parse_config(kSmall);
  CHECK(c.mesh.kind == study::MeshSource::Kind::tube);
  CHECK(c.mesh.resolution == 0.5);
  CHECK(c.training.size == 6);
  CHECK(c.test.seed == 4);
  CHECK(c.sweep_values() == std::vector<int>{1, 2});
  REQUIRE(c.problem.domain.size() == 1);
  CHECK(c.problem.domain[0][1] == 80.0);
  CHECK(c.hash() == study::parse_config(kSmall).hash());

  auto d = study::parse_config("[pod]\nn_max = 4\n");
  CHECK(d.sweep_values() == std::vector<int>{1, 2, 3, 4});
  CHECK(d.test.size == 20);
  CHECK(d.hash() != c.hash());

  CHECK_THROWS_AS(study::parse_config("[mesh]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(study::parse_config("[nowhere]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(study::parse_config("[pod]\nn_max = many\n"), ConfigError);
  CHECK_THROWS_AS(study::parse_config("[problem]\nequation = euler\n"), ConfigError);
  CHECK_THROWS_AS(study::parse_config("[training]\nsize = 0\n"), ConfigError);
  CHECK_THROWS_AS(study::load_config("/nonexistent/study.ini"), IoError);
}

TEST_CASE("CSV of an empty report is the header") {
  study::StudyReport r;
  r.kind = "errors";
  CHECK(study::to_csv(r) == "n,E_v,E_p,E_u,E_w,E_q,E_T,E_T_rel,E_J\n");
}

TEST_CASE("JSON numbers round trip exactly") {
  nlohmann::json j;
  j["third"] = 1.0 / 3.0;
  j["tiny"] = 4.9406564584124654e-324;
  j["big"] = 1.7976931348623157e308;
  j["list"] = {0.1, -2.5e-17, 3.0};
  const auto back = nlohmann::json::parse(study::dump_json(j));
  CHECK(back["third"].get<double>() == 1.0 / 3.0);
  CHECK(back["tiny"].get<double>() == 4.9406564584124654e-324);
  CHECK(back["big"].get<double>() == 1.7976931348623157e308);
  CHECK(back["list"][1].get<double>() == -2.5e-17);
}

TEST_CASE("error study outputs") {
  const auto c = small_config("ocrom_study_a");
  const auto r = study::run_error_study(c);
  CHECK(r.rows.size() == 2);
  CHECK(r.test_size == 3);
  CHECK(r.pod_check.ok());
  const auto csv = slurp(c.output / "errors.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv == study::to_csv(r));

  const auto j = study::read_json(c.output / "errors.json");
  CHECK(study::csv_from_json(j) == csv);
  CHECK(j["config_hash"].get<std::string>().size() == 16);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    CHECK(j["rows"][i]["mean"]["E_T"].get<double>() == r.rows[i].mean.E_T);
  CHECK(r.rows[1].mean.E_T <= r.rows[0].mean.E_T);

  CHECK(study::cross_check(c, j) <= 1e-12);

  const auto again = small_config("ocrom_study_b");
  study::run_error_study(again);
  CHECK(slurp(again.output / "errors.csv") == csv);
  fs::remove_all(c.output);
  fs::remove_all(again.output);
}

TEST_CASE("field dumps round trip") {
  const auto s = optctrl::solve_stokes_ocp(fixtures::stokes_tube(), fixtures::mu1(72.0));
  const auto p = fs::temp_directory_path() / "ocrom_fields.bin";
  study::write_fields(p, s);
  const auto b = study::read_fields(p);
  fs::remove(p);
  CHECK((b.v.array() == s.v.array()).all());
  CHECK((b.q.array() == s.q.array()).all());
  CHECK((b.mu.array() == s.mu.array()).all());
  CHECK(b.J == s.J);
}

TEST_CASE("speedup study") {
  auto c = small_config("ocrom_study_c");
  CHECK_THROWS_AS(study::run_speedup_study(c, "/nonexistent/a.rb", {fixtures::mu1(75.0)}), MissingArtifact);

  const auto off = study::run_offline(c);
  CHECK_THROWS_AS(study::run_speedup_study(c, *off.model, off.artifact, {}), ConfigError);
  const auto r = study::run_speedup_study(c, *off.model, off.artifact, {fixtures::mu1(71.0), fixtures::mu1(79.0)});
  REQUIRE(r.timings.size() == 2);
  for (const auto& t : r.timings) {
    CHECK(t.full_seconds > 0.0);
    CHECK(t.online_seconds > 0.0);
    CHECK(t.speedup == doctest::Approx(t.full_seconds / (t.online_seconds + t.reconstruct_seconds)));
  }
  CHECK(r.speedup_max >= r.speedup_mean);
  fs::remove_all(c.output);
}
