#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "entsel/config.hpp"
#include "entsel/report.hpp"
#include "entsel/serialize.hpp"
#include "fixtures.hpp"

using namespace entsel;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("entsel-test-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Table sample_table() {
  Table t;
  t.name = "sample";
  t.columns = {"label", "count", "value", "flag", "blank"};
  t.add_row({std::string("plain"), std::int64_t{3}, 0.1234567890123456, true, std::monostate{}});
  t.add_row({std::string("has, comma \"and\" quotes"), std::int64_t{-1}, 1.0 / 3.0, false,
             std::nan("")});
  return t;
}

}  // namespace

TEST_CASE("numbers carry 12 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(HUGE_VAL) == "inf");
  CHECK(round12(0.1234567890123456) == 0.123456789012);
}

TEST_CASE("csv quoting") {
  const auto csv = to_csv(sample_table());
  CHECK(csv.find("label,count,value,flag,blank\r\n") == 0);
  CHECK(csv.find("plain,3,0.123456789012,true,\r\n") != std::string::npos);
  CHECK(csv.find("\"has, comma \"\"and\"\" quotes\",-1,0.333333333333,false,nan\r\n") !=
        std::string::npos);
}

TEST_CASE("rows must match the columns") {
  Table t;
  t.name = "x";
  t.columns = {"a"};
  CHECK_THROWS_AS(t.add_row({1.0, 2.0}), Error);
  CHECK_THROWS_AS(t.column("b"), Error);
}

TEST_CASE("json round trip at 12 digits") {
  const Table t = sample_table();
  const Table back = table_from_json(json::parse(to_json(t).dump()));
  CHECK(back.name == t.name);
  CHECK(back.columns == t.columns);
  REQUIRE(back.rows.size() == 2);
  CHECK(std::get<double>(back.rows[0][2]) == round12(0.1234567890123456));
  CHECK(std::get<std::int64_t>(back.rows[0][1]) == 3);
  CHECK(std::get<bool>(back.rows[0][3]));
  CHECK(std::holds_alternative<std::monostate>(back.rows[0][4]));
  CHECK(std::isnan(std::get<double>(back.rows[1][4])));
  CHECK(to_json(back) == to_json(t));
}

TEST_CASE("emit_report writes deterministic files") {
  Report r;
  r.experiment = "demo";
  r.hash = "0123456789abcdef";
  r.tables.push_back(sample_table());
  r.criteria.push_back({1, "check", true, "fine"});
  const auto d1 = fresh_dir("emit1"), d2 = fresh_dir("emit2");
  const auto p1 = emit_report(r, d1);
  const auto p2 = emit_report(r, d2);
  REQUIRE(p1.size() == 3);
  CHECK(p1[0].filename() == "sample-0123456789abcdef.csv");
  CHECK(p1[1].filename() == "sample-0123456789abcdef.json");
  CHECK(p1[2].filename() == "demo-0123456789abcdef.md");
  for (std::size_t k = 0; k < p1.size(); ++k) CHECK(slurp(p1[k]) == slurp(p2[k]));
  CHECK(slurp(p1[2]).find("| 1 | check | PASS | fine |") != std::string::npos);

  // Other JSON documents in the directory are skipped by the loader.
  std::ofstream(d1 / "other.json") << "{\"rays\": []}";
  const auto loaded = load_tables(d1);
  REQUIRE(loaded.size() == 1);
  CHECK(to_json(loaded[0]) == to_json(r.tables[0]));
}

TEST_CASE("an empty report writes only the summary") {
  Report r;
  r.experiment = "empty";
  r.hash = "00";
  const auto paths = emit_report(r, fresh_dir("empty"));
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].extension() == ".md");
}

TEST_CASE("unwritable output directories report the path") {
  const auto blocker = fresh_dir("blocker");
  std::ofstream(blocker) << "file";
  Report r;
  r.experiment = "x";
  r.hash = "00";
  try {
    emit_report(r, blocker / "sub");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
  }
  std::filesystem::remove(blocker);
}

TEST_CASE("config parsing") {
  const auto def = default_config();
  CHECK(def.scenario.name == "translated-squares-2d");
  CHECK(def.grid == std::vector<int>{32});
  CHECK(def.eps_schedule == std::vector<double>{0.2, 0.1, 0.05, 0.025});

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"sinkhorn": {"tolerance": 1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"eps_schedule": [0.1, 0.2]})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"eps_schedule": [0.001]})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"scenario": "nowhere"})")), ConfigError);

  const auto inline_cfg = config_from_json(json::parse(R"({
    "scenario": {"name": "ramp", "dim": 1,
                 "source": {"low": [0], "high": [1],
                            "density": {"kind": "polynomial",
                                        "terms": [{"coeff": 1, "powers": [1]}]}},
                 "target": {"low": [2], "high": [3], "density": "uniform"}},
    "grid": [8], "eps_schedule": [0.5, 0.25]})"));
  CHECK(inline_cfg.scenario.name == "ramp");
  CHECK(inline_cfg.scenario.source_density.kind == DensitySpec::Kind::polynomial);
  CHECK(inline_cfg.cell_width() == doctest::Approx(0.125));
}

TEST_CASE("selection schedule respects the resolution guard") {
  auto cfg = config_from_json(json::parse(R"({"grid": [16], "eps_schedule": [0.2, 0.1]})"));
  const auto sched = cfg.selection_schedule();
  // 4 h^2 = 1/64: both extras fall below it and are dropped; the guard value
  // itself closes the schedule.
  REQUIRE(sched.size() == 3);
  CHECK(sched[2] == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
  const auto fine = config_from_json(json::parse(R"({"grid": [64], "eps_schedule": [0.2, 0.1]})"));
  CHECK(fine.selection_schedule() == std::vector<double>{0.2, 0.1, 0.0125, 0.00625, 0.0009765625});
  for (std::size_t k = 1; k < sched.size(); ++k) CHECK(sched[k] < sched[k - 1]);
}

TEST_CASE("config hash") {
  const auto a = default_config();
  auto b = default_config();
  b.output_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(config_from_json(canonical_json(a))) == config_hash(a));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(instance_hash(a) == instance_hash(b));
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("serialized ray decompositions and limit plans") {
  const auto [mu, nu] = fixtures::builtin("segment-1d", 4);
  const auto sol = solve_exact(mu, nu, cost_matrix(mu, nu));
  const auto rays = extract_rays(sol, extend_u(sol, mu, nu), mu, nu);
  const json doc = to_json(rays);
  REQUIRE(doc.at("rays").size() == 1);
  CHECK(doc["rays"][0]["direction"][0].get<double>() == -1.0);
  CHECK(doc["rays"][0]["source_indices"].size() == 4);
  CHECK(doc.at("unassigned_mass").get<double>() == 0.0);

  const std::vector<double> t{0.0, 1.0}, s{2.0, 3.0};
  const Vector w = Vector::Constant(2, 0.5);
  const json lim = to_json(solve_schrodinger_1d(t, w, s, w, 2, 0.0));
  CHECK(lim.at("plan").size() == 2);
  CHECK(lim.at("f").size() == 2);
  CHECK(lim.at("converged").get<bool>());
  CHECK(lim.at("residual").get<double>() <= 1e-9);
}
