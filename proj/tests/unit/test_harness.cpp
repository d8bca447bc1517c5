#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "robin/errors.hpp"
#include "robin/harness/config.hpp"
#include "robin/harness/record.hpp"
#include "robin/harness/runners.hpp"

using namespace robin;
using namespace robin::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("robinstrip-" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_fiber() {
  return parse_config_text(R"({"kind": "fiber", "alpha": [-2, -1, -0.5, 0, 1], "d": ["inf"],
                               "mesh": {"fiber_elements": 64}})");
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("every kind has a valid default config") {
  for (auto k : {ExperimentKind::Fiber, ExperimentKind::Strip, ExperimentKind::Theorem1, ExperimentKind::Theorem2,
                 ExperimentKind::Corollary, ExperimentKind::Oracle}) {
    CAPTURE(to_string(k));
    const auto c = default_config(k);
    CHECK_NOTHROW(validate(c));
    CHECK(parse_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_kind("theorem3"), ConfigError);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "fiber", "alphas": [-1]})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "fiber", "mesh": {"nodes": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "strip", "curves": [{"circle": 1, "colour": 2}]})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "strip", "families": [{"type": "circle", "radius": [1], "x": 0}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "fiber", "schema_version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"alpha": [-1]})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "fiber"})", ExperimentKind::Strip), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/robin.json"), IoError);
}

TEST_CASE("widths accept the string inf") {
  const auto c = parse_config_text(R"({"kind": "fiber", "d": ["inf", 0.5]})");
  REQUIRE(c.widths.size() == 2);
  CHECK(std::isinf(c.widths[0]));
  CHECK(c.widths[1] == 0.5);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "fiber", "d": ["infinite"]})"), ConfigError);
}

TEST_CASE("preconditions are checked before any solve") {
  // exterior needs α < 0 and a convex curve
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "strip", "alpha": [1], "d": ["inf"], "curves": [{"circle": 1}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "strip", "alpha": [-1], "d": ["inf"],
      "curves": [{"length": 6.283185307179586, "modes": [{"k": 2, "amplitude": 1.5}]}]})"),
                  ConfigError);
  // d beyond the critical width of a sign-changing curvature
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "strip", "alpha": [-1], "d": [3],
      "curves": [{"length": 6.283185307179586, "modes": [{"k": 2, "amplitude": 1.5}]}]})"),
                  ConfigError);
  // curvature above the cap
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "theorem2", "kappa_cap": 0.5, "curves": [{"circle": 1}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "theorem1", "d": ["inf"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "strip", "mesh": {"levels": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"kind": "strip", "curves": [{"id": "a", "circle": 1}, {"id": "a", "circle": 2}]})"),
                  ConfigError);
}

TEST_CASE("config round-trips through canonical JSON with a stable hash") {
  const auto c = parse_config_text(R"({"kind": "theorem2", "alpha": [-2],
      "families": [{"type": "random_capped", "kappa_cap": 1, "count": 3, "harmonic": 2}], "seed": 7})");
  REQUIRE(c.curves.size() == 3);
  const auto j = to_json(c);
  const auto back = parse_config(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  const auto again = parse_config_text(R"({"kind": "theorem2", "alpha": [-2],
      "families": [{"type": "random_capped", "kappa_cap": 1, "count": 3, "harmonic": 2}], "seed": 7})");
  CHECK(config_hash(again) == config_hash(c));
  const auto other = parse_config_text(R"({"kind": "theorem2", "alpha": [-2],
      "families": [{"type": "random_capped", "kappa_cap": 1, "count": 3, "harmonic": 2}], "seed": 8})");
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("capped profiles touch the cap and have total curvature 2π") {
  const auto p = capped_profile(1.0, 0.7, 2);
  CHECK(p.length() == doctest::Approx(2 * M_PI / 0.7).epsilon(1e-14));
  CHECK(p.curvature(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(is_circle(capped_profile(1.0, 1.0, 2)));
  CHECK_FALSE(is_circle(p));
}

TEST_CASE("compare classifies against the error bar") {
  CHECK(std::string(compare(1.0, 2.0, 0.1)) == verdict::kHolds);
  CHECK(std::string(compare(1.0, 1.05, 0.1)) == verdict::kEqual);
  CHECK(std::string(compare(1.05, 1.0, 0.1)) == verdict::kEqual);
  CHECK(std::string(compare(1.5, 1.0, 0.1)) == verdict::kIndeterminate);
  CHECK(std::string(compare(3.0, 1.0, 0.1)) == verdict::kFails);
}

TEST_CASE("exit code reflects the worst verdict") {
  RunRecord r;
  CaseResult c;
  c.verdict = verdict::kHolds;
  r.cases.push_back(c);
  CHECK(exit_code(r) == 0);
  r.cases.back().verdict = verdict::kError;
  CHECK(exit_code(r) == 1);
  c.verdict = verdict::kFails;
  r.cases.push_back(c);
  CHECK(exit_code(r) == 2);
  r.cases.clear();
  r.tables["checks"] = nlohmann::json::array({{{"name", "x"}, {"passed", false}}});
  CHECK(exit_code(r) == 2);
}

TEST_CASE("an empty record still writes the CSV header") {
  RunRecord r;
  r.kind = "strip";
  std::ostringstream out;
  write_results_csv(out, r);
  CHECK(out.str() == std::string(kCsvHeader) + "\n");
}

TEST_CASE("records round-trip through JSON, infinities included") {
  RunRecord r;
  r.kind = "theorem2";
  r.config_hash = "0123456789abcdef";
  r.software_version = "0.1.0";
  CaseResult c;
  c.case_id = "0000-x";
  c.curve_id = "x";
  c.width = std::numeric_limits<double>::infinity();
  c.alpha = -2;
  c.lambda2 = -0.3;
  c.verdict = verdict::kHolds;
  c.details = {{"k", 1}};
  r.cases.push_back(c);
  r.tables["t"] = {1, 2};
  r.timings["case_total"] = 3.0;
  const auto j = to_json(r);
  CHECK_FALSE(j.contains("timings"));
  const auto back = record_from_json(j);
  CHECK(back == r);
  REQUIRE(back.cases[0].width);
  CHECK(std::isinf(*back.cases[0].width));
  CHECK_FALSE(back.cases[0].ru.has_value());
}

TEST_CASE("a five-alpha fiber run writes five rows and one plot") {
  const auto cfg = small_fiber();
  const auto rec = run_experiment(cfg);
  REQUIRE(rec.cases.size() == 5);
  for (const auto& c : rec.cases) CHECK(c.verdict == verdict::kComputed);
  CHECK(rec.cases[3].note == "no discrete spectrum");  // α = 0
  CHECK(exit_code(rec) == 0);

  const auto root = scratch("fiber");
  const auto dir = emit_outputs(rec, root);
  CHECK(dir.filename().string() == "fiber-" + rec.config_hash);
  const auto csv = slurp(dir / "results.csv");
  CHECK(count_lines(csv) == 6);
  CHECK(csv.rfind(kCsvHeader, 0) == 0);
  std::size_t svgs = 0;
  for (const auto& e : fs::directory_iterator(dir)) svgs += e.path().extension() == ".svg";
  CHECK(svgs == 1);
  CHECK(slurp(dir / "plot.svg").find("<svg") != std::string::npos);
  CHECK(fs::exists(dir / "timing.json"));

  const auto j = nlohmann::json::parse(slurp(dir / "run.json"));
  CHECK(record_from_json(j) == rec);
  fs::remove_all(root);
}

TEST_CASE("outputs do not depend on the worker count") {
  const auto cfg = small_fiber();
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 3);
  CHECK(a == b);
  const auto ra = scratch("det-a"), rb = scratch("det-b");
  const auto da = emit_outputs(a, ra), db = emit_outputs(b, rb);
  for (const char* f : {"results.csv", "run.json", "plot.svg"}) {
    CAPTURE(f);
    CHECK(slurp(da / f) == slurp(db / f));
  }
  fs::remove_all(ra);
  fs::remove_all(rb);
}

TEST_CASE("a solver failure is recorded as an error, not thrown") {
  // exterior of the disk with the cap far below its curvature: the sandwich rejects it
  auto cfg = default_config(ExperimentKind::Theorem2);
  cfg.alphas = {-2};
  cfg.curves.resize(1);
  cfg.kappa_cap = 0.5;  // bypasses validate on purpose
  cfg.mesh.n_s = 16;
  cfg.mesh.n_t = 8;
  cfg.mesh.levels = 2;
  cfg.mesh.fiber_elements = 64;
  const auto rec = run_theorem2(cfg);
  REQUIRE(rec.cases.size() == 1);
  CHECK(rec.cases[0].verdict == verdict::kError);
  CHECK(exit_code(rec) == 1);
}

TEST_CASE("no second bound state is reported as absent") {
  auto cfg = default_config(ExperimentKind::Theorem2);
  cfg.alphas = {-0.5};
  cfg.curves.resize(1);
  cfg.mesh.fiber_elements = 64;
  const auto rec = run_theorem2(cfg);
  REQUIRE(rec.cases.size() == 1);
  CHECK(rec.cases[0].verdict == verdict::kAbsent);
  CHECK(exit_code(rec) == 0);
  CHECK(rec.tables.at("second_bound_threshold").get<double>() == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("unreadable output root raises IoError") {
  RunRecord r;
  r.kind = "fiber";
  r.config_hash = "0000000000000000";
  const auto file = scratch("blocker");
  std::ofstream(file) << "x";
  CHECK_THROWS_AS(emit_outputs(r, file), IoError);
  fs::remove_all(file);
}
