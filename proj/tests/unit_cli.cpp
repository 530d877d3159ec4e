#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "minmet/certifier.hpp"
#include "minmet/report.hpp"

using namespace minmet;
using nlohmann::json;

namespace {

const char* kHoldingConfig = R"({
  "schema_version": "1.0.0",
  "name": "cli-test-holding",
  "seed": 7,
  "budget": 64,
  "group": { "kind": "unitary", "n": 1 },
  "metric": { "type": "native" },
  "tasks": [
    {
      "task": "certify", "condition": "cond2", "u_radius": 0.9,
      "options": { "n_max": 64, "shells": 4, "per_shell": 16 }
    }
  ]
})";

const char* kRefutedConfig = R"({
  "schema_version": "1.0.0",
  "seed": 3,
  "budget": 64,
  "group": { "kind": "finite_product_of_involutions", "depth": 6 },
  "metric": { "type": "native" },
  "tasks": [
    { "task": "certify", "condition": "cond2", "u_radius": 0.25,
      "options": { "n_max": 64 } }
  ]
})";

// the capped metric never reaches the ball boundary, so no orbit can escape
// and the sampled scan must stay undecided
const char* kInconclusiveConfig = R"({
  "schema_version": "1.0.0",
  "seed": 5,
  "budget": 64,
  "group": { "kind": "integer_lattice", "dim": 1 },
  "metric": { "type": "cap", "cap": 0.25, "base": { "type": "euclidean", "scale": 1.0 } },
  "tasks": [
    { "task": "nss", "u_radius": 0.5,
      "options": { "shells": 4, "per_shell": 8 } }
  ]
})";

const char* kTwoKindConfig = R"({
  "schema_version": "1.0.0",
  "seed": 2,
  "budget": 64,
  "group": { "kind": "integer_lattice", "dim": 1 },
  "metric": { "type": "native" },
  "tasks": [
    { "task": "certify", "condition": "cond2", "u_radius": 1.0,
      "options": { "n_max": 64, "shells": 4, "per_shell": 16 } },
    { "task": "compare", "mode": "qi",
      "other_metric": { "type": "euclidean", "scale": 1.0 }, "probes": 64 }
  ]
})";

struct CoutCapture {
  std::ostringstream buffer;
  std::streambuf* saved;
  CoutCapture() : saved(std::cout.rdbuf(buffer.rdbuf())) {}
  ~CoutCapture() { std::cout.rdbuf(saved); }
  std::string text() const { return buffer.str(); }
};

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::vector<const char*> argv = {"minmet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  CoutCapture capture;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  if (out_text) *out_text = capture.text();
  return code;
}

}  // namespace

// ---------------------- config validation ----------------------

TEST_CASE("config parsing names the failing field") {
  auto parse = [](const json& j) { return ExperimentConfig::parse_text(j.dump()); };
  json base = json::parse(kHoldingConfig);

  CHECK_THROWS_WITH_AS(ExperimentConfig::parse_text("not json"),
                       doctest::Contains("invalid json"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse_text("[1, 2]"),
                       doctest::Contains("top level"), ConfigError);

  json no_seed = base;
  no_seed.erase("seed");
  CHECK_THROWS_WITH_AS(parse(no_seed), doctest::Contains(".seed"), ConfigError);

  json no_budget = base;
  no_budget.erase("budget");
  CHECK_THROWS_WITH_AS(parse(no_budget), doctest::Contains(".budget"), ConfigError);

  json no_group = base;
  no_group.erase("group");
  CHECK_THROWS_WITH_AS(parse(no_group), doctest::Contains(".group"), ConfigError);

  json bad_kind = base;
  bad_kind["group"]["kind"] = "quaternionic";
  CHECK_THROWS_WITH_AS(parse(bad_kind), doctest::Contains("group.kind"), ConfigError);

  json no_metric = base;
  no_metric.erase("metric");
  CHECK_THROWS_WITH_AS(parse(no_metric), doctest::Contains(".metric"), ConfigError);

  json bad_metric = base;
  bad_metric["metric"] = {{"type", "hyperbolic"}};
  CHECK_THROWS_WITH_AS(parse(bad_metric), doctest::Contains("metric"), ConfigError);

  json no_tasks = base;
  no_tasks.erase("tasks");
  CHECK_THROWS_WITH_AS(parse(no_tasks), doctest::Contains("tasks"), ConfigError);

  json unnamed_task = base;
  unnamed_task["tasks"][0].erase("task");
  CHECK_THROWS_WITH_AS(parse(unnamed_task), doctest::Contains("tasks[0].task"), ConfigError);

  json future = base;
  future["schema_version"] = "2.0.0";
  CHECK_THROWS_WITH_AS(parse(future), doctest::Contains("unsupported major"), ConfigError);

  json minor = base;
  minor["schema_version"] = "1.9.9";
  CHECK_NOTHROW(parse(minor));
}

TEST_CASE("unknown task names fail as config errors at run time") {
  json config = json::parse(kHoldingConfig);
  config["tasks"][0]["task"] = "meditate";
  ExperimentConfig parsed = ExperimentConfig::parse_text(config.dump());
  CHECK_THROWS_WITH_AS(run_experiment(parsed), doctest::Contains("tasks[0].task"), ConfigError);
}

// ---------------------- experiment runs ----------------------

TEST_CASE("verdict tallies drive the exit code") {
  SUBCASE("all hold") {
    RunResult r = run_experiment(ExperimentConfig::parse_text(kHoldingConfig));
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("summary").at("holds") == 1);
    CHECK(r.report.at("summary").at("refuted") == 0);
    CHECK(r.report.at("tasks")[0].at("verdict") == "holds_on_budget");
    CHECK(r.report.at("tasks")[0].at("status") == "ok");
  }
  SUBCASE("a refutation wins over everything else") {
    RunResult r = run_experiment(ExperimentConfig::parse_text(kRefutedConfig));
    CHECK(r.exit_code == 1);
    CHECK(r.report.at("summary").at("refuted") == 1);
    CHECK(r.report.at("tasks")[0].contains("witness"));
    const json& w = r.report.at("tasks")[0].at("witness");
    CHECK(w.contains("element"));
    CHECK(w.contains("power_trace"));
  }
  SUBCASE("an undecided scan exits 2") {
    RunResult r = run_experiment(ExperimentConfig::parse_text(kInconclusiveConfig));
    CHECK(r.exit_code == 2);
    CHECK(r.report.at("summary").at("inconclusive") == 1);
  }
}

TEST_CASE("reports echo the config and the effective seed and budget") {
  ExperimentConfig config = ExperimentConfig::parse_text(kHoldingConfig);
  RunResult r = run_experiment(config);
  CHECK(r.report.at("config") == config.raw);
  CHECK(r.report.at("seed") == 7);
  CHECK(r.report.at("budget") == 64);
  CHECK(r.report.at("schema_version") == kSchemaVersion);
  CHECK(r.report.at("artifact_version") == kArtifactVersion);
  CHECK(r.report.at("name") == "cli-test-holding");
  CHECK(r.report.contains("wall_clock_ms"));

  SUBCASE("overrides replace both knobs but never the echoed config") {
    RunOverrides o;
    o.seed = 99;
    o.budget = 32;
    RunResult r2 = run_experiment(config, o);
    CHECK(r2.report.at("seed") == 99);
    CHECK(r2.report.at("budget") == 32);
    CHECK(r2.report.at("config") == config.raw);
  }
}

TEST_CASE("task filters select by subcommand category") {
  ExperimentConfig config = ExperimentConfig::parse_text(kTwoKindConfig);
  RunOverrides compare_only;
  compare_only.task_filter = {"compare"};
  RunResult r = run_experiment(config, compare_only);
  REQUIRE(r.report.at("tasks").size() == 1);
  CHECK(r.report.at("tasks")[0].at("task") == "compare");

  RunOverrides certify_only;
  certify_only.task_filter = {"certify"};
  RunResult r2 = run_experiment(config, certify_only);
  REQUIRE(r2.report.at("tasks").size() == 1);
  CHECK(r2.report.at("tasks")[0].at("task") == "certify");
}

TEST_CASE("runs are byte-deterministic once the wall clock is stripped") {
  ExperimentConfig config = ExperimentConfig::parse_text(kTwoKindConfig);
  RunResult a = run_experiment(config);
  RunResult b = run_experiment(config);
  CHECK(emit_report(strip_wall_clock(a.report)) == emit_report(strip_wall_clock(b.report)));

  RunOverrides parallel;
  parallel.parallel = true;
  RunResult c = run_experiment(config, parallel);
  CHECK(emit_report(strip_wall_clock(a.report)) == emit_report(strip_wall_clock(c.report)));
}

// ---------------------- report serialisation ----------------------

TEST_CASE("machine reports round-trip and reject foreign schema majors") {
  RunResult r = run_experiment(ExperimentConfig::parse_text(kHoldingConfig));
  const std::string text = emit_report(r.report);
  CHECK(text.back() == '\n');
  json parsed = parse_report(text);
  CHECK(parsed == r.report);

  json stripped = strip_wall_clock(r.report);
  CHECK_FALSE(stripped.contains("wall_clock_ms"));

  json foreign = r.report;
  foreign["schema_version"] = "9.0.0";
  CHECK_THROWS_WITH_AS(parse_report(emit_report(foreign)),
                       doctest::Contains("unsupported schema major"), ConfigError);
  CHECK_THROWS_AS(parse_report("{}"), ConfigError);
  CHECK_THROWS_AS(parse_report("no"), ConfigError);
}

TEST_CASE("text rendering summarises verdicts for people") {
  RunResult r = run_experiment(ExperimentConfig::parse_text(kHoldingConfig));
  const std::string text = render_text(r.report);
  CHECK(text.find("summary: 1 hold, 0 refuted, 0 inconclusive") != std::string::npos);
  CHECK(text.find("holds_on_budget") != std::string::npos);
  CHECK(text.find("cond2") != std::string::npos);
}

// ---------------------- element and certificate serialisation ----------------------

TEST_CASE("elements of every payload kind survive the json round trip") {
  SUBCASE("matrix") {
    Group g = Group::unitary(2);
    std::mt19937_64 rng(4);
    Element e = g.exp_tangent(g.random_tangent(rng) * 0.4);
    Element back = element_from_json(g, element_to_json(g, e));
    CHECK((back.matrix() - e.matrix()).norm() == 0.0);
  }
  SUBCASE("residues") {
    Group z = Group::integer_lattice(3);
    Element e{Residues{{5, -2, 7}}};
    CHECK(element_from_json(z, element_to_json(z, e)).residues().v == e.residues().v);
  }
  SUBCASE("word") {
    Group f = Group::free_group(2);
    Element e{Word{{1, -2, 1}}};
    CHECK(element_from_json(f, element_to_json(f, e)).word().letters == e.word().letters);
  }
  SUBCASE("table index") {
    Group g = Group::finite_table(dihedral_table(4));
    Element e{TableIndex{3}};
    CHECK(element_from_json(g, element_to_json(g, e)).table_index() == 3);
  }
  SUBCASE("imports are validated against the group") {
    Group z = Group::integer_lattice(2);
    CHECK_THROWS_AS(element_from_json(z, json::object()), std::invalid_argument);
    CHECK_THROWS(element_from_json(z, json{{"residues", {1, 2, 3}}}));
    Group t = Group::finite_cyclic_tower(2, 3);
    CHECK_THROWS(element_from_json(t, json{{"residues", {11}}}));
  }
}

TEST_CASE("certificates serialise their witness and constants") {
  Group g = Group::finite_product_of_involutions(6);
  Metric d = native_metric(g);
  Certificate cert = check_condition2(g, d, 0.25, {});
  REQUIRE(cert.verdict == Verdict::refuted);
  json j = certificate_to_json(g, cert);
  CHECK(j.at("condition") == "cond2");
  CHECK(j.at("verdict") == "refuted");
  CHECK(j.at("constants").contains("u_radius"));
  CHECK(j.at("exhaustive") == true);
  REQUIRE(j.contains("witness"));
  CHECK(j.at("witness").at("power_trace").is_array());
  // the embedded element replays into a valid group member
  CHECK_NOTHROW(element_from_json(g, j.at("witness").at("element")));
}

// ---------------------- the command line itself ----------------------

TEST_CASE("subcommands run configs and propagate verdict exit codes") {
  const auto holding = temp_file("minmet_cli_holding.json");
  const auto refuted = temp_file("minmet_cli_refuted.json");
  const auto undecided = temp_file("minmet_cli_undecided.json");
  write_file(holding, kHoldingConfig);
  write_file(refuted, kRefutedConfig);
  write_file(undecided, kInconclusiveConfig);

  std::string out;
  CHECK(run_cli({"certify", "--config", holding.string()}, &out) == 0);
  CHECK(out.find("summary: 1 hold") != std::string::npos);

  CHECK(run_cli({"certify", "--config", refuted.string()}, &out) == 1);
  CHECK(run_cli({"certify", "--config", undecided.string()}, &out) == 2);

  SUBCASE("machine format emits the canonical report on stdout") {
    CHECK(run_cli({"certify", "--config", holding.string(), "--format", "machine"}, &out) == 0);
    json report = parse_report(out);
    CHECK(report.at("summary").at("holds") == 1);
  }
  SUBCASE("seed overrides reach the report") {
    CHECK(run_cli({"certify", "--config", holding.string(), "--format", "machine",
                   "--seed", "123", "--budget", "32"}, &out) == 0);
    json report = parse_report(out);
    CHECK(report.at("seed") == 123);
    CHECK(report.at("budget") == 32);
  }
  SUBCASE("--out writes the machine report and keeps text on stdout") {
    const auto rpt = temp_file("minmet_cli_report_out.json");
    std::filesystem::remove(rpt);
    CHECK(run_cli({"certify", "--config", holding.string(), "--out", rpt.string()}, &out) == 0);
    CHECK(out.find("summary:") != std::string::npos);
    json report = parse_report(read_file(rpt));
    CHECK(report.at("summary").at("holds") == 1);
    std::filesystem::remove(rpt);
  }
  SUBCASE("--parallel changes nothing observable") {
    std::string serial, parallel;
    CHECK(run_cli({"certify", "--config", holding.string(), "--format", "machine"},
                  &serial) == 0);
    CHECK(run_cli({"certify", "--config", holding.string(), "--format", "machine",
                   "--parallel"}, &parallel) == 0);
    CHECK(emit_report(strip_wall_clock(json::parse(serial))) ==
          emit_report(strip_wall_clock(json::parse(parallel))));
  }

  std::filesystem::remove(holding);
  std::filesystem::remove(refuted);
  std::filesystem::remove(undecided);
}

TEST_CASE("the report subcommand revalidates stored runs") {
  const auto cfg = temp_file("minmet_cli_rpt_cfg.json");
  const auto rpt = temp_file("minmet_cli_rpt.json");
  write_file(cfg, kRefutedConfig);
  std::string out;
  REQUIRE(run_cli({"certify", "--config", cfg.string(), "--out", rpt.string()}, &out) == 1);

  // re-reading the stored report reproduces the refutation exit code
  CHECK(run_cli({"report", "--in", rpt.string()}, &out) == 1);
  CHECK(run_cli({"report", "--in", rpt.string(), "--format", "machine"}, &out) == 1);
  CHECK(parse_report(out).at("summary").at("refuted") == 1);

  // a tampered schema version is rejected as a config error
  json tampered = json::parse(read_file(rpt));
  tampered["schema_version"] = "9.0.0";
  write_file(rpt, emit_report(tampered));
  CHECK(run_cli({"report", "--in", rpt.string()}, &out) == 3);

  CHECK(run_cli({"report", "--in", temp_file("minmet_missing_rpt.json").string()}, &out) == 3);
  std::filesystem::remove(cfg);
  std::filesystem::remove(rpt);
}

TEST_CASE("usage errors exit with the config-error code") {
  std::string out;
  CHECK(run_cli({}, &out) == 3);                                       // no subcommand
  CHECK(run_cli({"certify"}, &out) == 3);                              // missing --config
  CHECK(run_cli({"certify", "--config", "/nonexistent.json"}, &out) == 3);
  CHECK(run_cli({"certify", "--config", "x.json", "--format", "yaml"}, &out) == 3);
  CHECK(run_cli({"transmogrify"}, &out) == 3);                         // unknown subcommand

  const auto bad = temp_file("minmet_cli_bad.json");
  write_file(bad, "{\"seed\": 1}");
  CHECK(run_cli({"certify", "--config", bad.string()}, &out) == 3);
  std::filesystem::remove(bad);
}
