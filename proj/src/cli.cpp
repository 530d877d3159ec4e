#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "minmet/report.hpp"

namespace minmet {

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> budget;
  std::string format = "text";
  std::string out_path;
  bool parallel = false;
};

void add_common_options(CLI::App* sub, CommonArgs& args, bool needs_config) {
  auto* config = sub->add_option("--config", args.config_path, "experiment config (json)");
  if (needs_config) config->required();
  sub->add_option("--seed", [&args](const CLI::results_t& r) {
    args.seed = std::stoull(r.at(0));
    return true;
  }, "override the experiment seed")->expected(1);
  sub->add_option("--budget", [&args](const CLI::results_t& r) {
    args.budget = std::stoll(r.at(0));
    return true;
  }, "override per-stage sample budgets")->expected(1);
  sub->add_option("--format", args.format, "stdout format when --out is absent: machine or text")
      ->check(CLI::IsMember({"machine", "text"}));
  sub->add_option("--out", args.out_path, "write the machine report to this path");
  sub->add_flag("--parallel", args.parallel, "run independent tasks concurrently");
}

// --out receives the machine report and stdout keeps the text summary; without
// --out, --format selects which of the two goes to stdout.
int write_output(const CommonArgs& args, const nlohmann::json& report) {
  if (args.out_path.empty()) {
    std::cout << (args.format == "machine" ? emit_report(report) : render_text(report));
    return 0;
  }
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << args.out_path << "'\n";
    return 3;
  }
  out << emit_report(report);
  std::cout << render_text(report);
  return 0;
}

int run_subcommand(const CommonArgs& args, const std::string& category) {
  ExperimentConfig config = ExperimentConfig::parse_file(args.config_path);
  RunOverrides overrides;
  overrides.seed = args.seed;
  overrides.budget = args.budget;
  overrides.parallel = args.parallel;
  if (!category.empty()) overrides.task_filter = {category};
  RunResult result = run_experiment(config, overrides);
  const int io = write_output(args, result.report);
  return io != 0 ? io : result.exit_code;
}

int run_report(const CommonArgs& args, const std::string& in_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw ConfigError("report: cannot open '" + in_path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const nlohmann::json report = parse_report(buffer.str());
  const int io = write_output(args, report);
  if (io != 0) return io;
  int refuted = 0, inconclusive = 0;
  if (report.contains("summary")) {
    refuted = report.at("summary").value("refuted", 0);
    inconclusive = report.at("summary").value("inconclusive", 0);
  }
  return refuted > 0 ? 1 : (inconclusive > 0 ? 2 : 0);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"minimal-metric experiments: certify, construct, evaluate, compare"};
  app.require_subcommand(1);

  CommonArgs certify_args, construct_args, oneparam_args, compare_args, report_args;
  std::string report_in;

  auto* certify = app.add_subcommand("certify", "run the certification tasks of a config");
  add_common_options(certify, certify_args, true);
  auto* construct = app.add_subcommand("construct", "build and validate the configured metric");
  add_common_options(construct, construct_args, true);
  auto* oneparam = app.add_subcommand("oneparam", "build root chains and evaluate flows");
  add_common_options(oneparam, oneparam_args, true);
  auto* compare = app.add_subcommand("compare", "fit comparison constants between metrics");
  add_common_options(compare, compare_args, true);
  auto* report = app.add_subcommand("report", "validate and re-render an existing report");
  add_common_options(report, report_args, false);
  report->add_option("--in", report_in, "existing report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (certify->parsed()) return run_subcommand(certify_args, "certify");
    if (construct->parsed()) return run_subcommand(construct_args, "construct");
    if (oneparam->parsed()) return run_subcommand(oneparam_args, "oneparam");
    if (compare->parsed()) return run_subcommand(compare_args, "compare");
    if (report->parsed()) return run_report(report_args, report_in);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}

}  // namespace minmet
