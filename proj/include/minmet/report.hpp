#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "minmet/certificate.hpp"

namespace minmet {

inline constexpr const char* kSchemaVersion = "1.0.0";
inline constexpr const char* kArtifactVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed experiment description. parse validates shape and names the failing
/// field (or filtration level) in the thrown ConfigError.
struct ExperimentConfig {
  nlohmann::json raw;

  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> budget;
  bool parallel = false;
  // Subcommand filter: run only tasks of these kinds (empty = all).
  std::vector<std::string> task_filter;
};

struct RunResult {
  nlohmann::json report;
  int exit_code = 0;  // 0 holds/constructed, 1 any refuted, 2 any inconclusive
};

RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides = {});

/// Canonical machine serialisation: sorted keys, newline-terminated.
/// Byte-identical across runs with equal config + seed, except wall_clock_ms.
std::string emit_report(const nlohmann::json& report);

/// Parses and validates a machine report; rejects unknown schema majors.
nlohmann::json parse_report(const std::string& text);

/// Report stripped of the wall-clock field (the determinism comparison form).
nlohmann::json strip_wall_clock(nlohmann::json report);

std::string render_text(const nlohmann::json& report);

/// Full CLI: subcommands certify / construct / oneparam / compare / report.
/// Returns the process exit code (3 on config errors).
int cli_main(int argc, const char* const* argv);

// json conversion helpers shared by the runner and tests
nlohmann::json certificate_to_json(const Group& ctx, const Certificate& cert);
nlohmann::json element_to_json(const Group& ctx, const Element& g);
Element element_from_json(const Group& ctx, const nlohmann::json& j);

}  // namespace minmet
