#pragma once

#include <map>
#include <optional>

#include "minmet/metric.hpp"

namespace minmet {

enum class Verdict { holds_on_budget, holds_exhaustively, refuted, inconclusive };

std::string verdict_name(Verdict v);
bool verdict_holds(Verdict v);

struct TracePoint {
  std::int64_t exponent = 0;
  double distance = 0;
};

/// Refutation evidence: the element, a replayable power trace, and the
/// violated inequality with its sides.
struct Witness {
  Element element;
  std::vector<TracePoint> power_trace;
  std::string violated;
  std::int64_t n = 0;
  double lhs = 0;
  double rhs = 0;
};

struct Certificate {
  std::string condition;
  Verdict verdict = Verdict::inconclusive;
  std::map<std::string, double> constants;
  std::optional<Witness> witness;
  std::int64_t samples_used = 0;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  std::map<std::string, double> diagnostics;
};

struct ReplayResult {
  bool ok = true;
  double max_deviation = 0;
};

/// Recomputes every trace point through the group operations and compares
/// distances against the stored ones.
ReplayResult replay_witness(const Group& ctx, const Metric& d, const Witness& w,
                            double tol = 1e-10);

}  // namespace minmet
