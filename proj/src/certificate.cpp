#include "minmet/certificate.hpp"

#include <cmath>
#include <limits>

namespace minmet {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds_on_budget: return "holds_on_budget";
    case Verdict::holds_exhaustively: return "holds_exhaustively";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

bool verdict_holds(Verdict v) {
  return v == Verdict::holds_on_budget || v == Verdict::holds_exhaustively;
}

ReplayResult replay_witness(const Group& ctx, const Metric& d, const Witness& w, double tol) {
  ReplayResult out;
  const Element id = ctx.identity();
  for (const auto& point : w.power_trace) {
    double dist;
    try {
      dist = d(ctx.power(w.element, point.exponent), id);
    } catch (const std::domain_error&) {
      out.ok = false;
      out.max_deviation = std::numeric_limits<double>::infinity();
      return out;
    }
    out.max_deviation = std::max(out.max_deviation, std::abs(dist - point.distance));
  }
  if (out.max_deviation > tol) out.ok = false;
  return out;
}

}  // namespace minmet
