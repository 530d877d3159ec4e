#pragma once

#include "minmet/certificate.hpp"
#include "minmet/finite.hpp"

namespace minmet {

/// Symmetric generating set: explicit elements (closed under inverse at
/// construction) or a metric-ball descriptor.
struct GeneratingSet {
  std::vector<Element> elements;
  std::optional<double> ball_radius;

  static GeneratingSet explicit_set(const Group& ctx, std::vector<Element> gens);
  static GeneratingSet ball(double radius);
};

struct WordDistance {
  std::optional<std::int64_t> value;  // nullopt: unreachable within the truncation
  bool truncated = false;             // search hit the node/depth cap
};

/// rho_V(g, f) = least k with g = f v_1 ... v_k, by BFS over right
/// multiplication. Discrete contexts only.
WordDistance word_metric(const Group& ctx, const GeneratingSet& V, const Element& g,
                         const Element& f, std::int64_t node_cap = 1 << 20,
                         std::int64_t depth_cap = 1 << 20);

/// Exact word lengths from the identity over a finite universe.
std::vector<std::int64_t> word_metric_table(const FiniteUniverse& u,
                                            const std::vector<int>& generator_indices);

/// Exact path metric over a finite universe: weighted shortest path with edge
/// weights d(v, 1). Returned handle is left-invariant and throws
/// std::domain_error outside the universe.
Metric path_metric_finite(const FiniteUniverse& u, const Metric& d,
                          const std::vector<int>& generator_indices);

/// Sampled-graph upper bound of the path metric on continuous groups over a
/// ball generating set: Dijkstra on identity + sampled nodes (+ endpoints).
/// Flagged upper_bound_only.
Metric path_metric_sampled(const Group& ctx, const Metric& d, double ball_radius,
                           int nodes, std::uint64_t seed);

struct QIReport {
  double K = 1;
  double C = 0;
  double max_violation = 0;
  std::int64_t sample_budget = 0;
  Verdict verdict = Verdict::inconclusive;
  std::vector<double> witness_scales;  // ratio ladder on refutation
};

/// Least-envelope fit of (K, C) with (1/K) d1 - C <= d2 <= K d1 + C over the
/// probes; refuted when ratios grow without bound across the sampled scales.
QIReport fit_quasi_isometry(const Group& ctx, const Metric& d1, const Metric& d2,
                            const std::vector<Element>& probes);

/// Probe builder: whole universe when finite, scale ladder + sampled shells
/// otherwise.
std::vector<Element> comparison_probes(const Group& ctx, int budget, std::uint64_t seed);

struct BiLipschitzReport {
  double L = 1;
  double K_local = 0;       // Lipschitz constant of id on the generating ball
  double M = 0, N = 0;      // quasi-isometry envelope, d <= M partial + N
  double inf_outside = 0;   // inf partial(y,1) outside the ball
  bool direct_equal = false;  // metrics coincide on probes: L = 1 directly
  double worst_ratio = 1;   // max(d/partial, partial/d) over probes
  bool verified = false;    // d <= L partial and partial <= L d on probes
};

/// L = max{K, M + N / inf(partial(y,1): y outside V)} in both directions, with
/// the direct-verification branch when the metrics already agree.
BiLipschitzReport bilipschitz_constant(const Group& ctx, const Metric& d,
                                       const Metric& partial, double v_radius,
                                       const std::vector<Element>& probes);

}  // namespace minmet
