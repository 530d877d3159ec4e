#pragma once

#include "minmet/filtration.hpp"
#include "minmet/metric.hpp"

namespace minmet {

/// Chain-infimum metric over the filtration gauge delta(g,f) = inf(2^n :
/// f^-1 g in V_{3^n}). Exact exhaustive shortest path over the universe (the
/// whole group when ctx is finite and universe is null). Verifies the
/// filtration first and attaches the measured sandwich delta <= 2d <= 2 delta
/// as constants {"sandwich_min", "sandwich_max"} (ratios d/delta). On a
/// truncation the handle is flagged upper_bound_only.
Metric birkhoff_metric(const Group& ctx, const Filtration& f,
                       const FiniteUniverse* universe = nullptr);

/// Chain-infimum metric over the one-sided gauge with weights 2^-n. Attaches
/// measured sandwich constants {"c", "C"}: {d < c 2^-n} subset of V_n subset of
/// {d <= C 2^-n}, asserting C/c <= 4.
Metric kakutani_metric(const Group& ctx, const Filtration& f,
                       const FiniteUniverse* universe = nullptr);

/// Bi-invariantisation of min(d, cap): sup over right translates. Exact on
/// finite groups, sampled lower bound otherwise (constants record the budget).
Metric bi_invariantize(const Group& ctx, const Metric& d, double cap, int budget = 4096,
                       std::uint64_t seed = 1);

}  // namespace minmet
