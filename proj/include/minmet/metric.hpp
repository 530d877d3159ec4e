#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "minmet/group.hpp"

namespace minmet {

enum class Provenance {
  native_norm,
  birkhoff,
  kakutani,
  word,
  path_refined,
  bi_invariantised,
  transformed_sqrt,
  transformed_capped,
  custom,
};

std::string provenance_name(Provenance p);

/// Left-invariant metric handle. eval is total on valid payloads unless the
/// backing construction is table-based, in which case arguments outside the
/// working truncation throw std::domain_error.
struct Metric {
  DistanceFn eval;
  Provenance provenance = Provenance::custom;
  bool bounded = false;
  bool upper_bound_only = false;          // truncated chain search flag
  std::map<std::string, double> constants;  // measured constants from constructions
  std::string name;

  double operator()(const Element& a, const Element& b) const { return eval(a, b); }
};

struct NoCanonicalMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Canonical metric of the kind: operator-norm distance ||h^-1 g - Id|| for
/// unitary / special_orthogonal, word length for free_group, l1 word metric for
/// integer_lattice, 0/1 discrete for finite_table, and the subgroup-chain
/// ultrametric 2^-level for the tower / involutions kinds. general_linear and
/// heisenberg have no canonical metric (throws NoCanonicalMetric).
Metric native_metric(const Group& ctx);

/// scale * ||g - h||_2 on integer_lattice (the scaled model of R^d).
Metric euclidean_metric(const Group& ctx, double scale);

/// Left-invariant metric on a table group from a length function
/// (validated: l(1)=0, l(g)=l(g^-1)>0, l(gh) <= l(g)+l(h)).
Metric from_length_table(const Group& ctx, std::vector<double> lengths);

Metric transform_sqrt(const Metric& d);
Metric transform_cap(const Metric& d, double cap);

/// Same evaluation restricted to a subgroup context; validates that sub's
/// payload embeds in the parent's payload type.
Metric restrict_metric(const Metric& d, const Group& parent, const Group& sub);

struct MetricValidation {
  bool ok = true;
  std::string failure;
  double worst_symmetry = 0;
  double worst_triangle = 0;
  double worst_left_invariance = 0;
  double residual_at_floor = 0;  // max d over the smallest sampled base-ball
};

/// Sampled check of the metric-handle invariants: symmetry, identity of
/// indiscernibles, triangle inequality, left-invariance, and compatibility via
/// the convergence predicate (d -> 0 along shrinking base-distance samples).
MetricValidation validate_metric(const Group& ctx, const Metric& d, int budget,
                                 std::uint64_t seed);

/// sample_ball overload taking a metric handle.
BallSample sample_ball(const Group& ctx, const Metric& d, double radius, int count,
                       std::uint64_t seed);

}  // namespace minmet
