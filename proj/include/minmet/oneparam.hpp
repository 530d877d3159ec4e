#pragma once

#include "minmet/certificate.hpp"

namespace minmet {

struct NoRootInBall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractionFailure : std::runtime_error {
  int level;
  double ratio;
  ContractionFailure(int level_, double ratio_, const std::string& what_)
      : std::runtime_error(what_), level(level_), ratio(ratio_) {}
};

/// Square root of f within the v_radius ball: principal matrix square root
/// (Denman-Beavers with eigendecomposition fallback) for matrix kinds,
/// coordinate halving on lattices / heisenberg, inverse of 2 mod the order on
/// odd towers, exhaustive in-ball search on table groups. Throws NoRootInBall
/// when no root exists in the ball.
Element group_sqrt(const Group& ctx, const Metric& d, const Element& f, double v_radius);

/// h_0 = f and h_{i+1}^(2^k) = h_i with d(h_{i+1},1) <= 1/2 d(h_i,1) per level.
struct RootChain {
  Element base;
  std::vector<Element> roots;  // h_1 .. h_depth
  int k = 1;
  double eps = 0;  // declared bound on d(f,1)
  std::vector<double> level_distance;     // d(h_i,1), i = 0..depth
  std::vector<double> contraction_ratio;  // level_distance[i+1]/level_distance[i]

  int depth() const { return static_cast<int>(roots.size()); }
  const Element& level(int i) const { return i == 0 ? base : roots[static_cast<std::size_t>(i) - 1]; }
};

struct ChainOptions {
  // Contraction guard: ratio <= 1/2 (1 + slack_base + d(h_i,1)^2). The
  // quadratic term absorbs the curvature excess of chord metrics on compact
  // matrix groups; genuinely non-contracting inputs still fail.
  double slack_base = 1e-6;
  double wellformed_tol = 1e-11;  // per-level bound on d(h_i^(2^ki), f)
  double v_radius_cap = 1.9;      // roots must stay strictly inside
};

RootChain build_root_chain(const Group& ctx, const Metric& d, const Element& f, int k,
                           int depth, double eps, const ChainOptions& opts = {});

/// h^(m / 2^(k*level)) = roots[level]^m; well-defined across representations.
Element eval_dyadic(const Group& ctx, const RootChain& c, std::int64_t numerator, int level);

/// Evaluation at the best dyadic approximant of alpha at maximal depth.
Element eval_real(const Group& ctx, const RootChain& c, double alpha);

/// Minimal chain depth supporting parameter accuracy tol at the given k.
int required_depth(double tol, int k);

struct ModulusEntry {
  double target_radius = 0;  // output: d(g^-1 f, 1) bound achieved
  double input_radius = 0;   // required d(g^-2 f^2, 1) bound
};

struct SqrtContinuityReport {
  Verdict verdict = Verdict::inconclusive;
  std::vector<ModulusEntry> modulus;
  std::optional<std::pair<Element, Element>> violation;  // near-equal squares, separated roots
  double violation_square_gap = 0;
  double violation_separation = 0;
  std::int64_t pairs_used = 0;
};

/// Uniform-continuity modulus of the square root on the v_radius ball, plus
/// the injectivity scan: refuted when separated elements have (numerically)
/// equal squares. Random pairs are followed by a deterministic local descent
/// on the best near-violation for matrix kinds, and by exhaustive pair scans
/// on finite groups.
SqrtContinuityReport check_sqrt_uniform_continuity(const Group& ctx, const Metric& d,
                                                   double v_radius, int pairs,
                                                   std::uint64_t seed,
                                                   double square_gap_tol = 1e-9,
                                                   double separation_floor = 1e-6);

struct UniquenessReport {
  bool agree = true;
  int first_divergence_level = -1;
  double max_gap = 0;
  bool escaped_ball = false;  // some evaluation left the u_radius ball
};

/// Compares two chains over their common dyadic grid.
UniquenessReport check_uniqueness(const Group& ctx, const Metric& d, const RootChain& a,
                                  const RootChain& b, double u_radius, double tol = 1e-9);

}  // namespace minmet
