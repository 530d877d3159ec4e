#pragma once

#include "minmet/certificate.hpp"

namespace minmet {

struct CertifyOptions {
  std::int64_t n_max = 1 << 10;       // power cap for the linear conditions
  int dyadic_depth = 16;              // dyadic power cap
  int shells = 12;                    // dyadic radius shells for sampling
  int per_shell = 256;
  std::uint64_t seed = 1;
  double bound_factor = 1.0;          // asserted bound is bound_factor / n
  double slack = 0;                   // absolute slack added to asserted bounds
  std::int64_t exhaustive_cap = 1 << 16;
};

/// Largest n with g, g^2, ..., g^n all inside the open ball of u_radius;
/// asserts d(g,1) <= bound_factor/n.
Certificate check_condition2(const Group& ctx, const Metric& d, double u_radius,
                             const CertifyOptions& opts = {});

/// Weak Gleason property: d(g,1) <= eps/n implies n d(g,1) <= K d(g^n,1).
Certificate check_condition3(const Group& ctx, const Metric& d, double eps, double K,
                             const CertifyOptions& opts = {});

/// Dyadic variant: g, g^2, g^4, ..., g^(2^n) inside the ball implies
/// 2^n d(g,1) <= K d(g^(2^n),1).
Certificate check_condition4(const Group& ctx, const Metric& d, double u_radius, double K,
                             const CertifyOptions& opts = {});

struct FitOptions {
  double u_hi = 1.0;
  double u_lo = 0;          // 0 = automatic: instance resolution floor
  double k_cap = 1 << 20;   // refuted beyond this
  int refine_steps = 20;
  CertifyOptions check;
};

/// Bisection over U_radius / eps, doubling then bisection refinement over K;
/// returns the least-K certificate within bounds, or the best refutation.
/// condition is one of "cond2", "cond3", "cond4".
Certificate fit_constants(const Group& ctx, const Metric& d, const std::string& condition,
                          const FitOptions& opts = {});

/// For each dyadic V below U, finds n(V) with: powers up to n(V) inside U force
/// membership in V. Refutes with an element outside V whose first n_max powers
/// stay in U. n(V) values land in diagnostics under "n_at_shell_<s>".
Certificate check_uniform_nss(const Group& ctx, const Metric& d, double u_radius,
                              const CertifyOptions& opts = {});

/// No nontrivial subgroup inside the ball: exhaustive cyclic-subgroup scan on
/// finite groups, power-orbit escape on sampled elements otherwise.
Certificate check_nss(const Group& ctx, const Metric& d, double u_radius,
                      const CertifyOptions& opts = {});

/// Empirical Lipschitz constant of right multiplication by elements of the
/// v_radius ball; constant recorded as "K_hat".
Certificate check_right_lipschitz(const Group& ctx, const Metric& d, double v_radius,
                                  const CertifyOptions& opts = {});

/// Local SIN modulus: for targets V it finds U with g^-1 f in B(U) implying
/// f g^-1 in B(V) near the identity; modulus entries land in diagnostics.
Certificate check_local_sin(const Group& ctx, const Metric& d, double o_radius,
                            const CertifyOptions& opts = {});

/// Derived growth corollary of a ball certificate at radius 1/p: samples with
/// all powers up to n inside the 1/(2 p^2) ball satisfy n d(g,1) <= 4p d(g^n,1).
Certificate check_growth_from_small_ball(const Group& ctx, const Metric& d, int p,
                                         const CertifyOptions& opts = {});

}  // namespace minmet
