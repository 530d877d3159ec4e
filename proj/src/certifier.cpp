#include "minmet/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace minmet {

namespace {

constexpr double kRelTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Distance wrapper mapping truncation domain errors to +infinity, so that
/// anything outside a working window counts as escaping every ball.
DistanceFn make_safe(const Metric& d) {
  const DistanceFn base = d.eval;
  return [base](const Element& a, const Element& b) {
    try {
      return base(a, b);
    } catch (const std::domain_error&) {
      return kInf;
    }
  };
}

/// Precomputed power-distance data for one sample. All condition scans over
/// candidate radii / constants are pure arithmetic over these arrays.
struct PowerProfile {
  Element g;
  double d1 = 0;
  std::vector<double> dist;    // dist[n] = d(g^n, 1), n = 0..stored cap
  std::vector<double> prefix;  // running max of dist[1..n]
  std::vector<double> dydist;  // d(g^(2^j), 1), j = 0..dyadic_depth
  std::int64_t order = 0;      // exact cycle length when found (discrete kinds)

  double dist_at(std::int64_t n) const {
    if (n <= 0) return 0;
    if (order > 0) {
      const std::int64_t r = n % order;
      return r == 0 ? 0.0 : dist[static_cast<std::size_t>(r)];
    }
    return dist[static_cast<std::size_t>(n)];
  }

  /// First n in [1, limit] with d(g^n,1) >= threshold; 0 when none.
  std::int64_t escape_step(double threshold, std::int64_t limit) const {
    const std::int64_t cap = std::min<std::int64_t>(limit, order > 0 ? order : limit);
    for (std::int64_t n = 1; n <= cap; ++n) {
      if (dist_at(n) >= threshold) return n;
    }
    return 0;
  }
};

struct ProfileSet {
  std::vector<PowerProfile> profiles;
  bool exhaustive = false;   // every group element is present
  std::int64_t budget_cap = 0;  // linear power horizon actually stored
};

ProfileSet build_profiles(const Group& ctx, const DistanceFn& d, double scale,
                          const CertifyOptions& opts) {
  if (!(scale > 0)) throw std::invalid_argument("certify: radius scale must be positive");
  ProfileSet out;
  out.budget_cap = opts.n_max;
  const Element id = ctx.identity();

  std::vector<Element> samples;
  if (ctx.finite() && ctx.order() <= opts.exhaustive_cap &&
      ctx.order() * opts.n_max <= (std::int64_t(1) << 23)) {
    for (auto& g : ctx.enumerate(opts.exhaustive_cap)) {
      if (!ctx.is_identity(g)) samples.push_back(std::move(g));
    }
    out.exhaustive = true;
  } else {
    for (int s = 0; s < opts.shells; ++s) {
      const double radius = scale * std::exp2(-s);
      BallSample bs = sample_ball(ctx, d, radius, opts.per_shell,
                                  opts.seed + std::uint64_t(s) * 0x9E3779B9ull);
      for (auto& g : bs.elements) {
        if (!ctx.is_identity(g)) samples.push_back(std::move(g));
      }
    }
  }

  const bool discrete = !ctx.matrix_kind();
  out.profiles.reserve(samples.size());
  for (auto& g : samples) {
    PowerProfile p;
    p.g = std::move(g);
    p.dist.assign(1, 0.0);
    p.prefix.assign(1, 0.0);
    Element h = p.g;
    for (std::int64_t n = 1; n <= opts.n_max; ++n) {
      if (n > 1) h = ctx.multiply(h, p.g);
      if (discrete && ctx.is_identity(h)) {
        p.order = n;
        p.dist.push_back(0.0);
        p.prefix.push_back(p.prefix.back());
        break;
      }
      const double dn = d(h, ctx.identity());
      p.dist.push_back(dn);
      p.prefix.push_back(std::max(p.prefix.back(), dn));
    }
    p.d1 = p.dist.size() > 1 ? p.dist[1] : 0.0;
    // dyadic checkpoints by fresh squaring (exact and cheap)
    Element q = p.g;
    p.dydist.push_back(p.d1);
    for (int j = 1; j <= opts.dyadic_depth; ++j) {
      q = ctx.multiply(q, q);
      p.dydist.push_back(d(q, id));
    }
    out.profiles.push_back(std::move(p));
  }
  return out;
}

double resolution_floor(const ProfileSet& ps, double fallback) {
  double floor_val = kInf;
  for (const auto& p : ps.profiles) {
    if (p.d1 > 0) floor_val = std::min(floor_val, p.d1);
  }
  return std::isfinite(floor_val) ? floor_val : fallback;
}

Witness make_witness(const Group& ctx, const PowerProfile& p, std::int64_t critical_n,
                     std::string violated, double lhs, double rhs) {
  Witness w;
  w.element = p.g;
  w.violated = std::move(violated);
  w.n = critical_n;
  w.lhs = lhs;
  w.rhs = rhs;
  const std::int64_t limit =
      std::max<std::int64_t>(critical_n, p.order > 0 ? std::min<std::int64_t>(p.order, 64) : 1);
  auto push = [&](std::int64_t n) {
    if (n < 1) return;
    double dn;
    if (p.order > 0 || n < static_cast<std::int64_t>(p.dist.size())) {
      dn = p.dist_at(n);
    } else {
      dn = kInf;  // beyond the stored horizon (witnesses never need this)
    }
    if (!std::isfinite(dn)) return;
    for (const auto& t : w.power_trace) {
      if (t.exponent == n) return;
    }
    w.power_trace.push_back({n, dn});
  };
  for (std::int64_t n = 1; n <= std::min<std::int64_t>(limit, 64); ++n) push(n);
  for (std::int64_t n = 128; n <= limit; n *= 2) push(n);
  push(critical_n);
  (void)ctx;
  return w;
}

struct Violation {
  bool found = false;
  const PowerProfile* profile = nullptr;
  std::int64_t n = 0;
  double lhs = 0;
  double rhs = 0;
  double excess = -kInf;

  void offer(const PowerProfile& p, std::int64_t at, double l, double r) {
    const double ex = std::isfinite(r) ? l - r : (std::isfinite(l) ? l : 0.0);
    if (!found || ex > excess) {
      found = true;
      profile = &p;
      n = at;
      lhs = l;
      rhs = r;
      excess = ex;
    }
  }
};

/// Largest n with g, g^2, ..., g^n all strictly inside the u ball, capped at
/// the stored horizon. Returns {n, infinite_premise}.
std::pair<std::int64_t, bool> premise_horizon(const PowerProfile& p, double u,
                                              std::int64_t n_cap) {
  if (p.order > 0) {
    const double period_max = p.prefix.back();
    if (period_max < u) return {p.order, true};  // the whole cyclic subgroup stays inside
    const std::int64_t esc = p.escape_step(u, p.order);
    return {esc - 1, false};
  }
  const std::int64_t stored = static_cast<std::int64_t>(p.dist.size()) - 1;
  const std::int64_t cap = std::min(n_cap, stored);
  // prefix is monotone: binary search the first escape
  std::int64_t lo = 0, hi = cap + 1;
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (p.prefix[static_cast<std::size_t>(mid)] < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, false};
}

struct Cond2Scan {
  Violation worst;
  double max_n_times_d = 0;
  std::int64_t qualifying = 0;
  bool budget_capped = false;
};

Cond2Scan scan_cond2(const ProfileSet& ps, double u, double bound_factor, double slack) {
  Cond2Scan out;
  for (const auto& p : ps.profiles) {
    if (p.d1 <= 0) continue;
    auto [n, infinite] = premise_horizon(p, u, ps.budget_cap);
    if (infinite) {
      // every power stays inside: the bound forces d(g,1) = 0
      ++out.qualifying;
      out.max_n_times_d = kInf;
      if (p.d1 > slack) out.worst.offer(p, 0, p.d1, 0.0);
      continue;
    }
    if (n < 1) continue;
    ++out.qualifying;
    if (p.order == 0 && n >= std::min<std::int64_t>(ps.budget_cap,
                                                    static_cast<std::int64_t>(p.dist.size()) - 1)) {
      out.budget_capped = true;
    }
    out.max_n_times_d = std::max(out.max_n_times_d, static_cast<double>(n) * p.d1);
    const double allowed = bound_factor / static_cast<double>(n) * (1 + kRelTol) + slack;
    if (p.d1 > allowed) {
      out.worst.offer(p, n, p.d1, bound_factor / static_cast<double>(n));
    }
  }
  return out;
}

struct Cond3Scan {
  Violation worst_for_K = {};         // against a concrete K
  double required_K = 0;              // least K that would pass (inf when impossible)
  const PowerProfile* req_profile = nullptr;
  std::int64_t req_n = 0;
  bool premise_truncated = false;
};

Cond3Scan scan_cond3(const ProfileSet& ps, double eps, double K, double slack) {
  Cond3Scan out;
  for (const auto& p : ps.profiles) {
    if (p.d1 <= 0) continue;
    std::int64_t cap = static_cast<std::int64_t>(std::floor(eps / p.d1 + 1e-12));
    cap = std::min(cap, std::int64_t(1) << 20);
    const std::int64_t stored = static_cast<std::int64_t>(p.dist.size()) - 1;
    if (p.order == 0 && cap > stored) {
      cap = stored;
      out.premise_truncated = true;
    }
    for (std::int64_t n = 1; n <= cap; ++n) {
      const double lhs = static_cast<double>(n) * p.d1;
      const double dn = p.dist_at(n);
      const double ratio = dn > 0 ? lhs / dn : (lhs > 0 ? kInf : 0.0);
      if (ratio > out.required_K) {
        out.required_K = ratio;
        out.req_profile = &p;
        out.req_n = n;
      }
      if (K >= 0 && lhs > K * dn * (1 + kRelTol) + slack) {
        out.worst_for_K.offer(p, n, lhs, K * dn);
      }
    }
  }
  return out;
}

struct Cond4Scan {
  Violation worst_for_K = {};
  double required_K = 0;
  const PowerProfile* req_profile = nullptr;
  std::int64_t req_n = 0;
  std::int64_t qualifying = 0;
};

Cond4Scan scan_cond4(const ProfileSet& ps, double u, double K, double slack, int dyadic_depth) {
  Cond4Scan out;
  for (const auto& p : ps.profiles) {
    if (p.d1 <= 0) continue;
    bool counted = false;
    double dyadic_max = 0;
    for (int j = 0; j <= dyadic_depth && j < static_cast<int>(p.dydist.size()); ++j) {
      dyadic_max = std::max(dyadic_max, p.dydist[static_cast<std::size_t>(j)]);
      if (dyadic_max >= u) break;  // premise fails from here on
      if (j == 0) continue;        // the assertion starts at the first square
      if (!counted) {
        counted = true;
        ++out.qualifying;
      }
      const double lhs = std::exp2(j) * p.d1;
      const double dn = p.dydist[static_cast<std::size_t>(j)];
      const double ratio = dn > 0 ? lhs / dn : (lhs > 0 ? kInf : 0.0);
      if (ratio > out.required_K) {
        out.required_K = ratio;
        out.req_profile = &p;
        out.req_n = std::int64_t(1) << j;
      }
      if (K >= 0 && lhs > K * dn * (1 + kRelTol) + slack) {
        out.worst_for_K.offer(p, std::int64_t(1) << j, lhs, K * dn);
      }
    }
  }
  return out;
}

Certificate base_certificate(const std::string& condition, const ProfileSet& ps,
                             const CertifyOptions& opts) {
  Certificate cert;
  cert.condition = condition;
  cert.samples_used = static_cast<std::int64_t>(ps.profiles.size());
  cert.seed = opts.seed;
  cert.exhaustive = ps.exhaustive;
  return cert;
}

}  // namespace

Certificate check_condition2(const Group& ctx, const Metric& d, double u_radius,
                             const CertifyOptions& opts) {
  const DistanceFn safe = make_safe(d);
  ProfileSet ps = build_profiles(ctx, safe, u_radius, opts);
  Cond2Scan scan = scan_cond2(ps, u_radius, opts.bound_factor, opts.slack);

  Certificate cert = base_certificate("cond2", ps, opts);
  cert.constants["u_radius"] = u_radius;
  cert.constants["bound_factor"] = opts.bound_factor;
  cert.diagnostics["max_n_times_d"] = scan.max_n_times_d;
  cert.diagnostics["qualifying_samples"] = static_cast<double>(scan.qualifying);
  if (scan.worst.found) {
    cert.verdict = Verdict::refuted;
    std::ostringstream os;
    if (scan.worst.n == 0) {
      os << "every power remains inside the ball while d(g,1) > 0";
    } else {
      os << "d(g,1) <= " << opts.bound_factor << "/n for n = " << scan.worst.n;
    }
    cert.witness = make_witness(ctx, *scan.worst.profile, scan.worst.n, os.str(),
                                scan.worst.lhs, scan.worst.rhs);
  } else {
    cert.verdict = (ps.exhaustive && !scan.budget_capped) ? Verdict::holds_exhaustively
                                                          : Verdict::holds_on_budget;
  }
  return cert;
}

Certificate check_condition3(const Group& ctx, const Metric& d, double eps, double K,
                             const CertifyOptions& opts) {
  const DistanceFn safe = make_safe(d);
  ProfileSet ps = build_profiles(ctx, safe, eps, opts);
  Cond3Scan scan = scan_cond3(ps, eps, K, opts.slack);

  Certificate cert = base_certificate("cond3", ps, opts);
  cert.constants["eps"] = eps;
  cert.constants["K"] = K;
  cert.diagnostics["required_K"] = scan.required_K;
  if (scan.premise_truncated) cert.diagnostics["premise_truncated"] = 1.0;
  if (scan.worst_for_K.found) {
    cert.verdict = Verdict::refuted;
    std::ostringstream os;
    os << "n d(g,1) <= " << K << " d(g^n,1) for n = " << scan.worst_for_K.n;
    cert.witness = make_witness(ctx, *scan.worst_for_K.profile, scan.worst_for_K.n, os.str(),
                                scan.worst_for_K.lhs, scan.worst_for_K.rhs);
  } else {
    cert.verdict = (ps.exhaustive && !scan.premise_truncated) ? Verdict::holds_exhaustively
                                                              : Verdict::holds_on_budget;
  }
  return cert;
}

Certificate check_condition4(const Group& ctx, const Metric& d, double u_radius, double K,
                             const CertifyOptions& opts) {
  const DistanceFn safe = make_safe(d);
  ProfileSet ps = build_profiles(ctx, safe, u_radius, opts);
  Cond4Scan scan = scan_cond4(ps, u_radius, K, opts.slack, opts.dyadic_depth);

  Certificate cert = base_certificate("cond4", ps, opts);
  cert.constants["u_radius"] = u_radius;
  cert.constants["K"] = K;
  cert.diagnostics["required_K"] = scan.required_K;
  cert.diagnostics["qualifying_samples"] = static_cast<double>(scan.qualifying);
  if (scan.worst_for_K.found) {
    cert.verdict = Verdict::refuted;
    std::ostringstream os;
    os << "2^n d(g,1) <= " << K << " d(g^(2^n),1) for 2^n = " << scan.worst_for_K.n;
    cert.witness = make_witness(ctx, *scan.worst_for_K.profile, scan.worst_for_K.n, os.str(),
                                scan.worst_for_K.lhs, scan.worst_for_K.rhs);
  } else {
    cert.verdict = ps.exhaustive ? Verdict::holds_exhaustively : Verdict::holds_on_budget;
  }
  return cert;
}

Certificate fit_constants(const Group& ctx, const Metric& d, const std::string& condition,
                          const FitOptions& opts) {
  if (condition != "cond2" && condition != "cond3" && condition != "cond4") {
    throw std::invalid_argument("fit_constants: unknown condition " + condition);
  }
  const DistanceFn safe = make_safe(d);
  ProfileSet ps = build_profiles(ctx, safe, opts.u_hi, opts.check);
  const double floor_val =
      opts.u_lo > 0 ? opts.u_lo : std::min(resolution_floor(ps, opts.u_hi * 1e-9), opts.u_hi);

  auto passes = [&](double radius) {
    if (condition == "cond2") {
      return !scan_cond2(ps, radius, opts.check.bound_factor, opts.check.slack).worst.found;
    }
    if (condition == "cond3") {
      return scan_cond3(ps, radius, -1, opts.check.slack).required_K <= opts.k_cap;
    }
    return scan_cond4(ps, radius, -1, opts.check.slack, opts.check.dyadic_depth).required_K <=
           opts.k_cap;
  };

  double fitted;
  bool refuted_at_floor = false;
  if (passes(opts.u_hi)) {
    fitted = opts.u_hi;
  } else if (!passes(floor_val)) {
    fitted = floor_val;
    refuted_at_floor = true;
  } else {
    double lo = floor_val, hi = opts.u_hi;
    for (int i = 0; i < opts.refine_steps; ++i) {
      const double mid = 0.5 * (lo + hi);
      (passes(mid) ? lo : hi) = mid;
    }
    fitted = lo;
  }

  Certificate cert;
  if (condition == "cond2") {
    Cond2Scan scan = scan_cond2(ps, fitted, opts.check.bound_factor, opts.check.slack);
    cert = base_certificate("cond2", ps, opts.check);
    cert.constants["u_radius"] = fitted;
    cert.constants["bound_factor"] = opts.check.bound_factor;
    cert.diagnostics["max_n_times_d"] = scan.max_n_times_d;
    cert.diagnostics["qualifying_samples"] = static_cast<double>(scan.qualifying);
    if (scan.worst.found) {
      cert.verdict = Verdict::refuted;
      cert.witness = make_witness(ctx, *scan.worst.profile, scan.worst.n,
                                  "fitted ball admits no valid radius", scan.worst.lhs,
                                  scan.worst.rhs);
    } else {
      cert.verdict = (ps.exhaustive && !scan.budget_capped) ? Verdict::holds_exhaustively
                                                            : Verdict::holds_on_budget;
    }
  } else if (condition == "cond3") {
    Cond3Scan scan = scan_cond3(ps, fitted, -1, opts.check.slack);
    const double fitted_K = std::min(scan.required_K, opts.k_cap);
    cert = base_certificate("cond3", ps, opts.check);
    cert.constants["eps"] = fitted;
    cert.constants["K"] = fitted_K;
    cert.diagnostics["required_K"] = scan.required_K;
    if (scan.premise_truncated) cert.diagnostics["premise_truncated"] = 1.0;
    if (refuted_at_floor || scan.required_K > opts.k_cap) {
      cert.verdict = Verdict::refuted;
      if (scan.req_profile) {
        cert.witness = make_witness(ctx, *scan.req_profile, scan.req_n,
                                    "no finite K within the cap", scan.req_n * scan.req_profile->d1,
                                    0.0);
      }
    } else {
      cert.verdict = (ps.exhaustive && !scan.premise_truncated) ? Verdict::holds_exhaustively
                                                                : Verdict::holds_on_budget;
    }
  } else {
    Cond4Scan scan = scan_cond4(ps, fitted, -1, opts.check.slack, opts.check.dyadic_depth);
    const double fitted_K = std::min(scan.required_K, opts.k_cap);
    cert = base_certificate("cond4", ps, opts.check);
    cert.constants["u_radius"] = fitted;
    cert.constants["K"] = fitted_K;
    cert.diagnostics["required_K"] = scan.required_K;
    cert.diagnostics["qualifying_samples"] = static_cast<double>(scan.qualifying);
    if (refuted_at_floor || scan.required_K > opts.k_cap) {
      cert.verdict = Verdict::refuted;
      if (scan.req_profile) {
        cert.witness = make_witness(ctx, *scan.req_profile, scan.req_n,
                                    "no finite K within the cap", 0.0, 0.0);
      }
    } else {
      cert.verdict = ps.exhaustive ? Verdict::holds_exhaustively : Verdict::holds_on_budget;
    }
  }
  cert.diagnostics["fitted_value"] = fitted;
  cert.diagnostics["fit_floor"] = floor_val;
  return cert;
}

Certificate check_uniform_nss(const Group& ctx, const Metric& d, double u_radius,
                              const CertifyOptions& opts) {
  const DistanceFn safe = make_safe(d);
  ProfileSet ps = build_profiles(ctx, safe, u_radius, opts);
  Certificate cert = base_certificate("uniform_nss", ps, opts);
  cert.constants["u_radius"] = u_radius;

  bool budget_capped = false;
  for (int s = 1; s <= opts.shells; ++s) {
    const double v = u_radius * std::exp2(-s);
    std::int64_t n_needed = 0;
    for (const auto& p : ps.profiles) {
      if (p.d1 < v || p.d1 <= 0) continue;  // already inside V (or the identity)
      const std::int64_t limit = p.order > 0
                                     ? p.order
                                     : static_cast<std::int64_t>(p.dist.size()) - 1;
      const std::int64_t esc = p.escape_step(u_radius, limit);
      if (esc == 0) {
        if (p.order > 0) {
          // exact: the whole orbit stays inside U while g sits outside V
          cert.verdict = Verdict::refuted;
          cert.witness = make_witness(ctx, p, limit,
                                      "powers inside the ball force membership in V", p.d1, v);
          return cert;
        }
        cert.verdict = Verdict::refuted;
        cert.witness = make_witness(
            ctx, p, limit, "first n_max powers stay inside the ball while g is outside V", p.d1,
            v);
        return cert;
      }
      if (p.order == 0 && esc >= static_cast<std::int64_t>(p.dist.size()) - 1) {
        budget_capped = true;
      }
      n_needed = std::max(n_needed, esc);
    }
    cert.diagnostics["n_at_shell_" + std::to_string(s)] = static_cast<double>(n_needed);
  }
  cert.verdict =
      (ps.exhaustive && !budget_capped) ? Verdict::holds_exhaustively : Verdict::holds_on_budget;
  return cert;
}

Certificate check_nss(const Group& ctx, const Metric& d, double u_radius,
                      const CertifyOptions& opts) {
  const DistanceFn safe = make_safe(d);
  Certificate cert;
  cert.condition = "nss";
  cert.seed = opts.seed;
  cert.constants["u_radius"] = u_radius;
  const Element id = ctx.identity();

  if (ctx.finite() && ctx.order() <= opts.exhaustive_cap) {
    cert.exhaustive = true;
    for (const auto& g : ctx.enumerate(opts.exhaustive_cap)) {
      if (ctx.is_identity(g)) continue;
      ++cert.samples_used;
      Element h = g;
      double orbit_max = 0;
      std::int64_t ord = 0;
      for (std::int64_t n = 1; n <= ctx.order(); ++n) {
        if (ctx.is_identity(h)) {
          ord = n;
          break;
        }
        orbit_max = std::max(orbit_max, safe(h, id));
        h = ctx.multiply(h, g);
      }
      if (ord == 0) ord = ctx.order();
      if (orbit_max < u_radius) {
        cert.verdict = Verdict::refuted;
        Witness w;
        w.element = g;
        w.violated = "the cyclic subgroup of g lies inside the ball";
        w.n = ord;
        w.lhs = orbit_max;
        w.rhs = u_radius;
        Element q = g;
        for (std::int64_t n = 1; n <= std::min<std::int64_t>(ord, 64); ++n) {
          w.power_trace.push_back({n, safe(q, id)});
          q = ctx.multiply(q, g);
        }
        cert.witness = w;
        return cert;
      }
    }
    cert.verdict = Verdict::holds_exhaustively;
    return cert;
  }

  std::int64_t escaped = 0, stuck = 0;
  for (int s = 0; s < opts.shells; ++s) {
    const double radius = u_radius * std::exp2(-s);
    BallSample bs = sample_ball(ctx, safe, radius, std::min(opts.per_shell, 64),
                                opts.seed + std::uint64_t(s) * 0x9E3779B9ull);
    for (const auto& g : bs.elements) {
      if (ctx.is_identity(g)) continue;
      ++cert.samples_used;
      bool did_escape = false;
      Element h = g;
      for (std::int64_t n = 1; n <= 256 && !did_escape; ++n) {
        if (n > 1) h = ctx.multiply(h, g);
        did_escape = safe(h, id) >= u_radius;
      }
      if (!did_escape) {
        Element q = ctx.power(g, 256);
        for (int j = 0; j < 14 && !did_escape; ++j) {
          q = ctx.multiply(q, q);
          did_escape = safe(q, id) >= u_radius;
        }
      }
      did_escape ? ++escaped : ++stuck;
    }
  }
  cert.diagnostics["escaped"] = static_cast<double>(escaped);
  cert.diagnostics["non_escaped"] = static_cast<double>(stuck);
  cert.verdict = stuck == 0 ? Verdict::holds_on_budget : Verdict::inconclusive;
  return cert;
}

Certificate check_right_lipschitz(const Group& ctx, const Metric& d, double v_radius,
                                  const CertifyOptions& opts) {
  const DistanceFn safe = make_safe(d);
  Certificate cert;
  cert.condition = "right_lipschitz";
  cert.seed = opts.seed;
  cert.constants["v_radius"] = v_radius;

  auto pool = sample_elements(ctx, 96, opts.seed ^ 0x5DEECE66Dull);
  BallSample translates =
      sample_ball(ctx, safe, v_radius, std::min(opts.per_shell, 128), opts.seed + 17);
  std::mt19937_64 rng(opts.seed + 101);
  std::uniform_int_distribution<std::size_t> pa(0, pool.size() - 1);
  std::uniform_int_distribution<std::size_t> pt(0, translates.elements.size() - 1);

  double k_hat = 1.0;
  const int probes = opts.shells * opts.per_shell;
  for (int it = 0; it < probes; ++it) {
    const Element& a = pool[pa(rng)];
    const Element& b = pool[pa(rng)];
    const Element& t = translates.elements[pt(rng)];
    double base, moved;
    base = safe(a, b);
    if (!(base > 1e-12) || !std::isfinite(base)) continue;
    moved = safe(ctx.multiply(a, t), ctx.multiply(b, t));
    if (!std::isfinite(moved)) continue;
    k_hat = std::max(k_hat, moved / base);
    ++cert.samples_used;
  }
  cert.constants["K_hat"] = k_hat;
  cert.verdict = Verdict::holds_on_budget;
  return cert;
}

Certificate check_local_sin(const Group& ctx, const Metric& d, double o_radius,
                            const CertifyOptions& opts) {
  const DistanceFn safe = make_safe(d);
  Certificate cert;
  cert.condition = "local_sin";
  cert.seed = opts.seed;
  cert.constants["o_radius"] = o_radius;
  const Element id = ctx.identity();

  BallSample outers = sample_ball(ctx, safe, o_radius, 64, opts.seed + 3);
  std::vector<double> conj_max(opts.shells, 0.0);
  std::vector<double> shell_radius(opts.shells, 0.0);
  for (int t = 0; t < opts.shells; ++t) {
    shell_radius[t] = o_radius * std::exp2(-t);
    BallSample inners = sample_ball(ctx, safe, shell_radius[t], 48,
                                    opts.seed + 1000 + std::uint64_t(t));
    for (const auto& g : outers.elements) {
      const Element ginv = ctx.inverse(g);
      for (const auto& h : inners.elements) {
        const double c = safe(ctx.multiply(ctx.multiply(g, h), ginv), id);
        if (std::isfinite(c)) conj_max[t] = std::max(conj_max[t], c);
        ++cert.samples_used;
      }
    }
    cert.diagnostics["conj_max_shell_" + std::to_string(t)] = conj_max[t];
  }

  bool all_found = true;
  for (int s = 0; s < opts.shells; ++s) {
    const double target = o_radius * std::exp2(-s);
    double found = 0;
    for (int t = 0; t < opts.shells; ++t) {
      if (conj_max[t] <= target) {
        found = shell_radius[t];
        break;  // radii scan from the largest down
      }
    }
    cert.diagnostics["u_for_shell_" + std::to_string(s)] = found;
    if (found == 0) all_found = false;
  }
  cert.verdict = all_found ? Verdict::holds_on_budget : Verdict::inconclusive;
  return cert;
}

Certificate check_growth_from_small_ball(const Group& ctx, const Metric& d, int p,
                                         const CertifyOptions& opts) {
  if (p < 1) throw std::invalid_argument("check_growth_from_small_ball: p must be >= 1");
  const double u = 1.0 / (2.0 * p * p);
  const double bound = 4.0 * p;
  const DistanceFn safe = make_safe(d);
  ProfileSet ps = build_profiles(ctx, safe, u, opts);

  Certificate cert = base_certificate("growth_from_small_ball", ps, opts);
  cert.constants["p"] = p;
  cert.constants["u_radius"] = u;
  cert.constants["bound"] = bound;

  Violation worst;
  bool budget_capped = false;
  double tightest = kInf;
  for (const auto& prof : ps.profiles) {
    if (prof.d1 <= 0) continue;
    auto [n_lim, infinite] = premise_horizon(prof, u, ps.budget_cap);
    std::int64_t cap = infinite ? prof.order : n_lim;
    if (prof.order == 0 &&
        n_lim >= std::min<std::int64_t>(ps.budget_cap,
                                        static_cast<std::int64_t>(prof.dist.size()) - 1)) {
      budget_capped = true;
    }
    for (std::int64_t n = 2; n <= cap; ++n) {
      const double lhs = static_cast<double>(n) * prof.d1;
      const double dn = prof.dist_at(n);
      if (lhs > bound * dn * (1 + kRelTol) + opts.slack) {
        worst.offer(prof, n, lhs, bound * dn);
      } else if (dn > 0) {
        tightest = std::min(tightest, bound * dn - lhs);
      }
    }
  }
  if (std::isfinite(tightest)) cert.diagnostics["tightest_margin"] = tightest;
  if (worst.found) {
    cert.verdict = Verdict::refuted;
    std::ostringstream os;
    os << "n d(g,1) <= " << bound << " d(g^n,1) for n = " << worst.n;
    cert.witness =
        make_witness(ctx, *worst.profile, worst.n, os.str(), worst.lhs, worst.rhs);
  } else {
    cert.verdict = (ps.exhaustive && !budget_capped) ? Verdict::holds_exhaustively
                                                     : Verdict::holds_on_budget;
  }
  return cert;
}

}  // namespace minmet
