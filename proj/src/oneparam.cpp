#include "minmet/oneparam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace minmet {

namespace {

constexpr double kInBallTol = 1e-12;

DistanceFn safe_eval(const Metric& d) {
  const DistanceFn base = d.eval;
  return [base](const Element& a, const Element& b) {
    try {
      return base(a, b);
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
}

std::int64_t mod_inverse_of_two(std::int64_t m) {
  // m odd: 2 * (m+1)/2 = m + 1 = 1 (mod m)
  return (m + 1) / 2;
}

}  // namespace

Element group_sqrt(const Group& ctx, const Metric& d, const Element& f, double v_radius) {
  const DistanceFn dist = safe_eval(d);
  const Element id = ctx.identity();
  auto accept = [&](Element root) {
    const double away = dist(root, id);
    if (!(away <= v_radius + kInBallTol)) {
      std::ostringstream os;
      os << "root lies at distance " << away << " outside the radius-" << v_radius << " ball";
      throw NoRootInBall(os.str());
    }
    return root;
  };

  switch (ctx.kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal:
    case GroupKind::general_linear: {
      Matrix s;
      try {
        s = principal_sqrt(f.matrix());
      } catch (const NonConvergence& e) {
        throw NoRootInBall(std::string("principal square root unavailable: ") + e.what());
      }
      if (ctx.kind != GroupKind::general_linear && unitarity_drift(s) > ctx.unitarity_tol) {
        s = project_unitary(s);
      }
      if (ctx.kind == GroupKind::special_orthogonal) {
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
          for (Eigen::Index j = 0; j < s.cols(); ++j) {
            if (std::abs(std::imag(s(i, j))) < 1e-9) s(i, j) = Complex(std::real(s(i, j)), 0.0);
          }
        }
      }
      Element root{std::move(s)};
      if ((ctx.multiply(root, root).matrix() - f.matrix()).norm() >
          1e-9 * std::max(1.0, f.matrix().norm())) {
        throw NoRootInBall("computed root does not square back to the input");
      }
      return accept(std::move(root));
    }
    case GroupKind::integer_lattice: {
      Residues r = f.residues();
      for (auto& x : r.v) {
        if (x % 2 != 0) throw NoRootInBall("odd coordinate has no lattice square root");
        x /= 2;
      }
      return accept(Element{std::move(r)});
    }
    case GroupKind::heisenberg: {
      const auto& v = f.residues().v;
      if (v[0] % 2 != 0 || v[1] % 2 != 0) {
        throw NoRootInBall("odd base coordinate has no square root");
      }
      const std::int64_t a = v[0] / 2, b = v[1] / 2;
      const std::int64_t rem = v[2] - a * b;
      if (rem % 2 != 0) throw NoRootInBall("central coordinate obstruction");
      return accept(Element{Residues{{a, b, rem / 2}}});
    }
    case GroupKind::finite_cyclic_tower: {
      std::int64_t m = 1;
      for (int i = 0; i < ctx.depth; ++i) m *= ctx.prime;
      const std::int64_t x = f.residues().v[0];
      if (ctx.prime % 2 == 1) {
        const auto y = static_cast<std::int64_t>(
            (static_cast<__int128>(x) * mod_inverse_of_two(m)) % m);
        return accept(Element{Residues{{y}}});
      }
      if (x % 2 != 0) throw NoRootInBall("odd residue has no half in a 2-tower");
      const Element c1{Residues{{x / 2}}};
      const Element c2{Residues{{(x / 2 + m / 2) % m}}};
      const double d1 = dist(c1, id), d2 = dist(c2, id);
      return accept(d2 < d1 ? c2 : c1);
    }
    case GroupKind::finite_product_of_involutions: {
      if (ctx.is_identity(f)) return id;
      throw NoRootInBall("non-identity elements of an involution product have no square root");
    }
    case GroupKind::finite_table: {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int y = 0; y < ctx.table->n; ++y) {
        if (ctx.table->at(y, y) != f.table_index()) continue;
        const double away = dist(Element{TableIndex{y}}, id);
        if (away <= v_radius + kInBallTol && away < best_d) {
          best_d = away;
          best = y;
        }
      }
      if (best < 0) throw NoRootInBall("no square root inside the ball");
      return Element{TableIndex{best}};
    }
    case GroupKind::free_group: {
      const auto& ls = f.word().letters;
      if (ls.empty()) return id;
      if (ls.size() % 2 != 0) throw NoRootInBall("odd-length word is not a square");
      const std::size_t half = ls.size() / 2;
      for (std::size_t i = 0; i < half; ++i) {
        if (ls[i] != ls[half + i]) throw NoRootInBall("word is not a repeated block");
      }
      Word w;
      w.letters.assign(ls.begin(), ls.begin() + static_cast<std::ptrdiff_t>(half));
      return accept(Element{std::move(w)});
    }
  }
  throw std::logic_error("unreachable");
}

RootChain build_root_chain(const Group& ctx, const Metric& d, const Element& f, int k,
                           int depth, double eps, const ChainOptions& opts) {
  if (k < 1) throw std::invalid_argument("build_root_chain: k must be >= 1");
  if (depth < 0) throw std::invalid_argument("build_root_chain: depth must be >= 0");
  if (k * depth > 62) throw std::invalid_argument("build_root_chain: dyadic grid overflows");
  const DistanceFn dist = safe_eval(d);
  const Element id = ctx.identity();

  RootChain chain;
  chain.base = f;
  chain.k = k;
  chain.eps = eps;
  const double d0 = dist(f, id);
  if (d0 > eps + kInBallTol) {
    throw std::invalid_argument("build_root_chain: base element lies outside the declared ball");
  }
  chain.level_distance.push_back(d0);

  Element current = f;
  for (int i = 1; i <= depth; ++i) {
    Element root = current;
    for (int j = 0; j < k; ++j) root = group_sqrt(ctx, d, root, opts.v_radius_cap);

    const Element back = ctx.power(root, std::int64_t(1) << k);
    const double err = dist(back, current);
    if (err > opts.wellformed_tol * std::max(1, i)) {
      std::ostringstream os;
      os << "build_root_chain: level " << i << " fails to power back (error " << err << ")";
      throw std::runtime_error(os.str());
    }

    const double di = dist(root, id);
    const double prev = chain.level_distance.back();
    const double ratio = prev > 0 ? di / prev : 0.0;
    chain.contraction_ratio.push_back(ratio);
    const double allowed = 0.5 * (1.0 + opts.slack_base + prev * prev);
    if (prev > 0 && ratio > allowed) {
      std::ostringstream os;
      os << "root chain stalls at level " << i << ": contraction ratio " << ratio
         << " exceeds " << allowed;
      throw ContractionFailure(i, ratio, os.str());
    }
    chain.level_distance.push_back(di);
    chain.roots.push_back(root);
    current = std::move(root);
  }
  return chain;
}

Element eval_dyadic(const Group& ctx, const RootChain& c, std::int64_t numerator, int level) {
  if (level < 0 || level > c.depth()) {
    throw std::invalid_argument("eval_dyadic: level outside the chain");
  }
  return ctx.power(c.level(level), numerator);
}

Element eval_real(const Group& ctx, const RootChain& c, double alpha) {
  const int exponent = c.k * c.depth();
  if (exponent > 62) throw std::invalid_argument("eval_real: dyadic grid overflows");
  const double grid = std::exp2(exponent);
  const double scaled = alpha * grid;
  if (std::abs(scaled) > 9.0e17) throw std::invalid_argument("eval_real: alpha out of range");
  return ctx.power(c.level(c.depth()), std::llround(scaled));
}

int required_depth(double tol, int k) {
  if (!(tol > 0) || k < 1) throw std::invalid_argument("required_depth: bad arguments");
  return static_cast<int>(std::ceil(std::log2(1.0 / tol) / k));
}

namespace {

struct PairScanState {
  double best_gap = std::numeric_limits<double>::infinity();
  std::optional<std::pair<Element, Element>> best_pair;
  double best_sep = 0;
  std::vector<double> gaps;  // (gap, sep) samples for the modulus
  std::vector<double> seps;

  void offer(const Element& a, const Element& b, double gap, double sep,
             double separation_floor) {
    gaps.push_back(gap);
    seps.push_back(sep);
    if (sep >= separation_floor && gap < best_gap) {
      best_gap = gap;
      best_sep = sep;
      best_pair = {a, b};
    }
  }
};

}  // namespace

SqrtContinuityReport check_sqrt_uniform_continuity(const Group& ctx, const Metric& d,
                                                   double v_radius, int pairs,
                                                   std::uint64_t seed, double square_gap_tol,
                                                   double separation_floor) {
  const DistanceFn dist = safe_eval(d);
  const Element id = ctx.identity();
  SqrtContinuityReport report;
  PairScanState state;

  auto gap_of = [&](const Element& a, const Element& b) {
    return dist(ctx.multiply(a, a), ctx.multiply(b, b));
  };

  if (ctx.finite() && ctx.order() <= 4096) {
    std::vector<Element> ball;
    for (auto& g : ctx.enumerate()) {
      if (dist(g, id) <= v_radius + kInBallTol) ball.push_back(std::move(g));
    }
    for (std::size_t i = 0; i < ball.size(); ++i) {
      for (std::size_t j = i + 1; j < ball.size(); ++j) {
        const double gap = gap_of(ball[i], ball[j]);
        const double sep = dist(ball[i], ball[j]);
        state.offer(ball[i], ball[j], gap, sep, separation_floor);
        ++report.pairs_used;
      }
    }
    report.verdict = Verdict::holds_exhaustively;
  } else {
    BallSample pool = sample_ball(ctx, dist, v_radius, std::max(64, pairs / 8), seed);
    std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ull);
    std::uniform_int_distribution<std::size_t> pick(0, pool.elements.size() - 1);
    for (int it = 0; it < pairs; ++it) {
      const Element& a = pool.elements[pick(rng)];
      const Element& b = pool.elements[pick(rng)];
      const double sep = dist(a, b);
      if (sep <= 0) continue;
      state.offer(a, b, gap_of(a, b), sep, separation_floor);
      ++report.pairs_used;
    }
    // antipodal probe: -g shares its square with g whenever -Id is in the group
    if (ctx.matrix_kind() && (ctx.kind != GroupKind::special_orthogonal || ctx.n % 2 == 0)) {
      for (const Element& a : pool.elements) {
        Element b{Matrix(-a.matrix())};
        const double away = dist(b, id);
        if (away > v_radius + kInBallTol) continue;
        const double sep = dist(a, b);
        if (sep <= 0) continue;
        state.offer(a, b, gap_of(a, b), sep, separation_floor);
        ++report.pairs_used;
      }
    }
    // deterministic local descent on the best near-violation
    if (ctx.matrix_kind() && state.best_pair && state.best_gap > 0 &&
        state.best_gap < 0.25 * v_radius) {
      Element a = state.best_pair->first;
      Element b = state.best_pair->second;
      double gap = state.best_gap;
      std::mt19937_64 drng(seed + 9);
      double step = 0.1;
      for (int it = 0; it < 400 && gap > 1e-15; ++it) {
        const Matrix dir = ctx.random_tangent(drng);
        bool improved = false;
        for (double sgn : {1.0, -1.0}) {
          Element cand = ctx.multiply(b, ctx.exp_tangent(dir * (sgn * step)));
          if (dist(cand, id) > v_radius + kInBallTol) continue;
          const double cand_sep = dist(a, cand);
          if (cand_sep < separation_floor) continue;
          const double cand_gap = gap_of(a, cand);
          if (cand_gap < gap) {
            b = std::move(cand);
            gap = cand_gap;
            improved = true;
            break;
          }
        }
        if (!improved) step *= 0.7;
        if (step < 1e-12) break;
      }
      state.offer(a, b, gap, dist(a, b), separation_floor);
    }
    report.verdict = Verdict::holds_on_budget;
  }

  if (state.best_pair && state.best_gap <= square_gap_tol) {
    report.verdict = Verdict::refuted;
    report.violation = state.best_pair;
    report.violation_square_gap = state.best_gap;
    report.violation_separation = state.best_sep;
  }

  // empirical modulus: delta(target) = smallest square gap among pairs more
  // separated than the target
  for (int s = 0; s < 12; ++s) {
    ModulusEntry entry;
    entry.target_radius = v_radius * std::exp2(-s);
    double delta = std::numeric_limits<double>::infinity();
    double max_gap = 0;
    for (std::size_t i = 0; i < state.gaps.size(); ++i) {
      max_gap = std::max(max_gap, state.gaps[i]);
      if (state.seps[i] > entry.target_radius) delta = std::min(delta, state.gaps[i]);
    }
    entry.input_radius = std::isfinite(delta) ? delta : max_gap;
    report.modulus.push_back(entry);
  }
  return report;
}

UniquenessReport check_uniqueness(const Group& ctx, const Metric& d, const RootChain& a,
                                  const RootChain& b, double u_radius, double tol) {
  const DistanceFn dist = safe_eval(d);
  const Element id = ctx.identity();
  UniquenessReport report;

  const int ea = a.k * a.depth();
  const int eb = b.k * b.depth();
  const int common = std::min(ea, eb);

  auto eval_at = [&](const RootChain& c, int chain_exp, std::int64_t m, int level_exp) {
    // alpha = m / 2^level_exp evaluated on c's finest grid
    const std::int64_t numerator = m << (chain_exp - level_exp);
    return ctx.power(c.level(c.depth()), numerator);
  };

  for (int level = 0; level <= common; ++level) {
    const std::int64_t denom = std::int64_t(1) << level;
    std::vector<std::int64_t> numerators = {1, denom - 1, denom / 2 + 1, 3};
    numerators.push_back(denom);
    for (std::int64_t m : numerators) {
      if (m < 1 || m > denom) continue;
      const Element va = eval_at(a, ea, m, level);
      const Element vb = eval_at(b, eb, m, level);
      const double gap = dist(va, vb);
      if (gap > report.max_gap) report.max_gap = gap;
      if (gap > tol && report.first_divergence_level < 0) {
        report.first_divergence_level = level;
      }
      if (dist(va, id) > u_radius + kInBallTol || dist(vb, id) > u_radius + kInBallTol) {
        report.escaped_ball = true;
      }
    }
  }
  report.agree = report.max_gap <= tol;
  return report;
}

}  // namespace minmet
