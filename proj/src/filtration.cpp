#include "minmet/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace minmet {

double Filtration::gauge(const Group& ctx, const Element& g) const {
  if (ctx.is_identity(g)) return 0.0;
  for (const auto& level : levels) {
    if (level.member(g)) return level.weight;
  }
  return std::numeric_limits<double>::infinity();
}

Filtration interval_filtration_z(int base, int n_min, int n_max) {
  if (base < 2 || n_min > n_max) throw std::invalid_argument("interval_filtration_z: bad parameters");
  Filtration f;
  f.law = FiltrationLaw::birkhoff_cubes;
  for (int n = n_min; n <= n_max; ++n) {
    FiltrationLevel level;
    level.weight = std::exp2(n);
    const double bound = std::pow(double(base), n);
    level.member = [bound](const Element& g) {
      return std::abs(static_cast<double>(g.residues().v[0])) < bound;
    };
    std::ostringstream os;
    os << "(-" << base << "^" << n << ", " << base << "^" << n << ")";
    level.label = os.str();
    f.levels.push_back(std::move(level));
  }
  return f;
}

Filtration subgroup_filtration(const Group& ctx) {
  if (ctx.kind != GroupKind::finite_cyclic_tower &&
      ctx.kind != GroupKind::finite_product_of_involutions) {
    throw std::invalid_argument("subgroup_filtration: kind has no canonical subgroup chain");
  }
  Filtration f;
  f.law = FiltrationLaw::kakutani_squares;
  const bool list_elements = ctx.order() <= (1 << 16);
  std::vector<Element> all;
  if (list_elements) all = ctx.enumerate();
  for (int level_idx = ctx.depth; level_idx >= 0; --level_idx) {
    FiltrationLevel level;
    level.weight = std::exp2(-level_idx);
    level.member = [ctx, level_idx](const Element& g) {
      return ctx.filtration_level(g) >= level_idx;
    };
    level.label = "V_" + std::to_string(level_idx);
    if (list_elements) {
      std::vector<Element> elems;
      for (const auto& g : all) {
        if (ctx.filtration_level(g) >= level_idx) elems.push_back(g);
      }
      level.elements = std::move(elems);
    }
    f.levels.push_back(std::move(level));
  }
  return f;
}

namespace {

bool payload_equal(const Element& a, const Element& b) {
  if (a.payload.index() != b.payload.index()) return false;
  if (a.is_matrix()) return (a.matrix() - b.matrix()).norm() <= 1e-12;
  if (std::holds_alternative<Word>(a.payload)) return a.word() == b.word();
  if (std::holds_alternative<Residues>(a.payload)) return a.residues() == b.residues();
  return a.table_index() == b.table_index();
}

}  // namespace

Filtration explicit_filtration(FiltrationLaw law,
                               std::vector<std::pair<double, std::vector<Element>>> levels) {
  Filtration f;
  f.law = law;
  std::sort(levels.begin(), levels.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [weight, elems] : levels) {
    if (!(weight > 0)) throw FiltrationError("explicit_filtration: weights must be positive");
    if (!f.levels.empty() && weight <= f.levels.back().weight) {
      throw FiltrationError("explicit_filtration: duplicate level weight");
    }
    if (elems.empty()) throw FiltrationError("explicit_filtration: empty level");
    FiltrationLevel level;
    level.weight = weight;
    auto shared = std::make_shared<const std::vector<Element>>(std::move(elems));
    level.member = [shared](const Element& g) {
      for (const auto& e : *shared) {
        if (payload_equal(e, g)) return true;
      }
      return false;
    };
    level.elements = *shared;
    std::ostringstream os;
    os << "weight " << weight;
    level.label = os.str();
    f.levels.push_back(std::move(level));
  }
  return f;
}

namespace {

struct LevelSet {
  std::vector<char> in;     // membership bitmask over universe indices
  std::vector<int> members;
};

FiltrationCheck fail_at(const FiltrationLevel& level, int idx, const std::string& why) {
  FiltrationCheck c;
  c.ok = false;
  std::ostringstream os;
  os << "level " << idx << " (" << level.label << "): " << why;
  c.failure = os.str();
  return c;
}

FiltrationCheck verify_exhaustive(const Group& ctx, const Filtration& f,
                                  const FiniteUniverse& u, int budget, std::uint64_t seed) {
  (void)ctx;
  const int n = u.size();
  const int num_levels = static_cast<int>(f.levels.size());
  std::vector<LevelSet> sets(num_levels);
  for (int li = 0; li < num_levels; ++li) {
    sets[li].in.assign(n, 0);
    for (int i = 0; i < n; ++i) {
      if (f.levels[li].member(u.elements[i])) {
        sets[li].in[i] = 1;
        sets[li].members.push_back(i);
      }
    }
    if (!sets[li].in[u.identity_index]) {
      return fail_at(f.levels[li], li, "identity missing");
    }
    for (int i : sets[li].members) {
      const int j = u.inv(i);
      if (j < 0 || !sets[li].in[j]) return fail_at(f.levels[li], li, "not symmetric under inverse");
    }
  }
  for (int li = 0; li + 1 < num_levels; ++li) {
    for (int i : sets[li].members) {
      if (!sets[li + 1].in[i]) return fail_at(f.levels[li], li, "not nested in the next level");
    }
  }
  const int arity = f.law == FiltrationLaw::birkhoff_cubes ? 3 : 2;
  const std::int64_t pair_cap = std::max<std::int64_t>(budget, std::int64_t(1) << 20);
  std::mt19937_64 rng(seed);
  for (int li = 0; li + 1 < num_levels; ++li) {
    const auto& v = sets[li].members;
    const auto& next = sets[li + 1].in;
    const std::int64_t sz = static_cast<std::int64_t>(v.size());
    if (sz == 0) continue;
    if (sz * sz <= pair_cap) {
      // exact product-set propagation: P_1 = V, P_{k+1} = P_k * V
      std::vector<char> cur(n, 0);
      std::vector<int> cur_members = v;
      for (int i : v) cur[i] = 1;
      for (int step = 1; step < arity; ++step) {
        std::vector<char> nxt(n, 0);
        std::vector<int> nxt_members;
        for (int a : cur_members) {
          for (int b : v) {
            const auto p = u.mul(a, b);
            if (!p) continue;  // product leaves a truncated universe: cannot test it here
            if (!nxt[*p]) {
              nxt[*p] = 1;
              nxt_members.push_back(*p);
            }
          }
        }
        cur = std::move(nxt);
        cur_members = std::move(nxt_members);
      }
      for (int p : cur_members) {
        if (!next[p]) {
          return fail_at(f.levels[li], li,
                         arity == 3 ? "triple product escapes the next level"
                                    : "square escapes the next level");
        }
      }
    } else {
      std::uniform_int_distribution<std::int64_t> pick(0, sz - 1);
      for (int it = 0; it < budget; ++it) {
        int acc = v[pick(rng)];
        bool inside = true;
        for (int step = 1; step < arity && inside; ++step) {
          const auto p = u.mul(acc, v[pick(rng)]);
          if (!p) {
            inside = false;  // unknown, skip
            break;
          }
          acc = *p;
        }
        if (inside && !next[acc]) {
          return fail_at(f.levels[li], li,
                         arity == 3 ? "triple product escapes the next level"
                                    : "square escapes the next level");
        }
      }
    }
  }
  return {};
}

}  // namespace

FiltrationCheck verify_filtration(const Group& ctx, const Filtration& f,
                                  const FiniteUniverse* universe, int budget,
                                  std::uint64_t seed) {
  if (f.levels.empty()) {
    FiltrationCheck c;
    c.ok = false;
    c.failure = "no levels";
    return c;
  }
  for (std::size_t i = 0; i + 1 < f.levels.size(); ++i) {
    if (!(f.levels[i].weight < f.levels[i + 1].weight)) {
      return fail_at(f.levels[i], static_cast<int>(i), "weights not strictly increasing");
    }
  }
  if (universe) return verify_exhaustive(ctx, f, *universe, budget, seed);

  const int num_levels = static_cast<int>(f.levels.size());
  const int arity = f.law == FiltrationLaw::birkhoff_cubes ? 3 : 2;
  std::mt19937_64 rng(seed);
  const Element id = ctx.identity();

  // Per-level samples: explicit lists when available, otherwise direct draws
  // for one-dimensional integer levels (exponential search for the boundary).
  std::vector<std::vector<Element>> samples(num_levels);
  std::vector<std::int64_t> bound(num_levels, -1);
  for (int li = 0; li < num_levels; ++li) {
    const auto& level = f.levels[li];
    if (!level.member(id)) return fail_at(level, li, "identity missing");
    if (level.elements) {
      samples[li] = *level.elements;
      if (static_cast<int>(samples[li].size()) > budget) {
        std::shuffle(samples[li].begin(), samples[li].end(), rng);
        samples[li].resize(budget);
      }
      continue;
    }
    if (ctx.kind == GroupKind::integer_lattice && ctx.dim == 1) {
      // largest member magnitude by exponential search
      std::int64_t lo = 0, hi = 1;
      auto inside = [&](std::int64_t x) { return level.member(Element{Residues{{x}}}); };
      while (hi < (std::int64_t(1) << 40) && inside(hi)) {
        lo = hi;
        hi *= 2;
      }
      while (lo + 1 < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (inside(mid) ? lo : hi) = mid;
      }
      bound[li] = lo;
      std::uniform_int_distribution<std::int64_t> pick(-lo, lo);
      samples[li].push_back(id);
      for (int it = 0; it < budget; ++it) {
        const Element g{Residues{{pick(rng)}}};
        if (level.member(g)) samples[li].push_back(g);
      }
      continue;
    }
    return fail_at(level, li, "no way to sample this level without a universe");
  }

  for (int li = 0; li < num_levels; ++li) {
    const auto& level = f.levels[li];
    for (const auto& g : samples[li]) {
      if (!level.member(g)) return fail_at(level, li, "declared sample not a member");
      if (!level.member(ctx.inverse(g))) return fail_at(level, li, "not symmetric under inverse");
      if (li + 1 < num_levels && !f.levels[li + 1].member(g)) {
        return fail_at(level, li, "not nested in the next level");
      }
    }
  }

  for (int li = 0; li + 1 < num_levels; ++li) {
    const auto& next = f.levels[li + 1];
    const auto& v = samples[li];
    if (v.empty()) continue;
    // extreme-point products for one-dimensional interval levels catch
    // violations exactly: arity * bound must stay inside the next level
    if (bound[li] >= 0) {
      const Element extreme{Residues{{bound[li] * arity}}};
      if (bound[li] > 0 && !next.member(extreme)) {
        return fail_at(f.levels[li], li,
                       arity == 3 ? "triple product escapes the next level"
                                  : "square escapes the next level");
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    for (int it = 0; it < budget; ++it) {
      Element acc = v[pick(rng)];
      for (int step = 1; step < arity; ++step) acc = ctx.multiply(acc, v[pick(rng)]);
      if (!next.member(acc)) {
        return fail_at(f.levels[li], li,
                       arity == 3 ? "triple product escapes the next level"
                                  : "square escapes the next level");
      }
    }
  }
  return {};
}

}  // namespace minmet
