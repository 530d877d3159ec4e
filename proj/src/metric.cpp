#include "minmet/metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace minmet {

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::native_norm: return "native_norm";
    case Provenance::birkhoff: return "birkhoff";
    case Provenance::kakutani: return "kakutani";
    case Provenance::word: return "word";
    case Provenance::path_refined: return "path_refined";
    case Provenance::bi_invariantised: return "bi_invariantised";
    case Provenance::transformed_sqrt: return "transformed_sqrt";
    case Provenance::transformed_capped: return "transformed_capped";
    case Provenance::custom: return "custom";
  }
  return "?";
}

Metric native_metric(const Group& ctx) {
  Metric m;
  m.provenance = Provenance::native_norm;
  switch (ctx.kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal:
      // bi-invariant: ||g - h|| = ||h^-1 g - Id|| in operator norm
      m.eval = [](const Element& a, const Element& b) {
        return operator_norm(a.matrix() - b.matrix());
      };
      m.bounded = true;
      m.name = "operator_norm";
      return m;
    case GroupKind::general_linear:
      throw NoCanonicalMetric(
          "general_linear has no canonical invariant metric here: the operator-norm "
          "gauge fails the triangle inequality under translation");
    case GroupKind::heisenberg:
      throw NoCanonicalMetric(
          "heisenberg has no canonical norm metric here: use a word or path metric "
          "over a generating set");
    case GroupKind::free_group:
      m.eval = [ctx](const Element& a, const Element& b) {
        return static_cast<double>(
            ctx.multiply(ctx.inverse(b), a).word().letters.size());
      };
      m.name = "word_length";
      m.provenance = Provenance::word;
      return m;
    case GroupKind::integer_lattice:
      m.eval = [](const Element& a, const Element& b) {
        std::int64_t s = 0;
        for (std::size_t i = 0; i < a.residues().v.size(); ++i) {
          s += std::abs(a.residues().v[i] - b.residues().v[i]);
        }
        return static_cast<double>(s);
      };
      m.name = "l1";
      return m;
    case GroupKind::finite_table:
      m.eval = [](const Element& a, const Element& b) {
        return a.table_index() == b.table_index() ? 0.0 : 1.0;
      };
      m.bounded = true;
      m.name = "discrete";
      return m;
    case GroupKind::finite_cyclic_tower:
    case GroupKind::finite_product_of_involutions:
      m.eval = [ctx](const Element& a, const Element& b) {
        const int level = ctx.filtration_level(ctx.multiply(ctx.inverse(b), a));
        return level >= ctx.depth ? 0.0 : std::exp2(-level);
      };
      m.bounded = true;
      m.name = "subgroup_ultrametric";
      return m;
  }
  throw std::logic_error("unreachable");
}

Metric euclidean_metric(const Group& ctx, double scale) {
  if (ctx.kind != GroupKind::integer_lattice) {
    throw std::invalid_argument("euclidean_metric: requires an integer_lattice context");
  }
  if (!(scale > 0)) throw std::invalid_argument("euclidean_metric: scale must be positive");
  Metric m;
  m.eval = [scale](const Element& a, const Element& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.residues().v.size(); ++i) {
      const double diff = static_cast<double>(a.residues().v[i] - b.residues().v[i]);
      s += diff * diff;
    }
    return scale * std::sqrt(s);
  };
  m.provenance = Provenance::native_norm;
  m.name = "scaled_euclidean";
  m.constants["scale"] = scale;
  return m;
}

Metric from_length_table(const Group& ctx, std::vector<double> lengths) {
  if (ctx.kind != GroupKind::finite_table) {
    throw std::invalid_argument("from_length_table: requires a finite_table context");
  }
  const auto table = ctx.table;
  const int n = table->n;
  if (static_cast<int>(lengths.size()) != n) {
    throw std::invalid_argument("from_length_table: length table size mismatch");
  }
  for (int g = 0; g < n; ++g) {
    if (g == table->identity) {
      if (lengths[g] != 0) throw std::invalid_argument("from_length_table: l(identity) must be 0");
      continue;
    }
    if (!(lengths[g] > 0)) {
      throw std::invalid_argument("from_length_table: lengths must be positive off the identity");
    }
    if (std::abs(lengths[g] - lengths[table->inv[g]]) > 1e-12) {
      throw std::invalid_argument("from_length_table: length is not symmetric under inversion");
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (lengths[table->at(a, b)] > lengths[a] + lengths[b] + 1e-12) {
        throw std::invalid_argument("from_length_table: length is not subadditive");
      }
    }
  }
  auto shared = std::make_shared<const std::vector<double>>(std::move(lengths));
  Metric m;
  m.eval = [table, shared](const Element& a, const Element& b) {
    return (*shared)[table->at(table->inv[b.table_index()], a.table_index())];
  };
  m.bounded = true;
  m.name = "length_table";
  return m;
}

Metric transform_sqrt(const Metric& d) {
  Metric m;
  const DistanceFn base = d.eval;
  m.eval = [base](const Element& a, const Element& b) { return std::sqrt(base(a, b)); };
  m.provenance = Provenance::transformed_sqrt;
  m.bounded = d.bounded;
  m.upper_bound_only = d.upper_bound_only;
  m.name = d.name + "_sqrt";
  return m;
}

Metric transform_cap(const Metric& d, double cap) {
  if (!(cap > 0)) throw std::invalid_argument("transform_cap: cap must be positive");
  Metric m;
  const DistanceFn base = d.eval;
  m.eval = [base, cap](const Element& a, const Element& b) { return std::min(base(a, b), cap); };
  m.provenance = Provenance::transformed_capped;
  m.bounded = true;
  m.upper_bound_only = d.upper_bound_only;
  m.constants["cap"] = cap;
  m.name = d.name + "_cap";
  return m;
}

Metric restrict_metric(const Metric& d, const Group& parent, const Group& sub) {
  bool compatible = false;
  if (parent.matrix_kind() && sub.matrix_kind()) {
    compatible = parent.n == sub.n;
  } else if (parent.kind == sub.kind) {
    compatible = parent.rank == sub.rank && parent.dim == sub.dim &&
                 parent.prime == sub.prime && parent.depth == sub.depth;
  }
  if (!compatible) {
    throw std::invalid_argument("restrict_metric: subgroup payloads do not embed in the parent");
  }
  Metric m = d;
  m.name = d.name + "_restricted";
  return m;
}

MetricValidation validate_metric(const Group& ctx, const Metric& d, int budget,
                                 std::uint64_t seed) {
  MetricValidation out;
  std::mt19937_64 rng(seed);
  const Element id = ctx.identity();
  auto fail = [&](const std::string& why) {
    if (out.ok) {
      out.ok = false;
      out.failure = why;
    }
  };

  double d11 = 0;
  try {
    d11 = d(id, id);
  } catch (const std::domain_error&) {
    fail("identity outside the metric domain");
    return out;
  }
  if (!(std::abs(d11) <= 1e-15)) fail("d(1,1) != 0");

  const int pool_size = std::max(8, std::min(budget, 512));
  auto pool = sample_elements(ctx, pool_size, rng());
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);

  for (int it = 0; it < budget; ++it) {
    const Element& g = pool[pick(rng)];
    const Element& h = pool[pick(rng)];
    const Element& f = pool[pick(rng)];
    double dgh, dhg, dgf, dhf, dfg_fh;
    try {
      dgh = d(g, h);
      dhg = d(h, g);
      dgf = d(g, f);
      dhf = d(h, f);
      dfg_fh = d(ctx.multiply(f, g), ctx.multiply(f, h));
    } catch (const std::domain_error&) {
      continue;  // truncated table metric: skip pairs outside the working window
    }
    if (std::isnan(dgh) || dgh < 0) {
      fail("negative or NaN distance");
      continue;
    }
    if (dgh == 0 && !ctx.equal(g, h, 1e-9)) fail("distinct elements at distance 0");
    const double scale = std::max(1.0, std::max(dgh, std::max(dgf, dhf)));
    out.worst_symmetry = std::max(out.worst_symmetry, std::abs(dgh - dhg) / scale);
    out.worst_triangle = std::max(out.worst_triangle, (dgf - (dgh + dhf)) / scale);
    out.worst_left_invariance =
        std::max(out.worst_left_invariance, std::abs(dfg_fh - dgh) / scale);
  }
  if (out.worst_symmetry > 1e-9) fail("symmetry violated beyond tolerance");
  if (out.worst_triangle > 1e-9) fail("triangle inequality violated beyond tolerance");
  if (out.worst_left_invariance > 1e-9) fail("left-invariance violated beyond tolerance");

  // compatibility probe: distances over the smallest-gauge samples in the pool
  std::vector<std::pair<double, std::size_t>> gauge;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double b = ctx.base_distance(pool[i]);
    if (b > 0) gauge.emplace_back(b, i);
  }
  std::sort(gauge.begin(), gauge.end());
  for (std::size_t i = 0; i < std::min<std::size_t>(gauge.size(), 8); ++i) {
    try {
      out.residual_at_floor = std::max(out.residual_at_floor, d(pool[gauge[i].second], id));
    } catch (const std::domain_error&) {
    }
  }
  return out;
}

BallSample sample_ball(const Group& ctx, const Metric& d, double radius, int count,
                       std::uint64_t seed) {
  return sample_ball(ctx, d.eval, radius, count, seed);
}

}  // namespace minmet
