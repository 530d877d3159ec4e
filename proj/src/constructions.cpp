#include "minmet/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minmet {

namespace {

struct ChainData {
  std::shared_ptr<const FiniteUniverse> universe;
  std::shared_ptr<const std::vector<double>> dist;
};

ChainData chain_metric_core(const Group& ctx, const Filtration& f,
                            const FiniteUniverse* universe, FiltrationLaw expected_law) {
  if (f.law != expected_law) {
    throw std::invalid_argument("chain metric: filtration law does not match the construction");
  }
  std::shared_ptr<const FiniteUniverse> u;
  if (universe) {
    u = std::make_shared<const FiniteUniverse>(*universe);
  } else if (ctx.finite()) {
    u = std::make_shared<const FiniteUniverse>(FiniteUniverse::enumerate(ctx));
  } else {
    throw std::invalid_argument("chain metric: non-finite context needs an explicit universe");
  }
  const auto check = verify_filtration(ctx, f, u.get(), 2048, 7);
  if (!check.ok) throw FiltrationError("chain metric: " + check.failure);

  std::vector<double> gauge(u->size());
  for (int i = 0; i < u->size(); ++i) gauge[i] = f.gauge(ctx, u->elements[i]);
  auto dist = std::make_shared<const std::vector<double>>(
      chain_infimum_from_identity(*u, gauge));
  return {std::move(u), std::move(dist)};
}

DistanceFn table_eval(ChainData data) {
  return [data](const Element& a, const Element& b) {
    const int idx = data.universe->find(
        data.universe->group.multiply(data.universe->group.inverse(b), a));
    if (idx < 0) {
      throw std::domain_error("chain metric: argument outside the working truncation");
    }
    return (*data.dist)[idx];
  };
}

}  // namespace

Metric birkhoff_metric(const Group& ctx, const Filtration& f, const FiniteUniverse* universe) {
  ChainData data = chain_metric_core(ctx, f, universe, FiltrationLaw::birkhoff_cubes);

  double sandwich_min = std::numeric_limits<double>::infinity();
  double sandwich_max = 0;
  for (int i = 0; i < data.universe->size(); ++i) {
    if (i == data.universe->identity_index) continue;
    const double g = f.gauge(ctx, data.universe->elements[i]);
    const double d = (*data.dist)[i];
    if (!std::isfinite(g) || g == 0) continue;
    sandwich_min = std::min(sandwich_min, d / g);
    sandwich_max = std::max(sandwich_max, d / g);
  }

  Metric m;
  m.eval = table_eval(data);
  m.provenance = Provenance::birkhoff;
  m.bounded = true;
  m.upper_bound_only = !data.universe->whole_group;
  if (std::isfinite(sandwich_min)) {
    m.constants["sandwich_min"] = sandwich_min;
    m.constants["sandwich_max"] = sandwich_max;
  }
  m.name = "birkhoff";
  return m;
}

Metric kakutani_metric(const Group& ctx, const Filtration& f, const FiniteUniverse* universe) {
  ChainData data = chain_metric_core(ctx, f, universe, FiltrationLaw::kakutani_squares);
  const FiniteUniverse& u = *data.universe;
  const std::vector<double>& dist = *data.dist;

  // C: smallest constant with V_n inside the closed ball of radius C * weight.
  // c: largest constant with the open ball of radius c * weight inside V_n.
  double big_c = 0;
  double small_c = std::numeric_limits<double>::infinity();
  for (const auto& level : f.levels) {
    double inside_max = 0;
    double outside_min = std::numeric_limits<double>::infinity();
    bool has_outside = false;
    for (int i = 0; i < u.size(); ++i) {
      if (level.member(u.elements[i])) {
        inside_max = std::max(inside_max, dist[i]);
      } else {
        has_outside = true;
        outside_min = std::min(outside_min, dist[i]);
      }
    }
    big_c = std::max(big_c, inside_max / level.weight);
    if (has_outside) small_c = std::min(small_c, outside_min / level.weight);
  }
  if (!std::isfinite(small_c)) small_c = big_c > 0 ? big_c : 1.0;
  if (small_c > 0 && big_c / small_c > 4.0 + 1e-12) {
    throw FiltrationError("kakutani metric: measured ball sandwich exceeds the factor-4 envelope");
  }

  Metric m;
  m.eval = table_eval(data);
  m.provenance = Provenance::kakutani;
  m.bounded = true;
  m.upper_bound_only = !u.whole_group;
  m.constants["C"] = big_c;
  m.constants["c"] = small_c;
  m.name = "kakutani";
  return m;
}

Metric bi_invariantize(const Group& ctx, const Metric& d, double cap, int budget,
                       std::uint64_t seed) {
  if (!(cap > 0)) throw std::invalid_argument("bi_invariantize: cap must be positive");
  const DistanceFn base = d.eval;
  auto capped = [base, cap](const Element& a, const Element& b) {
    return std::min(base(a, b), cap);
  };

  Metric m;
  m.provenance = Provenance::bi_invariantised;
  m.bounded = true;
  m.constants["cap"] = cap;
  m.name = d.name + "_biinv";

  if (ctx.finite()) {
    auto translates = std::make_shared<const std::vector<Element>>(ctx.enumerate());
    m.eval = [ctx, capped, translates](const Element& a, const Element& b) {
      double best = 0;
      for (const auto& k : *translates) {
        best = std::max(best, capped(ctx.multiply(a, k), ctx.multiply(b, k)));
      }
      return best;
    };
    return m;
  }

  auto translates =
      std::make_shared<const std::vector<Element>>(sample_elements(ctx, budget, seed));
  m.constants["translate_budget"] = static_cast<double>(budget);
  m.eval = [ctx, capped, translates](const Element& a, const Element& b) {
    double best = 0;
    for (const auto& k : *translates) {
      best = std::max(best, capped(ctx.multiply(a, k), ctx.multiply(b, k)));
    }
    return best;
  };
  return m;
}

}  // namespace minmet
