#include "minmet/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <unordered_set>

#include <Eigen/Eigenvalues>

namespace minmet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DistanceFn safe_eval(const Metric& d) {
  const DistanceFn base = d.eval;
  return [base](const Element& a, const Element& b) {
    try {
      return base(a, b);
    } catch (const std::domain_error&) {
      return kInf;
    }
  };
}

Matrix matrix_log_principal(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NonConvergence("matrix log: eigendecomposition failed");
  Eigen::VectorXcd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (std::abs(vals(i)) < 1e-14) throw NonConvergence("matrix log: singular input");
    vals(i) = std::log(vals(i));
  }
  const Matrix& v = es.eigenvectors();
  return v * vals.asDiagonal() * v.inverse();
}

/// Partial products of a canonical decomposition of t into small steps,
/// excluding the identity and including t itself. Used to seed path searches.
std::vector<Element> canonical_chain(const Group& ctx, const DistanceFn& d, const Element& t,
                                     double step_radius) {
  std::vector<Element> chain;
  const Element id = ctx.identity();
  if (ctx.matrix_kind()) {
    const double total = d(t, id);
    if (!std::isfinite(total) || total <= 0) return {t};
    int m = static_cast<int>(std::ceil(total / std::max(step_radius * 0.9, 1e-9)));
    m = std::min(std::max(m, 1), 4096);
    try {
      const Matrix a = matrix_log_principal(t.matrix());
      // the chord distance underestimates the arc on curved groups, so refine
      // until every consecutive step actually fits inside the step radius
      for (int attempt = 0; attempt < 8; ++attempt) {
        chain.clear();
        for (int j = 1; j <= m; ++j) {
          chain.push_back(ctx.exp_tangent(a * (double(j) / m)));
        }
        chain.back() = t;  // land exactly on the endpoint
        double worst_step = d(chain.front(), id);
        for (std::size_t j = 1; j < chain.size(); ++j) {
          worst_step = std::max(worst_step, d(chain[j], chain[j - 1]));
        }
        if (worst_step <= step_radius * 0.999 || m >= 4096) break;
        m = std::min(m * 2, 4096);
      }
    } catch (const NonConvergence&) {
      chain = {t};
    }
    return chain;
  }
  if (ctx.kind == GroupKind::integer_lattice || ctx.kind == GroupKind::heisenberg) {
    const auto& target = t.residues().v;
    std::int64_t steps = 0;
    for (auto x : target) steps += std::abs(x);
    if (steps > 4096) return {t};
    Element cur = id;
    const int dims = static_cast<int>(target.size());
    for (int axis = 0; axis < dims; ++axis) {
      const std::int64_t want = target[axis];
      const std::int64_t sgn = want >= 0 ? 1 : -1;
      // heisenberg: drive each coordinate in order; z drifts then gets fixed last
      std::int64_t current = cur.residues().v[axis];
      while (current != want) {
        Residues step{std::vector<std::int64_t>(target.size(), 0)};
        step.v[axis] = sgn;
        cur = ctx.multiply(cur, Element{step});
        current = cur.residues().v[axis];
        chain.push_back(cur);
        if (chain.size() > 8192) return {t};
      }
    }
    if (chain.empty() || !ctx.equal(chain.back(), t)) chain.push_back(t);
    return chain;
  }
  if (ctx.kind == GroupKind::free_group) {
    Word prefix;
    for (auto letter : t.word().letters) {
      prefix.letters.push_back(letter);
      chain.push_back(Element{prefix});
    }
    if (chain.empty()) chain.push_back(t);
    return chain;
  }
  return {t};
}

}  // namespace

GeneratingSet GeneratingSet::explicit_set(const Group& ctx, std::vector<Element> gens) {
  GeneratingSet v;
  for (auto& g : gens) {
    ctx.validate(g);
    if (ctx.is_identity(g)) continue;
    bool seen = false;
    for (const auto& e : v.elements) seen = seen || ctx.equal(e, g);
    if (!seen) v.elements.push_back(g);
    const Element inv = ctx.inverse(g);
    seen = false;
    for (const auto& e : v.elements) seen = seen || ctx.equal(e, inv);
    if (!seen) v.elements.push_back(inv);
  }
  if (v.elements.empty()) throw std::invalid_argument("explicit_set: no non-identity generators");
  return v;
}

GeneratingSet GeneratingSet::ball(double radius) {
  if (!(radius > 0)) throw std::invalid_argument("GeneratingSet::ball: radius must be positive");
  GeneratingSet v;
  v.ball_radius = radius;
  return v;
}

WordDistance word_metric(const Group& ctx, const GeneratingSet& V, const Element& g,
                         const Element& f, std::int64_t node_cap, std::int64_t depth_cap) {
  if (ctx.matrix_kind()) {
    throw std::invalid_argument("word_metric: discrete contexts only");
  }
  if (V.elements.empty()) {
    throw std::invalid_argument("word_metric: needs an explicit generating set");
  }
  const Element target = ctx.multiply(ctx.inverse(f), g);
  WordDistance out;
  if (ctx.is_identity(target)) {
    out.value = 0;
    return out;
  }
  std::unordered_set<std::string> seen;
  std::deque<std::pair<Element, std::int64_t>> queue;
  const Element id = ctx.identity();
  seen.insert(ctx.key(id));
  queue.emplace_back(id, 0);
  const std::string target_key = ctx.key(target);
  while (!queue.empty()) {
    auto [cur, depth] = std::move(queue.front());
    queue.pop_front();
    if (depth >= depth_cap) {
      out.truncated = true;
      continue;
    }
    for (const auto& v : V.elements) {
      Element next = ctx.multiply(cur, v);
      std::string key = ctx.key(next);
      if (key == target_key) {
        out.value = depth + 1;
        return out;
      }
      if (seen.count(key)) continue;
      if (static_cast<std::int64_t>(seen.size()) >= node_cap) {
        out.truncated = true;
        continue;
      }
      seen.insert(std::move(key));
      queue.emplace_back(std::move(next), depth + 1);
    }
  }
  return out;  // unreachable (exactly, unless truncated)
}

std::vector<std::int64_t> word_metric_table(const FiniteUniverse& u,
                                            const std::vector<int>& generator_indices) {
  std::vector<int> gens = generator_indices;
  for (int g : generator_indices) {
    const int inv = u.inv(g);
    if (inv >= 0 && std::find(gens.begin(), gens.end(), inv) == gens.end()) gens.push_back(inv);
  }
  return bfs_generators(u, gens, u.identity_index);
}

Metric path_metric_finite(const FiniteUniverse& u, const Metric& d,
                          const std::vector<int>& generator_indices) {
  const DistanceFn dist = safe_eval(d);
  const Element id = u.group.identity();
  std::vector<std::pair<int, double>> gens;
  std::vector<int> indices = generator_indices;
  for (int g : generator_indices) {
    const int inv = u.inv(g);
    if (inv >= 0 && std::find(indices.begin(), indices.end(), inv) == indices.end()) {
      indices.push_back(inv);
    }
  }
  for (int g : indices) {
    if (g == u.identity_index) continue;
    gens.emplace_back(g, dist(u.elements[static_cast<std::size_t>(g)], id));
  }
  if (gens.empty()) throw std::invalid_argument("path_metric_finite: no non-identity generators");

  auto universe = std::make_shared<const FiniteUniverse>(u);
  auto table = std::make_shared<const std::vector<double>>(
      dijkstra_generators(*universe, gens, universe->identity_index));

  Metric m;
  m.eval = [universe, table](const Element& a, const Element& b) {
    const int idx = universe->find(
        universe->group.multiply(universe->group.inverse(b), a));
    if (idx < 0) throw std::domain_error("path metric: argument outside the universe");
    return (*table)[static_cast<std::size_t>(idx)];
  };
  m.provenance = Provenance::path_refined;
  m.bounded = true;
  m.upper_bound_only = !u.whole_group;
  m.name = "path";
  return m;
}

Metric path_metric_sampled(const Group& ctx, const Metric& d, double ball_radius, int nodes,
                           std::uint64_t seed) {
  if (!(ball_radius > 0)) {
    throw std::invalid_argument("path_metric_sampled: radius must be positive");
  }
  const DistanceFn dist = safe_eval(d);
  auto anchor = std::make_shared<const std::vector<Element>>(
      sample_elements(ctx, std::max(2, nodes), seed));
  const Group group = ctx;

  Metric m;
  m.eval = [group, dist, anchor, ball_radius](const Element& a, const Element& b) {
    const Element t = group.multiply(group.inverse(b), a);
    const Element id = group.identity();
    if (group.is_identity(t)) return 0.0;
    std::vector<Element> vertices{id};
    for (const auto& g : *anchor) {
      if (!group.is_identity(g)) vertices.push_back(g);
    }
    for (auto& g : canonical_chain(group, dist, t, ball_radius)) vertices.push_back(std::move(g));
    int target = -1;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (group.equal(vertices[i], t, 1e-12)) target = static_cast<int>(i);
    }
    if (target < 0) {
      vertices.push_back(t);
      target = static_cast<int>(vertices.size()) - 1;
    }
    const int n = static_cast<int>(vertices.size());
    std::vector<double> best(n, kInf);
    std::vector<char> done(n, 0);
    best[0] = 0;
    for (int round = 0; round < n; ++round) {
      int cur = -1;
      double cd = kInf;
      for (int i = 0; i < n; ++i) {
        if (!done[i] && best[i] < cd) {
          cd = best[i];
          cur = i;
        }
      }
      if (cur < 0 || cur == target) break;
      done[cur] = 1;
      const Element inv = group.inverse(vertices[cur]);
      for (int j = 0; j < n; ++j) {
        if (done[j]) continue;
        const double step = dist(group.multiply(inv, vertices[j]), id);
        if (!(step <= ball_radius + 1e-12)) continue;
        if (best[cur] + step < best[j]) best[j] = best[cur] + step;
      }
    }
    return best[target];
  };
  m.provenance = Provenance::path_refined;
  m.upper_bound_only = true;
  m.constants["ball_radius"] = ball_radius;
  m.constants["nodes"] = static_cast<double>(nodes);
  m.name = "path_sampled";
  return m;
}

QIReport fit_quasi_isometry(const Group& ctx, const Metric& d1, const Metric& d2,
                            const std::vector<Element>& probes) {
  const DistanceFn e1 = safe_eval(d1);
  const DistanceFn e2 = safe_eval(d2);
  const Element id = ctx.identity();
  QIReport report;

  std::vector<std::pair<double, double>> xy;
  for (const auto& g : probes) {
    const double x = e1(g, id);
    const double y = e2(g, id);
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    xy.emplace_back(x, y);
  }
  report.sample_budget = static_cast<std::int64_t>(xy.size());
  if (xy.empty()) {
    report.verdict = Verdict::inconclusive;
    return report;
  }

  // slope from the larger half of the scale range, offset from the residual
  std::vector<double> xs;
  for (const auto& [x, y] : xy) {
    if (x > 0) xs.push_back(x);
  }
  double x_med = 0;
  if (!xs.empty()) {
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    x_med = xs[xs.size() / 2];
  }
  double k = 1.0;
  for (const auto& [x, y] : xy) {
    if (x >= x_med && x > 0 && y > 0) k = std::max({k, y / x, x / y});
  }
  double c = 0.0;
  for (const auto& [x, y] : xy) {
    c = std::max({c, y - k * x, x - k * y});
  }
  report.K = k;
  report.C = c;
  report.max_violation = 0;
  for (const auto& [x, y] : xy) {
    report.max_violation =
        std::max({report.max_violation, y - (k * x + c), (x - c) / k - y});
  }

  // dyadic scale bands: unbounded ratio growth refutes quasi-isometry
  double x_min = kInf, x_max = 0;
  for (const auto& [x, y] : xy) {
    if (x > 0 && y > 0) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  }
  if (std::isfinite(x_min) && x_max > x_min) {
    const int bands = static_cast<int>(std::floor(std::log2(x_max / x_min))) + 1;
    std::vector<double> band_ratio(static_cast<std::size_t>(bands), 0.0);
    for (const auto& [x, y] : xy) {
      if (!(x > 0) || !(y > 0)) continue;
      const int band = std::min(bands - 1,
                                static_cast<int>(std::floor(std::log2(x / x_min))));
      band_ratio[static_cast<std::size_t>(band)] =
          std::max(band_ratio[static_cast<std::size_t>(band)], std::max(y / x, x / y));
    }
    for (double r : band_ratio) {
      if (r > 0) report.witness_scales.push_back(r);
    }
    if (report.witness_scales.size() >= 5) {
      const double head = report.witness_scales.front();
      const double tail = report.witness_scales.back();
      if (head > 0 && tail >= 16.0 * head) {
        report.verdict = Verdict::refuted;
        return report;
      }
    }
  }
  report.verdict = Verdict::holds_on_budget;
  return report;
}

std::vector<Element> comparison_probes(const Group& ctx, int budget, std::uint64_t seed) {
  if (ctx.finite() && ctx.order() <= budget) return ctx.enumerate(budget);
  return sample_elements(ctx, budget, seed);
}

BiLipschitzReport bilipschitz_constant(const Group& ctx, const Metric& d, const Metric& partial,
                                       double v_radius, const std::vector<Element>& probes) {
  const DistanceFn ed = safe_eval(d);
  const DistanceFn ep = safe_eval(partial);
  const Element id = ctx.identity();
  BiLipschitzReport report;

  std::vector<std::pair<double, double>> xy;  // (partial, d)
  for (const auto& g : probes) {
    const double p = ep(g, id);
    const double x = ed(g, id);
    if (!std::isfinite(p) || !std::isfinite(x)) continue;
    xy.emplace_back(p, x);
  }
  if (xy.empty()) return report;

  report.worst_ratio = 1;
  for (const auto& [p, x] : xy) {
    if (p > 0 && x > 0) report.worst_ratio = std::max({report.worst_ratio, x / p, p / x});
  }
  if (report.worst_ratio <= 1 + 1e-9) {
    report.direct_equal = true;
    report.L = 1;
    report.verified = true;
    report.inf_outside = v_radius;
    return report;
  }

  auto one_direction = [&](bool d_over_partial) {
    // bound a <= L b with a = d, b = partial (or swapped)
    double k_local = 1.0;
    double m_slope = 1.0;
    double inf_outside = kInf;
    for (const auto& [p, x] : xy) {
      const double a = d_over_partial ? x : p;
      const double b = d_over_partial ? p : x;
      if (b > 0 && b <= v_radius) k_local = std::max(k_local, a / b);
      if (b > 0) m_slope = std::max(m_slope, std::min(a / b, 1e12));
      if (b > v_radius) inf_outside = std::min(inf_outside, b);
    }
    // envelope a <= M b + N over all probes, with the local slope as M
    double m_env = 1.0;
    for (const auto& [p, x] : xy) {
      const double a = d_over_partial ? x : p;
      const double b = d_over_partial ? p : x;
      if (b > v_radius && b > 0) m_env = std::max(m_env, a / b);
    }
    double n_off = 0.0;
    for (const auto& [p, x] : xy) {
      const double a = d_over_partial ? x : p;
      const double b = d_over_partial ? p : x;
      n_off = std::max(n_off, a - m_env * b);
    }
    if (!std::isfinite(inf_outside)) inf_outside = v_radius;
    const double l = std::max(k_local, m_env + n_off / std::max(inf_outside, 1e-12));
    return std::tuple<double, double, double, double, double>(l, k_local, m_env, n_off,
                                                              inf_outside);
  };

  auto [l1, k1, m1, n1, inf1] = one_direction(true);
  auto [l2, k2, m2, n2, inf2] = one_direction(false);
  report.L = std::max(l1, l2);
  report.K_local = std::max(k1, k2);
  report.M = std::max(m1, m2);
  report.N = std::max(n1, n2);
  report.inf_outside = std::min(inf1, inf2);

  report.verified = true;
  for (const auto& [p, x] : xy) {
    if (x > report.L * p * (1 + 1e-9) + 1e-12 || p > report.L * x * (1 + 1e-9) + 1e-12) {
      report.verified = false;
    }
  }
  return report;
}

}  // namespace minmet
