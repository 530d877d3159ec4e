#include "minmet/finite.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <queue>

namespace minmet {

FiniteUniverse FiniteUniverse::enumerate(const Group& ctx, std::int64_t cap) {
  FiniteUniverse u;
  u.group = ctx;
  u.elements = ctx.enumerate(cap);
  u.whole_group = true;
  if (!ctx.matrix_kind()) {
    u.index.reserve(u.elements.size() * 2);
    for (int i = 0; i < u.size(); ++i) u.index.emplace(ctx.key(u.elements[i]), i);
  }
  u.identity_index = u.find(ctx.identity());
  if (u.identity_index < 0) throw std::logic_error("enumerate: identity missing");
  return u;
}

FiniteUniverse FiniteUniverse::from_elements(const Group& ctx, std::vector<Element> elems) {
  FiniteUniverse u;
  u.group = ctx;
  u.elements = std::move(elems);
  if (!ctx.matrix_kind()) u.index.reserve(u.elements.size() * 2);
  for (int i = 0; i < u.size(); ++i) {
    ctx.validate(u.elements[i]);
    if (ctx.matrix_kind()) {
      for (int j = 0; j < i; ++j) {
        if (ctx.equal(u.elements[i], u.elements[j])) {
          throw std::invalid_argument("from_elements: duplicate element");
        }
      }
    } else if (!u.index.emplace(ctx.key(u.elements[i]), i).second) {
      throw std::invalid_argument("from_elements: duplicate element");
    }
  }
  u.identity_index = u.find(ctx.identity());
  if (u.identity_index < 0) throw std::invalid_argument("from_elements: identity must be present");
  for (int i = 0; i < u.size(); ++i) {
    if (u.find(ctx.inverse(u.elements[i])) < 0) {
      throw std::invalid_argument("from_elements: universe must be closed under inverse");
    }
  }
  return u;
}

int FiniteUniverse::find(const Element& g) const {
  if (group.matrix_kind()) {
    // matrix payloads have no stable hash key: linear scan with the group's
    // tolerance-aware equality (explicit matrix universes stay small)
    for (int i = 0; i < size(); ++i) {
      if (group.equal(elements[i], g)) return i;
    }
    return -1;
  }
  auto it = index.find(group.key(g));
  return it == index.end() ? -1 : it->second;
}

std::optional<int> FiniteUniverse::mul(int a, int b) const {
  const int r = find(group.multiply(elements[a], elements[b]));
  if (r < 0) return std::nullopt;
  return r;
}

int FiniteUniverse::inv(int a) const { return find(group.inverse(elements[a])); }

std::vector<double> chain_infimum_from_identity(const FiniteUniverse& u,
                                                const std::vector<double>& gauge) {
  const int n = u.size();
  if (static_cast<int>(gauge.size()) != n) {
    throw std::invalid_argument("chain_infimum_from_identity: gauge size mismatch");
  }
  if (gauge[u.identity_index] != 0) {
    throw std::invalid_argument("chain_infimum_from_identity: gauge at identity must be 0");
  }
  // Difference table diff[v][u] = gauge[u^-1 v]; edge u -> v costs that value.
  // O(n^2) Dijkstra without a heap: n is at most a few thousand here.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<char> done(n, 0);
  dist[u.identity_index] = 0;
  // Precompute inverse indices once.
  std::vector<int> invidx(n);
  for (int i = 0; i < n; ++i) invidx[i] = u.inv(i);
  for (int round = 0; round < n; ++round) {
    int best = -1;
    double bd = inf;
    for (int i = 0; i < n; ++i) {
      if (!done[i] && dist[i] < bd) {
        bd = dist[i];
        best = i;
      }
    }
    if (best < 0) break;
    done[best] = 1;
    const Element ginv = u.group.inverse(u.elements[best]);
    for (int v = 0; v < n; ++v) {
      if (done[v]) continue;
      const int step = u.find(u.group.multiply(ginv, u.elements[v]));
      if (step < 0) continue;
      const double cand = dist[best] + gauge[step];
      if (cand < dist[v]) dist[v] = cand;
    }
  }
  return dist;
}

std::vector<double> dijkstra_generators(const FiniteUniverse& u,
                                        const std::vector<std::pair<int, double>>& generators,
                                        int source) {
  const int n = u.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  dist[source] = 0;
  using Node = std::pair<double, int>;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
  pq.emplace(0.0, source);
  while (!pq.empty()) {
    auto [dcur, cur] = pq.top();
    pq.pop();
    if (dcur > dist[cur]) continue;
    for (const auto& [gen, w] : generators) {
      const auto nxt = u.mul(cur, gen);
      if (!nxt) continue;
      if (dcur + w < dist[*nxt]) {
        dist[*nxt] = dcur + w;
        pq.emplace(dist[*nxt], *nxt);
      }
    }
  }
  return dist;
}

std::vector<std::int64_t> bfs_generators(const FiniteUniverse& u,
                                         const std::vector<int>& generators, int source) {
  const int n = u.size();
  std::vector<std::int64_t> dist(n, -1);
  dist[source] = 0;
  std::deque<int> q{source};
  while (!q.empty()) {
    const int cur = q.front();
    q.pop_front();
    for (int gen : generators) {
      const auto nxt = u.mul(cur, gen);
      if (nxt && dist[*nxt] < 0) {
        dist[*nxt] = dist[cur] + 1;
        q.push_back(*nxt);
      }
    }
  }
  return dist;
}

}  // namespace minmet
