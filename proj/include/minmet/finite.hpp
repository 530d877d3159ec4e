#pragma once

#include <optional>
#include <unordered_map>

#include "minmet/group.hpp"

namespace minmet {

/// Explicit element universe for exhaustive computations: the whole group for
/// finite kinds, or a declared truncation (e.g. an integer interval) otherwise.
struct FiniteUniverse {
  Group group;
  std::vector<Element> elements;
  std::unordered_map<std::string, int> index;
  int identity_index = -1;
  bool whole_group = false;  // exhaustive over the actual group, not a truncation

  static FiniteUniverse enumerate(const Group& ctx, std::int64_t cap = 1 << 16);
  static FiniteUniverse from_elements(const Group& ctx, std::vector<Element> elems);

  int size() const { return static_cast<int>(elements.size()); }
  int find(const Element& g) const;                 // -1 when outside
  std::optional<int> mul(int a, int b) const;       // nullopt when the product leaves the universe
  int inv(int a) const;                             // universes are closed under inverse
};

/// Single-source shortest path from the identity over the complete graph whose
/// edge (u, v) costs gauge[u^-1 v]. gauge[identity] must be 0. Exact for
/// dyadic gauges (all arithmetic is sums of exactly representable values).
std::vector<double> chain_infimum_from_identity(const FiniteUniverse& u,
                                                const std::vector<double>& gauge);

/// Dijkstra from source with sparse right-multiplication edges (gen, weight).
std::vector<double> dijkstra_generators(const FiniteUniverse& u,
                                        const std::vector<std::pair<int, double>>& generators,
                                        int source);

/// BFS word lengths from source; -1 marks unreachable nodes.
std::vector<std::int64_t> bfs_generators(const FiniteUniverse& u,
                                         const std::vector<int>& generators, int source);

}  // namespace minmet
