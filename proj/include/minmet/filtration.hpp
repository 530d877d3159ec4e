#pragma once

#include <functional>
#include <optional>

#include "minmet/finite.hpp"

namespace minmet {

enum class FiltrationLaw {
  birkhoff_cubes,     // two-sided index, weights 2^n, (V_n)^3 subset of V_{n+1}
  kakutani_squares,   // one-sided index, weights 2^-n, (V_n)^2 subset of V_{n-1}
};

struct FiltrationLevel {
  double weight = 0;  // gauge value contributed by this level
  std::function<bool(const Element&)> member;
  std::optional<std::vector<Element>> elements;  // explicit set on finite instances
  std::string label;
};

/// Symmetric nested level family; levels sorted by weight ascending (deepest
/// first). The gauge of g is the smallest weight whose level contains g, zero
/// at the identity.
struct Filtration {
  FiltrationLaw law = FiltrationLaw::kakutani_squares;
  std::vector<FiltrationLevel> levels;

  double gauge(const Group& ctx, const Element& g) const;  // +inf when uncovered
};

struct FiltrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Interval family on Z: V_{base^n} = (-base^n, base^n) for n in [n_min, n_max],
/// weight 2^n (empty intervals collapse to {0}).
Filtration interval_filtration_z(int base, int n_min, int n_max);

/// Canonical subgroup chain of finite_cyclic_tower / finite_product_of_involutions,
/// weights 2^-level.
Filtration subgroup_filtration(const Group& ctx);

/// Explicit finite levels (weight, element list), deepest first or any order
/// (sorted internally).
Filtration explicit_filtration(FiltrationLaw law,
                               std::vector<std::pair<double, std::vector<Element>>> levels);

struct FiltrationCheck {
  bool ok = true;
  std::string failure;  // names the offending level on failure
};

/// Verifies symmetry, nesting, the growth law ((V)^3 or (V)^2 into the next
/// level), and coverage/basis. Exhaustive when a universe is supplied,
/// sampled otherwise.
FiltrationCheck verify_filtration(const Group& ctx, const Filtration& f,
                                  const FiniteUniverse* universe, int budget,
                                  std::uint64_t seed);

}  // namespace minmet
