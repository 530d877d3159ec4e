#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "minmet/numeric.hpp"

namespace minmet {

/// Reduced word in the free-group generators: letter +k / -k, 1-based.
struct Word {
  std::vector<std::int32_t> letters;
  bool operator==(const Word&) const = default;
};

/// Integer tuple payload; the owning context fixes moduli (0 = unbounded).
struct Residues {
  std::vector<std::int64_t> v;
  bool operator==(const Residues&) const = default;
};

/// Index into an explicit multiplication table.
struct TableIndex {
  int i = 0;
  bool operator==(const TableIndex&) const = default;
};

struct Element {
  std::variant<Matrix, Word, Residues, TableIndex> payload;

  const Matrix& matrix() const { return std::get<Matrix>(payload); }
  const Word& word() const { return std::get<Word>(payload); }
  const Residues& residues() const { return std::get<Residues>(payload); }
  int table_index() const { return std::get<TableIndex>(payload).i; }
  bool is_matrix() const { return std::holds_alternative<Matrix>(payload); }
};

enum class GroupKind {
  unitary,
  special_orthogonal,
  general_linear,
  heisenberg,
  free_group,
  integer_lattice,
  finite_table,
  finite_cyclic_tower,
  finite_product_of_involutions,
};

std::string kind_name(GroupKind k);

/// Explicit finite multiplication table (row a, column b -> a*b).
struct MultTable {
  int n = 0;
  std::vector<int> mult;  // n*n, row-major
  std::vector<int> inv;
  int identity = 0;
  std::vector<std::string> names;

  int at(int a, int b) const { return mult[static_cast<std::size_t>(a) * n + b]; }
};

MultTable cyclic_table(int m);
MultTable dihedral_table(int m);  // order 2m; rotations first, then reflections
MultTable symmetric3_table();

/// Tangent-space restriction used by subgroup contexts of matrix kinds.
enum class TangentSubspace { full, diagonal };

/// Group context: kind, parameters, arithmetic, and the seeded sampler.
struct Group {
  GroupKind kind = GroupKind::integer_lattice;
  int n = 0;                                  // matrix dimension (also heisenberg size)
  int rank = 0;                               // free group
  int dim = 0;                                // lattice
  std::int64_t prime = 0;                     // cyclic tower base
  int depth = 0;                              // tower / involutions
  std::shared_ptr<const MultTable> table;     // finite_table
  double unitarity_tol = 1e-12;               // drift threshold triggering re-projection
  TangentSubspace subspace = TangentSubspace::full;

  static Group unitary(int n);
  static Group unitary_diagonal(int n);       // diagonal torus, payload-compatible with unitary(n)
  static Group special_orthogonal(int n);
  static Group general_linear(int n);
  static Group heisenberg(int n);             // n == 3 supported
  static Group free_group(int rank);
  static Group integer_lattice(int d);
  static Group finite_table(MultTable t);
  static Group finite_cyclic_tower(std::int64_t p, int depth);
  static Group finite_product_of_involutions(int depth);

  Element identity() const;
  Element multiply(const Element& a, const Element& b) const;
  Element inverse(const Element& a) const;
  Element power(const Element& g, std::int64_t m) const;
  bool equal(const Element& a, const Element& b, double tol = 1e-9) const;
  bool is_identity(const Element& a, double tol = 1e-9) const;

  /// Payload shape / manifold membership check. Throws std::invalid_argument.
  void validate(const Element& a) const;

  /// Convergence gauge: zero exactly at the identity, small iff the payload is
  /// close to it. This is what "compatible with the topology" is tested against.
  double base_distance(const Element& g) const;

  bool finite() const;
  std::int64_t order() const;  // finite kinds only
  std::vector<Element> enumerate(std::int64_t cap = 1 << 16) const;

  /// Canonical hash key; discrete payloads only.
  std::string key(const Element& g) const;

  /// Depth of g in the canonical subgroup chain (tower: p-adic valuation capped
  /// at depth; involutions: first supported coordinate, depth for the identity).
  int filtration_level(const Element& g) const;

  /// Unit-norm random tangent direction for matrix kinds (skew-Hermitian for
  /// unitary, skew-symmetric for special_orthogonal, general for GL), honouring
  /// the context's subspace restriction.
  Matrix random_tangent(std::mt19937_64& rng) const;

  /// exp of a tangent matrix, validated onto the context manifold.
  Element exp_tangent(const Matrix& a) const;

  std::string describe() const;

  bool matrix_kind() const {
    return kind == GroupKind::unitary || kind == GroupKind::special_orthogonal ||
           kind == GroupKind::general_linear;
  }
};

using DistanceFn = std::function<double(const Element&, const Element&)>;

struct BallSample {
  std::vector<Element> elements;  // identity included
  bool exhaustive = false;
  bool below_resolution = false;  // explicit empty-result signal: no non-identity element at this radius
};

/// Deterministic sample of the closed metric ball of the identity.
/// Exhaustive for finite kinds whenever the ball fits in count; rejection
/// sampling from scaled tangent exponentials for matrix kinds; exhaustive
/// enumeration for small lattice / free-group balls.
BallSample sample_ball(const Group& ctx, const DistanceFn& d, double radius, int count,
                       std::uint64_t seed);

/// Deterministic pool of valid elements spread across scales (identity first).
/// Used by samplers that need generic probes independent of any metric.
std::vector<Element> sample_elements(const Group& ctx, int count, std::uint64_t seed);

}  // namespace minmet
