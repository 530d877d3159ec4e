#include "minmet/group.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace minmet {

std::string kind_name(GroupKind k) {
  switch (k) {
    case GroupKind::unitary: return "unitary";
    case GroupKind::special_orthogonal: return "special_orthogonal";
    case GroupKind::general_linear: return "general_linear";
    case GroupKind::heisenberg: return "heisenberg";
    case GroupKind::free_group: return "free_group";
    case GroupKind::integer_lattice: return "integer_lattice";
    case GroupKind::finite_table: return "finite_table";
    case GroupKind::finite_cyclic_tower: return "finite_cyclic_tower";
    case GroupKind::finite_product_of_involutions: return "finite_product_of_involutions";
  }
  return "?";
}

MultTable cyclic_table(int m) {
  MultTable t;
  t.n = m;
  t.mult.resize(static_cast<std::size_t>(m) * m);
  t.inv.resize(m);
  for (int a = 0; a < m; ++a) {
    t.inv[a] = (m - a) % m;
    for (int b = 0; b < m; ++b) t.mult[static_cast<std::size_t>(a) * m + b] = (a + b) % m;
  }
  t.names.resize(m);
  for (int a = 0; a < m; ++a) t.names[a] = "g^" + std::to_string(a);
  return t;
}

MultTable dihedral_table(int m) {
  // Elements 0..m-1: rotations r^i; m..2m-1: reflections s r^i, with s r = r^-1 s.
  MultTable t;
  const int n = 2 * m;
  t.n = n;
  t.mult.resize(static_cast<std::size_t>(n) * n);
  t.inv.resize(n);
  auto enc = [m](bool flip, int rot) { return (flip ? m : 0) + ((rot % m) + m) % m; };
  for (int a = 0; a < n; ++a) {
    const bool fa = a >= m;
    const int ra = a % m;
    for (int b = 0; b < n; ++b) {
      const bool fb = b >= m;
      const int rb = b % m;
      // (s^fa r^ra)(s^fb r^rb) = s^(fa^fb) r^(rb + (fb ? -ra : ra))
      t.mult[static_cast<std::size_t>(a) * n + b] = enc(fa != fb, rb + (fb ? -ra : ra));
    }
    t.inv[a] = fa ? a : enc(false, -ra);
    t.names.push_back((fa ? "s r^" : "r^") + std::to_string(ra));
  }
  return t;
}

MultTable symmetric3_table() {
  // Permutations of {0,1,2} in a fixed order: id, (01), (02), (12), (012), (021).
  const int perms[6][3] = {{0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1}, {1, 2, 0}, {2, 0, 1}};
  auto find = [&](const int p[3]) {
    for (int i = 0; i < 6; ++i) {
      if (perms[i][0] == p[0] && perms[i][1] == p[1] && perms[i][2] == p[2]) return i;
    }
    return -1;
  };
  MultTable t;
  t.n = 6;
  t.mult.resize(36);
  t.inv.resize(6);
  t.names = {"id", "(01)", "(02)", "(12)", "(012)", "(021)"};
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      int c[3];
      for (int x = 0; x < 3; ++x) c[x] = perms[a][perms[b][x]];  // a after b
      t.mult[static_cast<std::size_t>(a) * 6 + b] = find(c);
    }
    int ip[3];
    for (int x = 0; x < 3; ++x) ip[perms[a][x]] = x;
    t.inv[a] = find(ip);
  }
  return t;
}

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

Word reduce_concat(const Word& a, const Word& b) {
  Word r = a;
  for (std::int32_t letter : b.letters) {
    if (!r.letters.empty() && r.letters.back() == -letter) {
      r.letters.pop_back();
    } else {
      r.letters.push_back(letter);
    }
  }
  return r;
}

Matrix realize_if_nearly_real(Matrix m) {
  double imag = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) imag = std::max(imag, std::abs(std::imag(m(i, j))));
  }
  if (imag < 1e-9) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Complex(std::real(m(i, j)), 0.0);
    }
  }
  return m;
}

}  // namespace

Group Group::unitary(int n) {
  Group g;
  g.kind = GroupKind::unitary;
  g.n = n;
  return g;
}

Group Group::unitary_diagonal(int n) {
  Group g = unitary(n);
  g.subspace = TangentSubspace::diagonal;
  return g;
}

Group Group::special_orthogonal(int n) {
  Group g;
  g.kind = GroupKind::special_orthogonal;
  g.n = n;
  return g;
}

Group Group::general_linear(int n) {
  Group g;
  g.kind = GroupKind::general_linear;
  g.n = n;
  return g;
}

Group Group::heisenberg(int n) {
  if (n != 3) throw std::invalid_argument("heisenberg: only size 3 is supported");
  Group g;
  g.kind = GroupKind::heisenberg;
  g.n = 3;
  return g;
}

Group Group::free_group(int rank) {
  Group g;
  g.kind = GroupKind::free_group;
  g.rank = rank;
  return g;
}

Group Group::integer_lattice(int d) {
  Group g;
  g.kind = GroupKind::integer_lattice;
  g.dim = d;
  return g;
}

Group Group::finite_table(MultTable t) {
  Group g;
  g.kind = GroupKind::finite_table;
  g.table = std::make_shared<const MultTable>(std::move(t));
  return g;
}

Group Group::finite_cyclic_tower(std::int64_t p, int depth) {
  if (p < 2 || depth < 1 || std::pow(double(p), depth) > 9e17) {
    throw std::invalid_argument("finite_cyclic_tower: bad parameters");
  }
  Group g;
  g.kind = GroupKind::finite_cyclic_tower;
  g.prime = p;
  g.depth = depth;
  return g;
}

Group Group::finite_product_of_involutions(int depth) {
  if (depth < 1 || depth > 30) throw std::invalid_argument("finite_product_of_involutions: bad depth");
  Group g;
  g.kind = GroupKind::finite_product_of_involutions;
  g.depth = depth;
  return g;
}

Element Group::identity() const {
  switch (kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal:
    case GroupKind::general_linear:
      return Element{Matrix::Identity(n, n)};
    case GroupKind::heisenberg:
      return Element{Residues{{0, 0, 0}}};
    case GroupKind::free_group:
      return Element{Word{}};
    case GroupKind::integer_lattice:
      return Element{Residues{std::vector<std::int64_t>(dim, 0)}};
    case GroupKind::finite_table:
      return Element{TableIndex{table->identity}};
    case GroupKind::finite_cyclic_tower:
      return Element{Residues{{0}}};
    case GroupKind::finite_product_of_involutions:
      return Element{Residues{std::vector<std::int64_t>(depth, 0)}};
  }
  throw std::logic_error("unreachable");
}

Element Group::multiply(const Element& a, const Element& b) const {
  switch (kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal: {
      Matrix m = a.matrix() * b.matrix();
      if (unitarity_drift(m) > unitarity_tol) {
        m = project_unitary(m);
        if (kind == GroupKind::special_orthogonal) m = realize_if_nearly_real(std::move(m));
      }
      return Element{std::move(m)};
    }
    case GroupKind::general_linear:
      return Element{Matrix(a.matrix() * b.matrix())};
    case GroupKind::heisenberg: {
      const auto& x = a.residues().v;
      const auto& y = b.residues().v;
      return Element{Residues{{x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]}}};
    }
    case GroupKind::free_group:
      return Element{reduce_concat(a.word(), b.word())};
    case GroupKind::integer_lattice: {
      Residues r = a.residues();
      for (int i = 0; i < dim; ++i) r.v[i] += b.residues().v[i];
      return Element{std::move(r)};
    }
    case GroupKind::finite_table:
      return Element{TableIndex{table->at(a.table_index(), b.table_index())}};
    case GroupKind::finite_cyclic_tower: {
      const std::int64_t m = ipow(prime, depth);
      return Element{Residues{{(a.residues().v[0] + b.residues().v[0]) % m}}};
    }
    case GroupKind::finite_product_of_involutions: {
      Residues r = a.residues();
      for (int i = 0; i < depth; ++i) r.v[i] = (r.v[i] + b.residues().v[i]) & 1;
      return Element{std::move(r)};
    }
  }
  throw std::logic_error("unreachable");
}

Element Group::inverse(const Element& a) const {
  switch (kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal:
      return Element{Matrix(a.matrix().adjoint())};
    case GroupKind::general_linear:
      return Element{Matrix(a.matrix().inverse())};
    case GroupKind::heisenberg: {
      const auto& x = a.residues().v;
      return Element{Residues{{-x[0], -x[1], -x[2] + x[0] * x[1]}}};
    }
    case GroupKind::free_group: {
      Word w;
      for (auto it = a.word().letters.rbegin(); it != a.word().letters.rend(); ++it) {
        w.letters.push_back(-*it);
      }
      return Element{std::move(w)};
    }
    case GroupKind::integer_lattice: {
      Residues r = a.residues();
      for (auto& x : r.v) x = -x;
      return Element{std::move(r)};
    }
    case GroupKind::finite_table:
      return Element{TableIndex{table->inv[a.table_index()]}};
    case GroupKind::finite_cyclic_tower: {
      const std::int64_t m = ipow(prime, depth);
      return Element{Residues{{(m - a.residues().v[0]) % m}}};
    }
    case GroupKind::finite_product_of_involutions:
      return a;  // every element is its own inverse
  }
  throw std::logic_error("unreachable");
}

Element Group::power(const Element& g, std::int64_t m) const {
  if (m == 0) return identity();
  if (m < 0) return inverse(power(g, -m));
  Element acc = identity();
  Element base = g;
  std::int64_t e = m;
  while (e > 0) {
    if (e & 1) acc = multiply(acc, base);
    e >>= 1;
    if (e > 0) base = multiply(base, base);
  }
  return acc;
}

bool Group::equal(const Element& a, const Element& b, double tol) const {
  if (a.payload.index() != b.payload.index()) return false;
  if (a.is_matrix()) return (a.matrix() - b.matrix()).norm() <= tol;
  if (std::holds_alternative<Word>(a.payload)) return a.word() == b.word();
  if (std::holds_alternative<Residues>(a.payload)) return a.residues() == b.residues();
  return a.table_index() == b.table_index();
}

bool Group::is_identity(const Element& a, double tol) const { return equal(a, identity(), tol); }

void Group::validate(const Element& a) const {
  auto fail = [&](const std::string& why) { throw std::invalid_argument(describe() + ": " + why); };
  switch (kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal:
    case GroupKind::general_linear: {
      if (!a.is_matrix()) fail("payload is not a matrix");
      const Matrix& m = a.matrix();
      if (m.rows() != n || m.cols() != n) fail("matrix shape mismatch");
      if (kind != GroupKind::general_linear && unitarity_drift(m) > 1e-8) {
        fail("matrix is off the unitary manifold");
      }
      if (kind == GroupKind::special_orthogonal) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (std::abs(std::imag(m(i, j))) > 1e-8) fail("special_orthogonal payload must be real");
          }
        }
        if (std::abs(m.determinant() - Complex(1, 0)) > 1e-6) fail("determinant is not +1");
      }
      if (kind == GroupKind::general_linear &&
          std::abs(Eigen::FullPivLU<Matrix>(m).determinant()) < 1e-12) {
        fail("matrix is singular");
      }
      return;
    }
    case GroupKind::heisenberg:
      if (!std::holds_alternative<Residues>(a.payload) || a.residues().v.size() != 3) {
        fail("payload is not an integer triple");
      }
      return;
    case GroupKind::free_group: {
      if (!std::holds_alternative<Word>(a.payload)) fail("payload is not a word");
      const auto& ls = a.word().letters;
      for (std::size_t i = 0; i < ls.size(); ++i) {
        if (ls[i] == 0 || std::abs(ls[i]) > rank) fail("letter out of range");
        if (i + 1 < ls.size() && ls[i + 1] == -ls[i]) fail("word is not reduced");
      }
      return;
    }
    case GroupKind::integer_lattice:
      if (!std::holds_alternative<Residues>(a.payload) ||
          a.residues().v.size() != static_cast<std::size_t>(dim)) {
        fail("payload is not a lattice point of the declared dimension");
      }
      return;
    case GroupKind::finite_table:
      if (!std::holds_alternative<TableIndex>(a.payload) || a.table_index() < 0 ||
          a.table_index() >= table->n) {
        fail("table index out of range");
      }
      return;
    case GroupKind::finite_cyclic_tower: {
      if (!std::holds_alternative<Residues>(a.payload) || a.residues().v.size() != 1) {
        fail("payload is not a single residue");
      }
      const std::int64_t m = ipow(prime, depth);
      if (a.residues().v[0] < 0 || a.residues().v[0] >= m) fail("residue outside its modulus range");
      return;
    }
    case GroupKind::finite_product_of_involutions:
      if (!std::holds_alternative<Residues>(a.payload) ||
          a.residues().v.size() != static_cast<std::size_t>(depth)) {
        fail("payload is not a 0/1 vector of the declared depth");
      }
      for (auto x : a.residues().v) {
        if (x != 0 && x != 1) fail("residue outside its modulus range");
      }
      return;
  }
}

double Group::base_distance(const Element& g) const {
  switch (kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal:
    case GroupKind::general_linear:
      return operator_norm(g.matrix() - Matrix::Identity(n, n));
    case GroupKind::heisenberg: {
      const auto& v = g.residues().v;
      return static_cast<double>(std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]));
    }
    case GroupKind::free_group:
      return static_cast<double>(g.word().letters.size());
    case GroupKind::integer_lattice: {
      std::int64_t s = 0;
      for (auto x : g.residues().v) s += std::abs(x);
      return static_cast<double>(s);
    }
    case GroupKind::finite_table:
      return g.table_index() == table->identity ? 0.0 : 1.0;
    case GroupKind::finite_cyclic_tower:
    case GroupKind::finite_product_of_involutions: {
      const int level = filtration_level(g);
      return level >= depth ? 0.0 : std::exp2(-level);
    }
  }
  throw std::logic_error("unreachable");
}

bool Group::finite() const {
  return kind == GroupKind::finite_table || kind == GroupKind::finite_cyclic_tower ||
         kind == GroupKind::finite_product_of_involutions;
}

std::int64_t Group::order() const {
  switch (kind) {
    case GroupKind::finite_table: return table->n;
    case GroupKind::finite_cyclic_tower: return ipow(prime, depth);
    case GroupKind::finite_product_of_involutions: return std::int64_t(1) << depth;
    default: throw std::invalid_argument("order: group is not finite");
  }
}

std::vector<Element> Group::enumerate(std::int64_t cap) const {
  if (!finite()) throw std::invalid_argument("enumerate: group is not finite");
  const std::int64_t m = order();
  if (m > cap) throw std::invalid_argument("enumerate: order exceeds the exhaustive cap");
  std::vector<Element> out;
  out.reserve(m);
  switch (kind) {
    case GroupKind::finite_table:
      for (int i = 0; i < table->n; ++i) out.push_back(Element{TableIndex{i}});
      break;
    case GroupKind::finite_cyclic_tower:
      for (std::int64_t i = 0; i < m; ++i) out.push_back(Element{Residues{{i}}});
      break;
    case GroupKind::finite_product_of_involutions:
      for (std::int64_t mask = 0; mask < m; ++mask) {
        Residues r;
        r.v.resize(depth);
        for (int i = 0; i < depth; ++i) r.v[i] = (mask >> i) & 1;
        out.push_back(Element{std::move(r)});
      }
      break;
    default: break;
  }
  return out;
}

std::string Group::key(const Element& g) const {
  std::ostringstream os;
  if (g.is_matrix()) throw std::invalid_argument("key: matrix payloads are not hashable");
  if (std::holds_alternative<Word>(g.payload)) {
    os << "w";
    for (auto l : g.word().letters) os << ":" << l;
  } else if (std::holds_alternative<Residues>(g.payload)) {
    os << "r";
    for (auto x : g.residues().v) os << ":" << x;
  } else {
    os << "t:" << g.table_index();
  }
  return os.str();
}

int Group::filtration_level(const Element& g) const {
  switch (kind) {
    case GroupKind::finite_cyclic_tower: {
      std::int64_t x = g.residues().v[0];
      if (x == 0) return depth;
      int level = 0;
      while (level < depth && x % prime == 0) {
        x /= prime;
        ++level;
      }
      return level;
    }
    case GroupKind::finite_product_of_involutions: {
      for (int i = 0; i < depth; ++i) {
        if (g.residues().v[i] != 0) return i;
      }
      return depth;
    }
    default:
      throw std::invalid_argument("filtration_level: kind has no canonical subgroup chain");
  }
}

Matrix Group::random_tangent(std::mt19937_64& rng) const {
  if (!matrix_kind()) throw std::invalid_argument("random_tangent: not a matrix kind");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a = Matrix::Zero(n, n);
  if (subspace == TangentSubspace::diagonal) {
    for (int i = 0; i < n; ++i) a(i, i) = Complex(0, gauss(rng));
  } else if (kind == GroupKind::unitary) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    }
    a = 0.5 * (g - Matrix(g.adjoint()));
  } else if (kind == GroupKind::special_orthogonal) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = Complex(gauss(rng), 0.0);
    }
    a = 0.5 * (g - Matrix(g.transpose()));
  } else {  // general_linear
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = Complex(gauss(rng), gauss(rng));
    }
  }
  const double nrm = operator_norm(a);
  if (nrm < 1e-14) {
    a = Matrix::Zero(n, n);
    a(0, std::min(1, n - 1)) = Complex(0, 1);
    a(std::min(1, n - 1), 0) = Complex(0, n > 1 ? -1 : 1);
    return a / operator_norm(a);
  }
  return a / nrm;
}

Element Group::exp_tangent(const Matrix& a) const {
  if (kind == GroupKind::general_linear) {
    // scaling and squaring with a short Taylor head; inputs stay small
    int s = 0;
    double nrm = a.norm();
    while (nrm > 0.25) {
      nrm /= 2;
      ++s;
    }
    const Matrix b = a / std::exp2(s);
    Matrix term = Matrix::Identity(n, n);
    Matrix sum = term;
    for (int k = 1; k <= 12; ++k) {
      term = term * b / double(k);
      sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return Element{std::move(sum)};
  }
  Matrix e = exp_skew_hermitian(a);
  if (kind == GroupKind::special_orthogonal) e = realize_if_nearly_real(std::move(e));
  return Element{std::move(e)};
}

std::string Group::describe() const {
  std::ostringstream os;
  os << kind_name(kind) << "(";
  switch (kind) {
    case GroupKind::unitary:
    case GroupKind::special_orthogonal:
    case GroupKind::general_linear:
    case GroupKind::heisenberg: os << n; break;
    case GroupKind::free_group: os << rank; break;
    case GroupKind::integer_lattice: os << dim; break;
    case GroupKind::finite_table: os << (table ? table->n : 0); break;
    case GroupKind::finite_cyclic_tower: os << prime << "," << depth; break;
    case GroupKind::finite_product_of_involutions: os << depth; break;
  }
  os << ")";
  if (subspace == TangentSubspace::diagonal) os << "[diagonal]";
  return os.str();
}

namespace {

/// Largest k >= 0 with d(g^k, 1) <= r along one axis, by exponential search.
std::int64_t axis_reach(const Group& ctx, const DistanceFn& d, const Element& gen,
                        const Element& id, double r, std::int64_t cap) {
  if (d(gen, id) > r) return 0;
  std::int64_t lo = 1, hi = 2;
  while (hi <= cap && d(ctx.power(gen, hi), id) <= r) {
    lo = hi;
    hi *= 2;
  }
  hi = std::min(hi, cap + 1);
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (d(ctx.power(gen, mid), id) <= r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

BallSample sample_ball(const Group& ctx, const DistanceFn& d, double radius, int count,
                       std::uint64_t seed) {
  if (radius <= 0) throw std::invalid_argument("sample_ball: radius must be positive");
  if (count <= 0) throw std::invalid_argument("sample_ball: count must be positive");
  BallSample out;
  const Element id = ctx.identity();
  std::mt19937_64 rng(seed);

  if (ctx.finite()) {
    std::vector<Element> ball;
    for (auto& g : ctx.enumerate()) {
      if (d(g, id) <= radius) ball.push_back(std::move(g));
    }
    out.below_resolution = ball.size() <= 1;
    if (static_cast<int>(ball.size()) <= count) {
      out.elements = std::move(ball);
      out.exhaustive = true;
      return out;
    }
    std::shuffle(ball.begin(), ball.end(), rng);
    ball.resize(count);
    // keep the identity present
    bool has_id = false;
    for (const auto& g : ball) has_id = has_id || ctx.is_identity(g);
    if (!has_id) ball[0] = id;
    out.elements = std::move(ball);
    return out;
  }

  if (ctx.matrix_kind()) {
    out.elements.push_back(id);
    // chord radius -> eigenangle radius for the unitary kinds
    const double angle = (ctx.kind == GroupKind::general_linear)
                             ? radius
                             : 2.0 * std::asin(std::min(radius, 1.999999) / 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int attempts = 0;
    const int attempt_cap = count * 50;
    while (static_cast<int>(out.elements.size()) < count && attempts < attempt_cap) {
      ++attempts;
      const Matrix dir = ctx.random_tangent(rng);
      const Element g = ctx.exp_tangent(dir * (angle * unit(rng)));
      if (d(g, id) <= radius + 1e-12) out.elements.push_back(g);
    }
    out.below_resolution = out.elements.size() <= 1;
    return out;
  }

  if (ctx.kind == GroupKind::integer_lattice) {
    // per-axis reach, then exhaustive box enumeration when small
    std::vector<std::int64_t> reach(ctx.dim);
    double logcells = 0;
    for (int i = 0; i < ctx.dim; ++i) {
      Residues r{std::vector<std::int64_t>(ctx.dim, 0)};
      r.v[i] = 1;
      reach[i] = axis_reach(ctx, d, Element{r}, id, radius, std::int64_t(1) << 40);
      logcells += std::log2(2.0 * reach[i] + 1.0);
    }
    const double cell_cap = std::max<double>(4.0 * count, 1 << 16);
    if (logcells <= std::log2(cell_cap)) {
      std::vector<std::int64_t> v(ctx.dim, 0);
      std::vector<Element> ball;
      std::function<void(int)> rec = [&](int axis) {
        if (axis == ctx.dim) {
          Element g{Residues{v}};
          if (d(g, id) <= radius) ball.push_back(std::move(g));
          return;
        }
        for (std::int64_t x = -reach[axis]; x <= reach[axis]; ++x) {
          v[axis] = x;
          rec(axis + 1);
        }
      };
      rec(0);
      out.below_resolution = ball.size() <= 1;
      if (static_cast<int>(ball.size()) <= count) {
        out.elements = std::move(ball);
        out.exhaustive = true;
      } else {
        std::shuffle(ball.begin(), ball.end(), rng);
        ball.resize(count);
        bool has_id = false;
        for (const auto& g : ball) has_id = has_id || ctx.is_identity(g);
        if (!has_id) ball[0] = id;
        out.elements = std::move(ball);
      }
      return out;
    }
    out.elements.push_back(id);
    int attempts = 0;
    while (static_cast<int>(out.elements.size()) < count && attempts < count * 50) {
      ++attempts;
      Residues r{std::vector<std::int64_t>(ctx.dim, 0)};
      for (int i = 0; i < ctx.dim; ++i) {
        std::uniform_int_distribution<std::int64_t> ax(-reach[i], reach[i]);
        r.v[i] = ax(rng);
      }
      Element g{std::move(r)};
      if (d(g, id) <= radius) out.elements.push_back(std::move(g));
    }
    out.below_resolution = out.elements.size() <= 1;
    return out;
  }

  if (ctx.kind == GroupKind::free_group) {
    Element gen{Word{{1}}};
    const std::int64_t max_len = axis_reach(ctx, d, gen, id, radius, 1 << 20);
    out.below_resolution = max_len < 1;
    // BFS up to max_len, exhaustively when small enough
    std::vector<Element> ball{id};
    std::vector<Element> frontier{id};
    bool exhaustive = true;
    for (std::int64_t l = 0; l < max_len && exhaustive; ++l) {
      std::vector<Element> next;
      for (const auto& w : frontier) {
        for (int gidx = 1; gidx <= ctx.rank; ++gidx) {
          for (int sgn : {1, -1}) {
            const std::int32_t letter = sgn * gidx;
            if (!w.word().letters.empty() && w.word().letters.back() == -letter) continue;
            Word nw = w.word();
            nw.letters.push_back(letter);
            Element g{std::move(nw)};
            if (d(g, id) <= radius) next.push_back(std::move(g));
          }
        }
        if (ball.size() + next.size() > static_cast<std::size_t>(4 * count) + (1 << 16)) {
          exhaustive = false;
          break;
        }
      }
      for (auto& g : next) ball.push_back(g);
      frontier = std::move(next);
    }
    if (exhaustive && static_cast<int>(ball.size()) <= count) {
      out.elements = std::move(ball);
      out.exhaustive = true;
      return out;
    }
    std::shuffle(ball.begin(), ball.end(), rng);
    if (static_cast<int>(ball.size()) > count) ball.resize(count);
    bool has_id = false;
    for (const auto& g : ball) has_id = has_id || ctx.is_identity(g);
    if (!has_id) ball.insert(ball.begin(), id);
    out.elements = std::move(ball);
    return out;
  }

  // heisenberg: box search around the identity under the supplied metric
  if (ctx.kind == GroupKind::heisenberg) {
    std::vector<Element> ball;
    std::int64_t reach = 1;
    for (const char axis : {0, 1, 2}) {
      Residues r{{0, 0, 0}};
      r.v[axis] = 1;
      reach = std::max(reach, axis_reach(ctx, d, Element{r}, id, radius, 1 << 16));
    }
    reach = std::min<std::int64_t>(reach, 64);
    for (std::int64_t x = -reach; x <= reach; ++x) {
      for (std::int64_t y = -reach; y <= reach; ++y) {
        for (std::int64_t z = -reach * reach; z <= reach * reach; ++z) {
          Element g{Residues{{x, y, z}}};
          if (d(g, id) <= radius) ball.push_back(std::move(g));
          if (ball.size() > static_cast<std::size_t>(4 * count) + (1 << 16)) break;
        }
      }
    }
    out.below_resolution = ball.size() <= 1;
    if (static_cast<int>(ball.size()) <= count) {
      out.elements = std::move(ball);
      out.exhaustive = true;
    } else {
      std::shuffle(ball.begin(), ball.end(), rng);
      ball.resize(count);
      bool has_id = false;
      for (const auto& g : ball) has_id = has_id || ctx.is_identity(g);
      if (!has_id) ball[0] = id;
      out.elements = std::move(ball);
    }
    return out;
  }

  throw std::invalid_argument("sample_ball: unsupported kind " + kind_name(ctx.kind));
}

std::vector<Element> sample_elements(const Group& ctx, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Element> pool;
  pool.push_back(ctx.identity());
  if (ctx.finite()) {
    auto all = ctx.enumerate();
    std::shuffle(all.begin(), all.end(), rng);
    for (auto& g : all) {
      if (static_cast<int>(pool.size()) >= count) break;
      pool.push_back(std::move(g));
    }
    return pool;
  }
  if (ctx.matrix_kind()) {
    std::uniform_real_distribution<double> logscale(std::log(1e-6), std::log(1.5));
    while (static_cast<int>(pool.size()) < count) {
      pool.push_back(ctx.exp_tangent(ctx.random_tangent(rng) * std::exp(logscale(rng))));
    }
    return pool;
  }
  if (ctx.kind == GroupKind::integer_lattice) {
    std::uniform_int_distribution<int> mag(0, 10);
    while (static_cast<int>(pool.size()) < count) {
      Residues r{std::vector<std::int64_t>(ctx.dim, 0)};
      for (auto& x : r.v) {
        const std::int64_t span = std::int64_t(1) << mag(rng);
        std::uniform_int_distribution<std::int64_t> coord(-span, span);
        x = coord(rng);
      }
      pool.push_back(Element{std::move(r)});
    }
    return pool;
  }
  if (ctx.kind == GroupKind::free_group) {
    std::uniform_int_distribution<int> len(0, 12);
    std::uniform_int_distribution<int> letter(1, ctx.rank);
    std::uniform_int_distribution<int> coin(0, 1);
    while (static_cast<int>(pool.size()) < count) {
      Word w;
      const int l = len(rng);
      while (static_cast<int>(w.letters.size()) < l) {
        const std::int32_t cand = (coin(rng) ? 1 : -1) * letter(rng);
        if (!w.letters.empty() && w.letters.back() == -cand) continue;
        w.letters.push_back(cand);
      }
      pool.push_back(Element{std::move(w)});
    }
    return pool;
  }
  if (ctx.kind == GroupKind::heisenberg) {
    std::uniform_int_distribution<std::int64_t> xy(-20, 20), z(-400, 400);
    while (static_cast<int>(pool.size()) < count) {
      pool.push_back(Element{Residues{{xy(rng), xy(rng), z(rng)}}});
    }
    return pool;
  }
  throw std::invalid_argument("sample_elements: unsupported kind " + kind_name(ctx.kind));
}

}  // namespace minmet
