#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <Eigen/SVD>

#include "minmet/group.hpp"
#include "minmet/numeric.hpp"

using namespace minmet;

namespace {

Matrix rotation2(double theta) {
  Matrix m(2, 2);
  m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return m;
}

Element lattice_point(std::vector<std::int64_t> v) { return Element{Residues{std::move(v)}}; }

// Independent dense route for the largest singular value.
double svd_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace

// ---------------------- group axioms across kinds ----------------------

TEST_CASE("group law, inverses and identity hold on every kind") {
  std::mt19937_64 rng(11);
  std::vector<Group> groups = {
      Group::unitary(2),
      Group::special_orthogonal(3),
      Group::general_linear(2),
      Group::heisenberg(3),
      Group::free_group(2),
      Group::integer_lattice(3),
      Group::finite_table(dihedral_table(8)),
      Group::finite_cyclic_tower(2, 10),
      Group::finite_product_of_involutions(6),
  };
  for (const Group& g : groups) {
    CAPTURE(g.describe());
    std::vector<Element> pool = sample_elements(g, 12, 5);
    REQUIRE(pool.size() > 1);
    const Element id = g.identity();
    CHECK(g.is_identity(id));
    for (const Element& a : pool) {
      g.validate(a);
      CHECK(g.equal(g.multiply(a, id), a));
      CHECK(g.equal(g.multiply(id, a), a));
      CHECK(g.is_identity(g.multiply(a, g.inverse(a))));
      CHECK(g.is_identity(g.multiply(g.inverse(a), a)));
    }
    // associativity on sampled triples
    for (std::size_t i = 0; i + 2 < pool.size(); ++i) {
      const Element& a = pool[i];
      const Element& b = pool[i + 1];
      const Element& c = pool[i + 2];
      CHECK(g.equal(g.multiply(g.multiply(a, b), c), g.multiply(a, g.multiply(b, c))));
    }
  }
  (void)rng;
}

TEST_CASE("power matches repeated multiplication, including negative exponents") {
  std::vector<Group> groups = {
      Group::unitary(3),
      Group::integer_lattice(2),
      Group::heisenberg(3),
      Group::free_group(2),
      Group::finite_cyclic_tower(3, 4),
  };
  for (const Group& g : groups) {
    CAPTURE(g.describe());
    std::vector<Element> pool = sample_elements(g, 6, 21);
    for (const Element& a : pool) {
      Element acc = g.identity();
      for (int m = 0; m <= 9; ++m) {
        CHECK(g.equal(g.power(a, m), acc));
        CHECK(g.equal(g.power(a, -m), g.inverse(acc)));
        acc = g.multiply(acc, a);
      }
    }
  }
}

TEST_CASE("matrix products stay on the manifold over long words") {
  std::mt19937_64 rng(3);
  for (Group g : {Group::unitary(2), Group::special_orthogonal(3)}) {
    CAPTURE(g.describe());
    Element x = g.exp_tangent(Matrix(g.random_tangent(rng) * 0.3));
    Element p = g.identity();
    for (int i = 0; i < 10000; ++i) p = g.multiply(p, x);
    CHECK(unitarity_drift(p.matrix()) < 1e-9);
    if (g.kind == GroupKind::special_orthogonal) {
      CHECK(p.matrix().imag().cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

// ---------------------- concrete laws of the discrete kinds ----------------------

TEST_CASE("integer lattice is plain coordinatewise addition") {
  Group g = Group::integer_lattice(3);
  Element a = lattice_point({5, -2, 7});
  Element b = lattice_point({-1, 4, 0});
  CHECK(g.multiply(a, b).residues().v == std::vector<std::int64_t>{4, 2, 7});
  CHECK(g.inverse(a).residues().v == std::vector<std::int64_t>{-5, 2, -7});
  CHECK(g.power(a, 3).residues().v == std::vector<std::int64_t>{15, -6, 21});
}

TEST_CASE("heisenberg multiplication carries the shear term and is non-abelian") {
  Group g = Group::heisenberg(3);
  Element x{Residues{{1, 0, 0}}};
  Element y{Residues{{0, 1, 0}}};
  CHECK(g.multiply(x, y).residues().v == std::vector<std::int64_t>{1, 1, 1});
  CHECK(g.multiply(y, x).residues().v == std::vector<std::int64_t>{1, 1, 0});
  // the commutator is the central generator
  Element comm = g.multiply(g.multiply(x, y), g.inverse(g.multiply(y, x)));
  CHECK(comm.residues().v == std::vector<std::int64_t>{0, 0, 1});
  Element z{Residues{{0, 0, 1}}};
  for (const Element& w : {x, y}) {
    CHECK(g.equal(g.multiply(z, w), g.multiply(w, z)));
  }
}

TEST_CASE("free group reduces words and cancels inverse letters") {
  Group g = Group::free_group(2);
  Element a{Word{{1}}};
  Element b{Word{{2}}};
  Element ab = g.multiply(a, b);
  CHECK(ab.word() == Word{{1, 2}});
  CHECK(g.is_identity(g.multiply(ab, g.inverse(ab))));
  // a b b^-1 reduces to a
  CHECK(g.multiply(ab, g.inverse(b)).word() == a.word());
  Element conj = g.multiply(g.multiply(a, b), g.inverse(a));
  CHECK(conj.word() == Word{{1, 2, -1}});
}

TEST_CASE("dihedral table satisfies the defining relations") {
  Group g = Group::finite_table(dihedral_table(8));
  // convention: indices 0..7 are rotations r^i, 8..15 reflections s r^i
  Element r{TableIndex{1}};
  Element s{TableIndex{8}};
  CHECK(g.is_identity(g.power(r, 8)));
  CHECK_FALSE(g.is_identity(g.power(r, 4)));
  CHECK(g.is_identity(g.multiply(s, s)));
  CHECK(g.equal(g.multiply(g.multiply(s, r), s), g.inverse(r)));
}

TEST_CASE("cyclic and symmetric tables are groups of the right size and symmetry") {
  CHECK(Group::finite_table(cyclic_table(12)).order() == 12);
  Group s3 = Group::finite_table(symmetric3_table());
  CHECK(s3.order() == 6);
  bool abelian = true;
  auto all = s3.enumerate();
  for (const Element& a : all)
    for (const Element& b : all) abelian = abelian && s3.equal(s3.multiply(a, b), s3.multiply(b, a));
  CHECK_FALSE(abelian);
}

TEST_CASE("cyclic tower arithmetic is arithmetic mod p^depth") {
  Group g = Group::finite_cyclic_tower(2, 10);
  CHECK(g.order() == 1024);
  Element one{Residues{{1}}};
  CHECK(g.equal(g.power(one, 1024), g.identity()));
  CHECK(g.power(one, 1023).residues().v == std::vector<std::int64_t>{1023});
  CHECK(g.multiply(Element{Residues{{1000}}}, Element{Residues{{100}}}).residues().v ==
        std::vector<std::int64_t>{76});

  SUBCASE("filtration level is the p-adic valuation capped at depth") {
    CHECK(g.filtration_level(one) == 0);
    CHECK(g.filtration_level(Element{Residues{{4}}}) == 2);
    CHECK(g.filtration_level(Element{Residues{{512}}}) == 9);
    CHECK(g.filtration_level(g.identity()) == 10);
  }
}

TEST_CASE("product of involutions squares to the identity coordinatewise") {
  Group g = Group::finite_product_of_involutions(10);
  CHECK(g.order() == 1024);
  Element a{Residues{{1, 0, 1, 0, 0, 0, 0, 0, 0, 1}}};
  CHECK(g.is_identity(g.multiply(a, a)));
  CHECK(g.equal(g.inverse(a), a));
  CHECK(g.filtration_level(a) == 0);
  CHECK(g.filtration_level(Element{Residues{{0, 0, 1, 0, 0, 0, 0, 0, 0, 1}}}) == 2);
  CHECK(g.filtration_level(g.identity()) == 10);
}

// ---------------------- validation and payload hygiene ----------------------

TEST_CASE("validate rejects malformed payloads") {
  CHECK_THROWS_AS(Group::unitary(2).validate(Element{Matrix(Matrix::Identity(3, 3))}),
                  std::invalid_argument);
  Matrix not_unitary = Matrix::Identity(2, 2) * 2.0;
  CHECK_THROWS_AS(Group::unitary(2).validate(Element{not_unitary}), std::invalid_argument);
  CHECK_THROWS_AS(Group::integer_lattice(3).validate(lattice_point({1, 2})), std::invalid_argument);
  CHECK_THROWS_AS(Group::finite_cyclic_tower(2, 4).validate(Element{Residues{{16}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Group::finite_table(cyclic_table(5)).validate(Element{TableIndex{9}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Group::free_group(2).validate(Element{Word{{3}}}), std::invalid_argument);
  // unreduced words are invalid representations
  CHECK_THROWS_AS(Group::free_group(2).validate(Element{Word{{1, -1}}}), std::invalid_argument);
  // singular matrices are not GL elements
  Matrix zero = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(Group::general_linear(2).validate(Element{zero}), std::invalid_argument);
}

TEST_CASE("canonical keys separate discrete elements and reject matrices") {
  Group g = Group::free_group(2);
  std::set<std::string> keys;
  for (const Element& e : sample_elements(g, 40, 9)) keys.insert(g.key(e));
  CHECK(keys.size() > 10);  // sampling yields mostly distinct words
  CHECK(g.key(Element{Word{{1, 2}}}) != g.key(Element{Word{{2, 1}}}));
  CHECK_THROWS_AS(Group::unitary(2).key(Group::unitary(2).identity()), std::invalid_argument);
}

TEST_CASE("enumerate is exact for finite kinds and refuses infinite ones") {
  CHECK(Group::finite_table(dihedral_table(8)).enumerate().size() == 16);
  CHECK(Group::finite_cyclic_tower(2, 10).enumerate().size() == 1024);
  CHECK(Group::finite_product_of_involutions(8).enumerate().size() == 256);
  CHECK_THROWS_AS(Group::integer_lattice(1).enumerate(), std::invalid_argument);
  CHECK_THROWS_AS(Group::finite_cyclic_tower(2, 20).enumerate(1 << 10), std::invalid_argument);
}

TEST_CASE("base distance vanishes exactly at the identity and only there") {
  for (const Group& g : {Group::unitary(2), Group::integer_lattice(2), Group::free_group(2),
                         Group::finite_cyclic_tower(2, 6)}) {
    CAPTURE(g.describe());
    CHECK(g.base_distance(g.identity()) == 0.0);
    for (const Element& e : sample_elements(g, 10, 31)) {
      if (!g.is_identity(e)) CHECK(g.base_distance(e) > 0.0);
    }
  }
}

// ---------------------- tangent spaces and the exponential ----------------------

TEST_CASE("random tangents have the right structure for each matrix kind") {
  std::mt19937_64 rng(77);

  SUBCASE("unitary: skew-Hermitian, unit operator norm") {
    Group g = Group::unitary(3);
    Matrix a = g.random_tangent(rng);
    CHECK((a + a.adjoint()).norm() < 1e-12);
    CHECK(operator_norm(a) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("special orthogonal: real skew-symmetric") {
    Group g = Group::special_orthogonal(3);
    Matrix a = g.random_tangent(rng);
    CHECK(a.imag().norm() < 1e-12);
    CHECK((a + a.transpose()).norm() < 1e-12);
  }
  SUBCASE("diagonal torus: diagonal skew-Hermitian") {
    Group g = Group::unitary_diagonal(3);
    Matrix a = g.random_tangent(rng);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(std::abs(a(i, j)) == 0.0);
    CHECK((a + a.adjoint()).norm() < 1e-12);
  }
  SUBCASE("identical seeds reproduce the same direction") {
    Group g = Group::unitary(2);
    std::mt19937_64 r1(5), r2(5);
    CHECK((g.random_tangent(r1) - g.random_tangent(r2)).norm() == 0.0);
  }
}

TEST_CASE("exp of a planar rotation generator matches the closed form") {
  Group g = Group::special_orthogonal(2);
  for (double theta : {0.1, 0.5, 1.0, 2.5}) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = -theta;
    a(1, 0) = theta;
    Element e = g.exp_tangent(a);
    CHECK((e.matrix() - rotation2(theta)).norm() < 1e-12);
  }
}

TEST_CASE("exp_skew_hermitian agrees with scalar phases on diagonal input") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = Complex(0, 0.7);
  a(1, 1) = Complex(0, -1.3);
  Matrix e = exp_skew_hermitian(a);
  CHECK(std::abs(e(0, 0) - std::exp(Complex(0, 0.7))) < 1e-13);
  CHECK(std::abs(e(1, 1) - std::exp(Complex(0, -1.3))) < 1e-13);
  CHECK(std::abs(e(0, 1)) + std::abs(e(1, 0)) < 1e-13);
}

TEST_CASE("exp_tangent lands on the manifold for every matrix kind") {
  std::mt19937_64 rng(13);
  for (Group g : {Group::unitary(3), Group::special_orthogonal(3), Group::unitary_diagonal(2)}) {
    CAPTURE(g.describe());
    for (int i = 0; i < 5; ++i) {
      Element e = g.exp_tangent(Matrix(g.random_tangent(rng) * 0.8));
      g.validate(e);
      CHECK(unitarity_drift(e.matrix()) < 1e-12);
    }
  }
}

// ---------------------- numeric kernels against dense oracles ----------------------

TEST_CASE("operator norm agrees with the dense SVD oracle") {
  std::mt19937_64 rng(2);
  double worst = 0;
  double worst_rel = 0;

  // generic random matrices; absolute agreement on the O(1) scales the
  // metrics produce, relative agreement across the whole scale sweep
  for (int rep = 0; rep < 120; ++rep) {
    const int n = 1 + rep % 5;
    Matrix m = Matrix::Random(n, n) * std::pow(10.0, (rep % 13) - 6);
    const double a = operator_norm(m);
    const double b = svd_norm(m);
    if (b <= 8.0) worst = std::max(worst, std::abs(a - b));
    worst_rel = std::max(worst_rel, std::abs(a - b) / std::max(b, 1e-300));
  }
  CHECK(worst_rel < 1e-11);
  // displacement matrices g - Id along power orbits, where the top singular
  // pair is (near-)degenerate
  for (Group g : {Group::unitary(2), Group::special_orthogonal(3)}) {
    Element x = g.exp_tangent(Matrix(g.random_tangent(rng) * 0.4));
    Element p = g.identity();
    for (int i = 0; i < 200; ++i) {
      p = g.multiply(p, x);
      Matrix m = p.matrix() - Matrix::Identity(p.matrix().rows(), p.matrix().cols());
      worst = std::max(worst, std::abs(operator_norm(m) - svd_norm(m)));
    }
  }
  CHECK(worst < 1e-10);

  SUBCASE("deterministic for a fixed seed") {
    Matrix m = Matrix::Random(4, 4);
    CHECK(operator_norm_power_iteration(m) == operator_norm_power_iteration(m));
  }
  SUBCASE("exact edge cases") {
    CHECK(operator_norm(Matrix::Zero(3, 3)) == 0.0);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -5.0;
    CHECK(operator_norm(d) == doctest::Approx(5.0).epsilon(1e-12));
  }
}

TEST_CASE("principal sqrt squares back to the argument") {
  SUBCASE("rotation halves its angle") {
    Matrix s = principal_sqrt(rotation2(1.2));
    CHECK((s - rotation2(0.6)).norm() < 1e-11);
  }
  SUBCASE("random well-conditioned matrices") {
    std::mt19937_64 rng(4);
    Group g = Group::unitary(3);
    for (int i = 0; i < 10; ++i) {
      Matrix u = g.exp_tangent(Matrix(g.random_tangent(rng) * 1.2)).matrix();
      Matrix s = principal_sqrt(u);
      CHECK((s * s - u).norm() < 1e-10);
    }
  }
  SUBCASE("spectrum on the negative axis is rejected") {
    Matrix m = -Matrix::Identity(2, 2);
    CHECK_THROWS_AS(principal_sqrt(m), NonConvergence);
  }
}

TEST_CASE("polar projection recovers a nearby unitary") {
  std::mt19937_64 rng(6);
  Group g = Group::unitary(3);
  Matrix u = g.exp_tangent(Matrix(g.random_tangent(rng))).matrix();
  Matrix noisy = u + Matrix::Random(3, 3) * 1e-8;
  Matrix back = project_unitary(noisy);
  CHECK(unitarity_drift(back) < 1e-13);
  CHECK((back - u).norm() < 1e-7);
}

// ---------------------- samplers ----------------------

TEST_CASE("sample_ball respects the radius and flags resolution limits") {
  SUBCASE("lattice ball under the native word metric") {
    Group g = Group::integer_lattice(2);
    DistanceFn d = [&g](const Element& a, const Element& b) {
      const auto& x = a.residues().v;
      const auto& y = b.residues().v;
      return double(std::llabs(x[0] - y[0]) + std::llabs(x[1] - y[1]));
    };
    BallSample bs = sample_ball(g, d, 2.0, 64, 1);
    CHECK(bs.exhaustive);
    CHECK(bs.elements.size() == 13);  // |{|x|+|y| <= 2}|
    for (const Element& e : bs.elements) CHECK(d(e, g.identity()) <= 2.0);

    BallSample tiny = sample_ball(g, d, 0.5, 8, 1);
    CHECK(tiny.below_resolution);
    CHECK(tiny.elements.size() == 1);
  }
  SUBCASE("matrix ball sticks inside the radius") {
    Group g = Group::unitary(2);
    DistanceFn d = [](const Element& a, const Element& b) {
      return operator_norm(Matrix(b.matrix().adjoint() * a.matrix() -
                                  Matrix::Identity(2, 2)));
    };
    BallSample bs = sample_ball(g, d, 0.3, 40, 7);
    CHECK(bs.elements.size() > 10);
    for (const Element& e : bs.elements) CHECK(d(e, g.identity()) <= 0.3 + 1e-12);
    CHECK_FALSE(bs.exhaustive);
  }
  SUBCASE("finite kinds enumerate small balls exhaustively") {
    Group g = Group::finite_cyclic_tower(2, 6);
    DistanceFn d = [&g](const Element& a, const Element& b) {
      Element q = g.multiply(g.inverse(b), a);
      return g.is_identity(q) ? 0.0 : std::exp2(-g.filtration_level(q));
    };
    BallSample bs = sample_ball(g, d, 0.25, 1 << 10, 1);
    CHECK(bs.exhaustive);
    // elements with valuation >= 2: the subgroup 4 Z / 64 Z
    CHECK(bs.elements.size() == 16);
  }
  SUBCASE("deterministic across calls") {
    Group g = Group::unitary(2);
    DistanceFn d = [](const Element& a, const Element& b) {
      return operator_norm(Matrix(b.matrix().adjoint() * a.matrix() -
                                  Matrix::Identity(2, 2)));
    };
    BallSample b1 = sample_ball(g, d, 0.4, 16, 3);
    BallSample b2 = sample_ball(g, d, 0.4, 16, 3);
    REQUIRE(b1.elements.size() == b2.elements.size());
    for (std::size_t i = 0; i < b1.elements.size(); ++i) {
      CHECK(g.equal(b1.elements[i], b2.elements[i], 0.0));
    }
  }
}

TEST_CASE("sample_elements returns valid, deterministic pools starting at the identity") {
  for (const Group& g : {Group::unitary(2), Group::heisenberg(3), Group::free_group(2),
                         Group::integer_lattice(2), Group::finite_table(symmetric3_table())}) {
    CAPTURE(g.describe());
    std::vector<Element> p1 = sample_elements(g, 16, 42);
    std::vector<Element> p2 = sample_elements(g, 16, 42);
    REQUIRE(p1.size() == p2.size());
    CHECK(g.is_identity(p1.front()));
    for (std::size_t i = 0; i < p1.size(); ++i) {
      g.validate(p1[i]);
      CHECK(g.equal(p1[i], p2[i], 0.0));
    }
  }
}
