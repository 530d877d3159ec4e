#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "minmet/certifier.hpp"
#include "minmet/metric.hpp"

using namespace minmet;

namespace {

CertifyOptions small_budget() {
  CertifyOptions o;
  o.n_max = 256;
  o.dyadic_depth = 12;
  o.shells = 6;
  o.per_shell = 32;
  o.seed = 1;
  return o;
}

// --- independent circle-group oracle -----------------------------------
// On U(1) the metric of e^{i theta} is exactly 2 |sin(theta/2)|; every
// condition can be evaluated by brute force over a theta grid.

double circle_dist(double theta) { return 2.0 * std::abs(std::sin(theta / 2.0)); }

// Does some grid angle violate "powers inside the open U-ball up to n force
// d(g,1) <= 1/n"?
bool circle_cond2_violated(double u, int grid, std::int64_t n_cap) {
  for (int j = 1; j <= grid; ++j) {
    const double theta = 3.2 * j / grid;
    std::int64_t n = 0;
    while (n < n_cap && circle_dist(theta * double(n + 1)) < u) ++n;
    if (n >= 1 && circle_dist(theta) > 1.0 / double(n)) return true;
  }
  return false;
}

// Largest ratio n d(g,1) / d(g^n,1) over qualifying pairs (d <= eps/n).
double circle_cond3_required_k(double eps, int grid, std::int64_t n_cap) {
  double worst = 0;
  for (int j = 1; j <= grid; ++j) {
    const double theta = 0.6 * j / grid;
    const double d1 = circle_dist(theta);
    if (d1 <= 0) continue;
    for (std::int64_t n = 1; n <= n_cap; ++n) {
      if (d1 > eps / double(n)) break;
      const double dn = circle_dist(theta * double(n));
      if (dn > 0) worst = std::max(worst, double(n) * d1 / dn);
    }
  }
  return worst;
}

// Largest ratio 2^j d(g,1) / d(g^(2^j),1) over dyadic orbits inside the ball.
double circle_cond4_required_k(double u, int grid, int depth) {
  double worst = 0;
  for (int j = 1; j <= grid; ++j) {
    const double theta = 1.1 * j / grid;
    if (circle_dist(theta) >= u) continue;
    double pw = theta;
    for (int lev = 1; lev <= depth; ++lev) {
      pw *= 2;
      if (circle_dist(pw) >= u) break;
      const double dn = circle_dist(pw);
      if (dn > 0) worst = std::max(worst, std::exp2(lev) * circle_dist(theta) / dn);
    }
  }
  return worst;
}

Metric sqrt_line_metric() { return transform_sqrt(native_metric(Group::integer_lattice(1))); }

}  // namespace

// ---------------------- circle-group constants against the grid oracle ----------------------

TEST_CASE("circle group: ball certificate threshold sits at 2 sin(1/2)") {
  const double threshold = 2.0 * std::sin(0.5);  // 0.95885107720840601

  // oracle: the grid scan flips from clean to violated across the threshold
  CHECK_FALSE(circle_cond2_violated(threshold - 0.002, 20000, 2048));
  CHECK(circle_cond2_violated(threshold + 0.002, 20000, 2048));

  Group g = Group::unitary(1);
  Metric d = native_metric(g);
  SUBCASE("certifier agrees on the holding side") {
    Certificate cert = check_condition2(g, d, 0.9588, small_budget());
    CHECK(cert.verdict == Verdict::holds_on_budget);
    CHECK_FALSE(cert.witness.has_value());
    CHECK(cert.constants.at("u_radius") == 0.9588);
    CHECK(cert.samples_used > 0);
  }
  SUBCASE("certifier refutes a radius far beyond it, with a replayable witness") {
    Certificate cert = check_condition2(g, d, 1.2, small_budget());
    REQUIRE(cert.verdict == Verdict::refuted);
    REQUIRE(cert.witness.has_value());
    const Witness& w = *cert.witness;
    CHECK(w.lhs > w.rhs);
    CHECK(w.n >= 1);
    CHECK_FALSE(w.power_trace.empty());
    ReplayResult r = replay_witness(g, d, w);
    CHECK(r.ok);
    CHECK(r.max_deviation <= 1e-10);
  }
}

TEST_CASE("circle group: weak Gleason constant matches (eps/2)/sin(eps/2)") {
  const double eps = 0.5;
  const double k_true = (eps / 2.0) / std::sin(eps / 2.0);  // frozen value checked below
  CHECK(k_true == doctest::Approx(1.0104929).epsilon(1e-6));

  const double k_grid = circle_cond3_required_k(eps, 4000, 2048);
  CHECK(k_grid <= k_true + 1e-9);
  CHECK(k_grid >= k_true - 2e-4);

  Group g = Group::unitary(1);
  Metric d = native_metric(g);
  SUBCASE("holds above the constant") {
    Certificate cert = check_condition3(g, d, eps, 1.02, small_budget());
    CHECK(cert.verdict == Verdict::holds_on_budget);
    CHECK(cert.diagnostics.at("required_K") <= k_true + 1e-9);
  }
  SUBCASE("refuted at K = 1 because curvature compounds") {
    Certificate cert = check_condition3(g, d, eps, 1.0, small_budget());
    REQUIRE(cert.verdict == Verdict::refuted);
    REQUIRE(cert.witness.has_value());
    CHECK(replay_witness(g, d, *cert.witness).ok);
  }
  SUBCASE("fit pushes eps to the requested ceiling and reports the measured K there") {
    FitOptions fo;
    fo.check = small_budget();
    Certificate cert = fit_constants(g, d, "cond3", fo);
    CHECK(verdict_holds(cert.verdict));
    CHECK(cert.constants.at("eps") == fo.u_hi);
    // at eps the worst ratio is (eps/2)/sin(eps/2), here with eps = 1
    CHECK(cert.constants.at("K") == doctest::Approx(0.5 / std::sin(0.5)).epsilon(2e-3));
  }
}

TEST_CASE("circle group: dyadic doubling constant matches the arc/chord ratio") {
  const double u = 0.9588;
  // qualifying dyadic orbits top out near the ball edge, where the ratio is
  // x / sin(x) at x = asin(u/2)
  const double x = std::asin(u / 2.0);
  const double k_true = x / std::sin(x);
  CHECK(k_true == doctest::Approx(1.04279).epsilon(1e-4));

  const double k_grid = circle_cond4_required_k(u, 40000, 16);
  CHECK(k_grid <= k_true + 1e-9);
  CHECK(k_grid >= k_true - 2e-3);

  Group g = Group::unitary(1);
  Metric d = native_metric(g);
  SUBCASE("holds with headroom") {
    Certificate cert = check_condition4(g, d, u, 1.2, small_budget());
    CHECK(cert.verdict == Verdict::holds_on_budget);
    CHECK(cert.diagnostics.at("required_K") <= k_true + 1e-9);
  }
  SUBCASE("refuted below the measured requirement") {
    Certificate cert = check_condition4(g, d, u, 1.02, small_budget());
    REQUIRE(cert.verdict == Verdict::refuted);
    REQUIRE(cert.witness.has_value());
    CHECK(replay_witness(g, d, *cert.witness).ok);
  }
}

// ---------------------- flat models hold at the sharp constants ----------------------

TEST_CASE("scaled euclidean line satisfies all three conditions at the sharp constants") {
  Group z = Group::integer_lattice(1);
  Metric d = euclidean_metric(z, std::exp2(-20));
  CertifyOptions o = small_budget();

  Certificate c2 = check_condition2(z, d, 1.0, o);
  CHECK(c2.verdict == Verdict::holds_on_budget);

  Certificate c3 = check_condition3(z, d, 1.0, 1.0, o);
  CHECK(c3.verdict == Verdict::holds_on_budget);
  CHECK(c3.diagnostics.at("required_K") == doctest::Approx(1.0).epsilon(1e-12));

  Certificate c4 = check_condition4(z, d, 1.0, 1.0, o);
  CHECK(c4.verdict == Verdict::holds_on_budget);
}

// ---------------------- square-root line refutations ----------------------

TEST_CASE("square-root line breaks the linear growth conditions with exact witnesses") {
  Group z = Group::integer_lattice(1);
  Metric d = sqrt_line_metric();
  CertifyOptions o = small_budget();

  SUBCASE("ball certificate fails: d(1) = 1 but many powers stay inside") {
    Certificate cert = check_condition2(z, d, 2.0, o);
    REQUIRE(cert.verdict == Verdict::refuted);
    // x = 1: powers k have d = sqrt(k) < 2 for k <= 3, so d(1) <= 1/3 must fail
    REQUIRE(cert.witness.has_value());
    CHECK(cert.witness->lhs > cert.witness->rhs);
    CHECK(replay_witness(z, d, *cert.witness).ok);
  }
  SUBCASE("weak Gleason fails: sqrt(n) growth beats any fixed K") {
    Certificate cert = check_condition3(z, d, 10.0, 2.0, o);
    REQUIRE(cert.verdict == Verdict::refuted);
    REQUIRE(cert.witness.has_value());
    const Witness& w = *cert.witness;
    // n d(x) / d(x^n) = sqrt(n), so the witness must sit beyond K^2
    CHECK(w.n >= 5);
    CHECK(replay_witness(z, d, *cert.witness).ok);
  }
  SUBCASE("dyadic doubling fails at every K below sqrt(2^depth)") {
    Certificate cert = check_condition4(z, d, 64.0, 8.0, o);
    REQUIRE(cert.verdict == Verdict::refuted);
    CHECK(replay_witness(z, d, *cert.witness).ok);
  }
}

// ---------------------- finite ultrametric families ----------------------

TEST_CASE("involution products refute the ball certificate and NSS at radius 1/4") {
  Group g = Group::finite_product_of_involutions(10);
  Metric d = native_metric(g);
  CertifyOptions o = small_budget();

  SUBCASE("every sampled element has an order-2 orbit trapped in the ball") {
    Certificate cert = check_condition2(g, d, 0.25, o);
    REQUIRE(cert.verdict == Verdict::refuted);
    CHECK(cert.exhaustive);  // 1024 elements scan exhaustively
    REQUIRE(cert.witness.has_value());
    // the whole cyclic orbit stays inside, which would force distance zero
    CHECK(cert.witness->rhs == 0.0);
    CHECK(cert.witness->lhs >= std::exp2(-9));
    CHECK(replay_witness(g, d, *cert.witness).ok);
  }
  SUBCASE("the ball contains whole subgroups") {
    Certificate cert = check_nss(g, d, 0.25, o);
    REQUIRE(cert.verdict == Verdict::refuted);
    REQUIRE(cert.witness.has_value());
    CHECK(replay_witness(g, d, *cert.witness).ok);
  }
  SUBCASE("growth corollary also fails: odd powers return to the element") {
    Certificate cert = check_growth_from_small_ball(g, d, 2, o);
    CHECK(cert.verdict == Verdict::refuted);
  }
}

TEST_CASE("cyclic tower: NSS depends on the radius; fit finds the resolution shelf") {
  Group g = Group::finite_cyclic_tower(2, 10);
  Metric d = native_metric(g);
  CertifyOptions o = small_budget();

  SUBCASE("below the deepest nontrivial subgroup the ball is clean") {
    Certificate cert = check_nss(g, d, 0.0004, o);
    CHECK(cert.verdict == Verdict::holds_exhaustively);
  }
  SUBCASE("at radius 1/4 the subgroup 4Z sits inside") {
    Certificate cert = check_nss(g, d, 0.25, o);
    REQUIRE(cert.verdict == Verdict::refuted);
    CHECK(replay_witness(g, d, *cert.witness).ok);
  }
  SUBCASE("uniform variant mirrors both sides") {
    CHECK(check_uniform_nss(g, d, 0.0004, o).verdict == Verdict::holds_exhaustively);
    CHECK(check_uniform_nss(g, d, 0.25, o).verdict == Verdict::refuted);
  }
  SUBCASE("fitted ball certificate radius is exactly one level above the floor") {
    FitOptions fo;
    fo.check = o;
    Certificate cert = fit_constants(g, d, "cond2", fo);
    CHECK(verdict_holds(cert.verdict));
    CHECK(cert.constants.at("u_radius") == std::exp2(-9));
  }
}

// ---------------------- side conditions ----------------------

TEST_CASE("bi-invariant metrics give a unit right-Lipschitz constant") {
  Group g = Group::unitary(2);
  Certificate cert = check_right_lipschitz(g, native_metric(g), 0.5, small_budget());
  CHECK(cert.verdict == Verdict::holds_on_budget);
  CHECK(cert.constants.at("K_hat") <= 1.0 + 1e-9);
  CHECK(cert.samples_used > 0);
}

TEST_CASE("local SIN modulus exists on compact groups and abelian towers") {
  CertifyOptions o = small_budget();
  SUBCASE("unitary group") {
    Group g = Group::unitary(2);
    Certificate cert = check_local_sin(g, native_metric(g), 0.5, o);
    CHECK(cert.verdict == Verdict::holds_on_budget);
    CHECK(cert.diagnostics.at("u_for_shell_0") > 0);
  }
  SUBCASE("abelian: conjugation is trivial, so the modulus is the identity") {
    Group g = Group::finite_cyclic_tower(2, 8);
    Certificate cert = check_local_sin(g, native_metric(g), 0.5, o);
    CHECK(cert.verdict == Verdict::holds_on_budget);
  }
}

TEST_CASE("growth corollary holds on the circle with its factor-4p bound") {
  Group g = Group::unitary(1);
  Certificate cert = check_growth_from_small_ball(g, native_metric(g), 2, small_budget());
  CHECK(cert.verdict == Verdict::holds_on_budget);
  CHECK(cert.constants.at("u_radius") == doctest::Approx(0.125));
  CHECK(cert.constants.at("bound") == 8.0);
}

// ---------------------- certificate plumbing ----------------------

TEST_CASE("certificates are deterministic for a fixed seed") {
  Group g = Group::unitary(2);
  Metric d = native_metric(g);
  CertifyOptions o = small_budget();
  Certificate a = check_condition2(g, d, 0.9588, o);
  Certificate b = check_condition2(g, d, 0.9588, o);
  CHECK(a.verdict == b.verdict);
  CHECK(a.samples_used == b.samples_used);
  CHECK(a.diagnostics.at("max_n_times_d") == b.diagnostics.at("max_n_times_d"));
  CHECK(a.seed == o.seed);
}

TEST_CASE("witness replay detects tampered traces") {
  Group z = Group::integer_lattice(1);
  Metric d = sqrt_line_metric();
  Certificate cert = check_condition3(z, d, 10.0, 2.0, small_budget());
  REQUIRE(cert.witness.has_value());
  Witness broken = *cert.witness;
  REQUIRE_FALSE(broken.power_trace.empty());
  broken.power_trace.front().distance += 0.5;
  CHECK_FALSE(replay_witness(z, d, broken).ok);
}
