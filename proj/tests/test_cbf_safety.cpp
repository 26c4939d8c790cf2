#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "modsafe/cbf_safety.hpp"
#include "testutil.hpp"

using namespace modsafe;

namespace {

ObstacleSpec default_obstacle() {
  ObstacleSpec obs;
  obs.center = (Vec(2) << -1.0, 1.0).finished();
  obs.radius = 0.5;
  obs.margin = 0.0;
  return obs;
}

HocbfChain default_chain() {
  return make_obstacle_chain(default_obstacle(), 1.0, 0.5, 1.0);
}

}  // namespace

TEST_CASE("linear class-kappa pair inverts itself") {
  const ClassKappaExt k = ClassKappaExt::linear(2.0);
  CHECK(k.fwd(3.0) == doctest::Approx(6.0));
  CHECK(k.inv(6.0) == doctest::Approx(3.0));
  CHECK(k.inv(k.fwd(-1.7)) == doctest::Approx(-1.7));
  CHECK_THROWS_AS((void)ClassKappaExt::linear(0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)ClassKappaExt::linear(-1.0), std::invalid_argument);
}

TEST_CASE("obstacle chain construction and validation") {
  const HocbfChain chain = default_chain();
  CHECK(chain.rel_degree() == 2);
  CHECK(chain.psi.size() == 2);
  CHECK(chain.eps_h == doctest::Approx(1.0));

  ObstacleSpec bad = default_obstacle();
  bad.radius = 0.0;
  CHECK_THROWS_AS((void)make_obstacle_chain(bad, 1.0, 0.5, 1.0),
                  std::invalid_argument);
  bad = default_obstacle();
  bad.center = Vec::Zero(3);
  CHECK_THROWS_AS((void)make_obstacle_chain(bad, 1.0, 0.5, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_obstacle_chain(default_obstacle(), 1.0, 0.5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_obstacle_chain(default_obstacle(), -1.0, 0.5, 1.0),
                  std::invalid_argument);
}

TEST_CASE("psi chain at the origin rest state") {
  const HocbfChain chain = default_chain();
  const std::vector<double> psis = psi_chain_eval(chain, Vec::Zero(4));
  REQUIRE(psis.size() == 2);
  CHECK(psis[0] == doctest::Approx(1.75));
  CHECK(psis[1] == doctest::Approx(1.75));
}

TEST_CASE("psi chain and Lie derivatives at a moving state") {
  const ParametricAffineSystem sys = make_double_integrator_drag();
  const HocbfChain chain = default_chain();
  Vec x(4);
  x << -0.3, 0.6, -0.5, 0.5;

  const std::vector<double> psis = psi_chain_eval(chain, x);
  CHECK(psis[0] == doctest::Approx(0.4));
  CHECK(psis[1] == doctest::Approx(-0.7));

  const PsiLieData lie = cbf_lie(chain, sys, x);
  CHECK(lie.Lf == doctest::Approx(-0.1));
  CHECK(lie.Lg(0) == doctest::Approx(1.4));
  CHECK(lie.Lg(1) == doctest::Approx(-0.8));
  const double s = std::sqrt(0.5);
  CHECK(lie.LF(0) == doctest::Approx(0.7 * s));
  CHECK(lie.LF(1) == doctest::Approx(0.4 * s));
  CHECK(lie.LF.squaredNorm() == doctest::Approx(0.325));

  Vec that(2);
  that << 0.8, 1.4;
  const HalfspaceConstraint con = cbf_constraint(chain, sys, x, that);
  CHECK(con.sense == Sense::GE);
  CHECK(con.a(0) == doctest::Approx(1.4));
  CHECK(con.a(1) == doctest::Approx(-0.8));
  CHECK(con.b == doctest::Approx(0.775 - 0.56 * std::sqrt(2.0)));
}

TEST_CASE("constraint at the rest state in front of the obstacle") {
  const ParametricAffineSystem sys = make_double_integrator_drag();
  const HocbfChain chain = default_chain();
  const HalfspaceConstraint con =
      cbf_constraint(chain, sys, Vec::Zero(4), Vec::Zero(2));
  CHECK(con.a(0) == doctest::Approx(2.0));
  CHECK(con.a(1) == doctest::Approx(-2.0));
  CHECK(con.b == doctest::Approx(-0.875));
}

TEST_CASE("filter clips a reference sliding along the boundary") {
  const ParametricAffineSystem sys = make_double_integrator_drag();
  const HocbfChain chain = default_chain();
  Vec x(4);
  x << -0.5, 1.0, 0.0, 1.0;
  Vec u_ref(2);
  u_ref << -3.0, 0.0;
  const Vec u = safety_filter(chain, sys, x, Vec::Zero(2), u_ref);
  CHECK(u(0) == doctest::Approx(-2.0));
  CHECK(u(1) == doctest::Approx(0.0));

  SUBCASE("a reference pushing away passes through") {
    Vec safe_ref(2);
    safe_ref << 1.0, 0.0;
    const Vec v = safety_filter(chain, sys, x, Vec::Zero(2), safe_ref);
    CHECK((v - safe_ref).norm() == 0.0);
  }
}

TEST_CASE("gamma recursion for the stock linear chain") {
  const HocbfChain chain = default_chain();

  SUBCASE("both depths are delta^2 / 2 at the stock gains") {
    const std::vector<double> g = gamma_recursion(chain.alphas, 1.0, 2.0);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(2.0));

    const std::vector<double> g0 = gamma_recursion(chain.alphas, 1.0, 0.0);
    CHECK(g0[0] == doctest::Approx(0.0));
    CHECK(g0[1] == doctest::Approx(0.0));
  }

  SUBCASE("matches the closed form for random linear gains") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const double l1 = testutil::uniform(rng, 0.1, 4.0);
      const double l2 = testutil::uniform(rng, 0.1, 4.0);
      const double eps = testutil::uniform(rng, 0.1, 30.0);
      const double delta = testutil::uniform(rng, 0.0, 3.0);
      const std::vector<ClassKappaExt> alphas = {ClassKappaExt::linear(l1),
                                                 ClassKappaExt::linear(l2)};
      const std::vector<double> g = gamma_recursion(alphas, eps, delta);
      const double g2 = eps * delta * delta / (4.0 * l2);
      const double g1 = g2 / l1;
      CHECK(g[1] == doctest::Approx(g2).epsilon(1e-12));
      CHECK(g[0] == doctest::Approx(g1).epsilon(1e-12));
    }
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS((void)gamma_recursion({}, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)gamma_recursion(chain.alphas, 0.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gamma_recursion(chain.alphas, 1.0, -1.0),
                    std::invalid_argument);
  }

  SUBCASE("inflated set spec wraps the same recursion") {
    const InflatedSetSpec spec = make_inflated_set_spec(chain.alphas, 1.0);
    REQUIRE(spec.gammas.size() == 2);
    for (const double delta : {0.0, 0.5, 1.0, 2.5}) {
      const std::vector<double> g = gamma_recursion(chain.alphas, 1.0, delta);
      CHECK(spec.gammas[0](delta) == doctest::Approx(g[0]));
      CHECK(spec.gammas[1](delta) == doctest::Approx(g[1]));
    }
  }
}

TEST_CASE("inflated membership grows with the error level") {
  const HocbfChain chain = default_chain();

  Vec unsafe(4);
  unsafe << -0.6, 1.0, 0.0, 0.0;  // inside the disk: h = 0.16 - 0.25

  const MembershipResult at_zero = inflated_membership(chain, unsafe, 0.0);
  CHECK_FALSE(at_zero.member);
  REQUIRE(at_zero.margins.size() == 2);
  CHECK(at_zero.margins[0] == doctest::Approx(-0.09));
  CHECK(at_zero.margins[1] == doctest::Approx(-0.09));

  const MembershipResult at_one = inflated_membership(chain, unsafe, 1.0);
  CHECK(at_one.member);
  CHECK(at_one.margins[0] == doctest::Approx(0.41));
  CHECK(at_one.margins[1] == doctest::Approx(0.41));

  const MembershipResult safe = inflated_membership(chain, Vec::Zero(4), 0.0);
  CHECK(safe.member);
  CHECK(safe.margins[0] == doctest::Approx(1.75));
}
