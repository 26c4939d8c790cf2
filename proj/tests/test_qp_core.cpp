#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modsafe/qp_core.hpp"
#include "testutil.hpp"

using namespace modsafe;

namespace {

HalfspaceConstraint le(const Vec& a, double b) {
  return HalfspaceConstraint{a, b, Sense::LE};
}

HalfspaceConstraint ge(const Vec& a, double b) {
  return HalfspaceConstraint{a, b, Sense::GE};
}

}  // namespace

TEST_CASE("min-norm control is zero when the constraint is slack at zero") {
  Vec a(2);
  a << 1.0, 1.0;
  CHECK(min_norm_halfspace(le(a, 0.0)).norm() == 0.0);
  CHECK(min_norm_halfspace(le(a, 3.0)).norm() == 0.0);
}

TEST_CASE("min-norm control lands on the active constraint") {
  Vec a(2);
  a << 1.0, 0.0;
  const Vec u = min_norm_halfspace(le(a, -1.0));
  CHECK(u(0) == doctest::Approx(-1.0));
  CHECK(u(1) == doctest::Approx(0.0));

  Vec a2(2);
  a2 << 3.0, 4.0;
  const Vec u2 = min_norm_halfspace(le(a2, -5.0));
  CHECK(u2(0) == doctest::Approx(-0.6));
  CHECK(u2(1) == doctest::Approx(-0.8));
  CHECK(a2.dot(u2) == doctest::Approx(-5.0));
}

TEST_CASE("min-norm rejects the wrong sense and handles zero rows") {
  Vec a(2);
  a << 1.0, 0.0;
  CHECK_THROWS_AS((void)min_norm_halfspace(ge(a, 0.0)), std::invalid_argument);

  const Vec zero = Vec::Zero(2);
  CHECK(min_norm_halfspace(le(zero, 0.0)).norm() == 0.0);
  CHECK(min_norm_halfspace(le(zero, 1.0)).norm() == 0.0);
  CHECK_THROWS_AS((void)min_norm_halfspace(le(zero, -1.0)), QpInfeasible);
}

TEST_CASE("projection returns feasible references unchanged") {
  Vec a(2), u_ref(2);
  a << 1.0, 0.0;
  u_ref << 1.0, 2.0;
  const Vec u = project_halfspace(u_ref, ge(a, 0.0));
  CHECK((u - u_ref).norm() == 0.0);
}

TEST_CASE("projection moves infeasible references onto the boundary") {
  Vec a(2), u_ref(2);
  a << 1.0, 0.0;
  u_ref << -3.0, 0.0;
  const Vec u = project_halfspace(u_ref, ge(a, -2.0));
  CHECK(u(0) == doctest::Approx(-2.0));
  CHECK(u(1) == doctest::Approx(0.0));
}

TEST_CASE("projection rejects the wrong sense, bad dims, zero rows") {
  Vec a(2), u_ref(2);
  a << 1.0, 0.0;
  u_ref << 0.0, 0.0;
  CHECK_THROWS_AS((void)project_halfspace(u_ref, le(a, 0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)project_halfspace(Vec::Zero(3), ge(a, 0.0)),
                  std::invalid_argument);

  const Vec zero = Vec::Zero(2);
  Vec any(2);
  any << 5.0, -7.0;
  CHECK((project_halfspace(any, ge(zero, 0.0)) - any).norm() == 0.0);
  CHECK((project_halfspace(any, ge(zero, -1.0)) - any).norm() == 0.0);
  CHECK_THROWS_AS((void)project_halfspace(any, ge(zero, 1.0)), QpInfeasible);
}

TEST_CASE("random instances agree with a projected-gradient oracle") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 4);
    Vec a = testutil::random_vec(rng, dim, -2.0, 2.0);
    if (a.norm() < 0.1) a(0) = 1.0;
    const double b = testutil::uniform(rng, -2.0, 2.0);

    const Vec u = min_norm_halfspace(le(a, b));
    const Vec u_oracle = testutil::pgd_qp(Vec::Zero(dim), a, b, false);
    CHECK((u - u_oracle).norm() <= 1e-6);
    CHECK(a.dot(u) <= b + 1e-10);

    const Vec u_ref = testutil::random_vec(rng, dim, -3.0, 3.0);
    const Vec v = project_halfspace(u_ref, ge(a, b));
    const Vec v_oracle = testutil::pgd_qp(u_ref, a, b, true);
    CHECK((v - v_oracle).norm() <= 1e-6);
    CHECK(a.dot(v) >= b - 1e-10);
  }
}
