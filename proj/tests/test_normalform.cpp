#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "exc/model.hpp"
#include "exc/normalform.hpp"

using namespace exc;

TEST_CASE("coordinate change is an exact conjugacy") {
  // v-dot expressed in shifted coordinates must reproduce the raw field
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> uv(-2.5, 2.0), un(-2.0, 2.0),
      uv0(-1.8, 0.2), un0(-2.0, 1.0), ui(-0.5, 2.0), ue(0.005, 0.1);
  for (int trial = 0; trial < 400; ++trial) {
    Params p{ue(rng), ui(rng), uv0(rng), un0(rng)};
    State s{uv(rng), un(rng)};
    NormalCoords c = to_normal(p, s);
    double lhs = v_dot_normal(p, c);
    double rhs = vector_field(p, s).v;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("round trip through shifted coordinates") {
  std::mt19937 rng(456);
  std::uniform_real_distribution<double> uv(-3.0, 3.0), un(-2.0, 2.0);
  Params p{0.02, 0.5, -0.3, -0.1586};
  for (int trial = 0; trial < 100; ++trial) {
    State s{uv(rng), un(rng)};
    State back = from_normal(p, to_normal(p, s));
    CHECK(back.v == doctest::Approx(s.v).epsilon(1e-13));
    CHECK(back.n == doctest::Approx(s.n).epsilon(1e-13));
  }
}

TEST_CASE("shifted origin sits at the tangency point") {
  Params p{0.02, 2.0 / 3.0, -0.3, -0.1586};
  NormalCoords c = to_normal(p, {-1.0, delta0(p)});
  CHECK(c.v == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(c.w_tilde == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(c.u == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("center dynamics coefficients at a generic point") {
  Params p{0.02, 2.0 / 3.0, -0.3, -0.1586};
  DegeneracyReport r = degeneracy_report(p);
  double k = k_slope(p.v0);
  double d0 = delta0(p);
  CHECK(r.coeff_quadratic == doctest::Approx(2.0 * (1.0 - k * k)).epsilon(1e-14));
  CHECK(r.coeff_cross == doctest::Approx(2.0 * k).epsilon(1e-14));
  CHECK(r.pitchfork_extra == doctest::Approx(1.0 - k * k).epsilon(1e-14));
  CHECK(r.residual_value == doctest::Approx(-d0 * d0 + p.i_app - i_star).epsilon(1e-14));
  CHECK(r.residual_dv == doctest::Approx(-2.0 * k * d0).epsilon(1e-14));
  CHECK(r.residual_ddelta == doctest::Approx(-2.0 * d0).epsilon(1e-14));
}

TEST_CASE("center dynamics matches the conjugated field on the nullcline slice") {
  // restrict to w_tilde = k*v: the u coordinate collapses and the scalar
  // reduction must agree with v_dot_normal
  Params p{0.02, 0.7, -0.3, -0.1586};
  double k = k_slope(p.v0);
  for (double v : {-0.4, -0.1, 0.0, 0.2, 0.6}) {
    NormalCoords c{v, 0.0, k * v};
    CHECK(center_dynamics(p, v) == doctest::Approx(v_dot_normal(p, c)).epsilon(1e-12));
  }
}

TEST_CASE("full degeneracy at the codimension-three point") {
  OrganizingCenter oc = organizing_center();
  Params p{0.02, oc.i_star, oc.v0_star, oc.pitchfork_n0};
  DegeneracyReport r = degeneracy_report(p);
  CHECK(std::abs(r.residual_value) < 1e-12);
  CHECK(std::abs(r.residual_dv) < 1e-12);
  CHECK(std::abs(r.residual_ddelta) < 1e-12);
  CHECK(std::abs(r.coeff_quadratic) < 1e-12);
  CHECK(std::abs(r.pitchfork_extra) < 1e-12);
  CHECK(r.coeff_cross == doctest::Approx(2.0).epsilon(1e-12));

  // cubic-only center dynamics: odd, strictly decreasing through the origin
  CHECK(center_dynamics(p, 0.0) == doctest::Approx(0.0).epsilon(1e-13));
  for (double v : {0.05, 0.1, 0.2}) {
    double fp = center_dynamics(p, v), fm = center_dynamics(p, -v);
    CHECK(fp == doctest::Approx(-v * v * v / 3.0).epsilon(1e-9));
    CHECK(fp == doctest::Approx(-fm).epsilon(1e-9));
  }
}

TEST_CASE("residuals unfold one at a time") {
  OrganizingCenter oc = organizing_center();
  // current offset moves only the value residual
  Params p1{0.02, oc.i_star + 1e-3, oc.v0_star, oc.pitchfork_n0};
  DegeneracyReport r1 = degeneracy_report(p1);
  CHECK(r1.residual_value == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(std::abs(r1.residual_ddelta) < 1e-12);

  // n0 offset moves the delta residual linearly
  Params p2{0.02, oc.i_star, oc.v0_star, oc.pitchfork_n0 + 1e-3};
  DegeneracyReport r2 = degeneracy_report(p2);
  CHECK(r2.residual_ddelta == doctest::Approx(-2e-3).epsilon(1e-9));

  // v0 offset away from the slope-one point revives the quadratic term
  Params p3{0.02, oc.i_star, oc.v0_star + 0.05, n0_star(oc.v0_star + 0.05)};
  DegeneracyReport r3 = degeneracy_report(p3);
  CHECK(std::abs(r3.coeff_quadratic) > 1e-3);
  CHECK(std::abs(r3.residual_value) < 1e-12);
}
