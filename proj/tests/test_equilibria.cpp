#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "exc/equilibria.hpp"

using namespace exc;

namespace {

// brute-force reference: dense sign scan of the nullcline-graph residual,
// written against the raw formulas rather than the library helpers
std::vector<double> reference_roots(double eps, double i_app, double v0,
                                    double n0) {
  (void)eps;
  auto g = [&](double v) {
    double s = 2.0 / (1.0 + std::exp(-5.0 * (v - v0)));
    double n = s + n0;
    return v - v * v * v / 3.0 - n * n + i_app;
  };
  std::vector<double> out;
  const int grid = 30000;
  double prev = g(-4.0);
  for (int i = 1; i <= grid; ++i) {
    double v = -4.0 + 7.0 * i / grid;
    double cur = g(v);
    if (prev == 0.0) out.push_back(v - 7.0 / grid);
    if ((prev < 0.0) != (cur < 0.0)) {
      double lo = v - 7.0 / grid, hi = v, glo = prev;
      for (int k = 0; k < 100; ++k) {
        double mid = 0.5 * (lo + hi), gm = g(mid);
        if ((glo < 0.0) == (gm < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    prev = cur;
  }
  return out;
}

}  // namespace

TEST_CASE("tangency parameters pin a degenerate pinch equilibrium") {
  // delta0 = 0 puts the slow nullcline through the self-intersection; the
  // graph residual has a double root there plus three simple crossings
  Params p{0.05, 2.0 / 3.0, -1.0, -1.0};
  auto eqs = find_equilibria(p);
  REQUIRE(eqs.size() == 4);
  CHECK(eqs[0].state.v == doctest::Approx(-1.857975216407).epsilon(1e-7));
  CHECK(eqs[1].state.v == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(std::abs(eqs[1].state.n) < 1e-7);
  CHECK(eqs[1].kind == EqKind::degenerate);
  CHECK(eqs[1].branch == Branch::pinch);
  CHECK(eqs[2].state.v == doctest::Approx(0.341772289950).epsilon(1e-7));
  CHECK(eqs[3].state.v == doctest::Approx(1.532098309642).epsilon(1e-7));
}

TEST_CASE("three-equilibrium census on the cooperative side") {
  Params p{0.05, 2.0 / 3.0, -0.3, -0.1586};
  auto eqs = find_equilibria(p);
  REQUIRE(eqs.size() == 3);
  CHECK(eqs[0].state.v == doctest::Approx(-1.124106).epsilon(1e-4));
  CHECK(eqs[0].state.n == doctest::Approx(-0.126647).epsilon(1e-3));
  CHECK(eqs[0].kind == EqKind::stable_node);
  CHECK(eqs[0].branch == Branch::lower_left);
  CHECK(eqs[1].state.v == doctest::Approx(-0.924733).epsilon(1e-4));
  CHECK(eqs[1].kind == EqKind::saddle);
  CHECK(eqs[1].branch == Branch::lower_right);
  CHECK(eqs[2].state.v == doctest::Approx(-0.439992).epsilon(1e-4));
  CHECK(eqs[2].kind == EqKind::unstable_node);
  CHECK(eqs[2].branch == Branch::upper_middle);
  CHECK(eqs[0].interaction == Interaction::cooperative);
  CHECK(eqs[1].interaction == Interaction::cooperative);
  CHECK(eqs[2].interaction == Interaction::competitive);
}

TEST_CASE("monostable census") {
  auto eqs = find_equilibria({0.05, 2.0 / 3.0, -1.5, 0.5});
  REQUIRE(eqs.size() == 1);
  CHECK(eqs[0].state.v == doctest::Approx(-1.787150).epsilon(1e-4));
  CHECK(eqs[0].kind == EqKind::stable_node);
  CHECK(eqs[0].branch == Branch::upper_left);
}

TEST_CASE("mirrored up-state census") {
  auto eqs = find_equilibria({0.02, 2.0 / 3.0, -1.5, -1.8682});
  REQUIRE(eqs.size() == 3);
  CHECK(eqs[0].state.v == doctest::Approx(-2.512955).epsilon(1e-4));
  CHECK(eqs[2].state.v == doctest::Approx(1.994187).epsilon(1e-4));
  CHECK(eqs[2].branch == Branch::upper_right);
  bool up_stable = eqs[2].kind == EqKind::stable_node ||
                   eqs[2].kind == EqKind::stable_focus;
  CHECK(up_stable);
  CHECK(eqs[1].kind == EqKind::saddle);
}

TEST_CASE("agreement with a brute-force scan over random parameters") {
  std::mt19937 rng(20240812);
  std::uniform_real_distribution<double> uv0(-1.8, 0.2), un0(-2.0, 1.0),
      ui(-0.5, 2.0);
  for (int draw = 0; draw < 200; ++draw) {
    double eps = draw % 2 ? 0.02 : 0.05;
    Params p{eps, ui(rng), uv0(rng), un0(rng)};
    auto ref = reference_roots(eps, p.i_app, p.v0, p.n0);
    auto eqs = find_equilibria(p);
    REQUIRE(eqs.size() == ref.size());
    for (size_t i = 0; i < ref.size(); ++i)
      CHECK(eqs[i].state.v == doctest::Approx(ref[i]).epsilon(1e-6));
  }
}

TEST_CASE("census size at the organizing current is odd off tangencies") {
  // the residual is a proper function of V with equal signs at both scan
  // ends, so transversal censuses are odd; five occurs on a thin wedge
  // (e.g. v0 = -0.852, n0 = -0.956) in addition to the common one and three
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uv0(-2.0, 0.2), un0(-2.2, 0.8);
  for (int draw = 0; draw < 150; ++draw) {
    Params p{0.02, 2.0 / 3.0, uv0(rng), un0(rng)};
    auto eqs = find_equilibria(p);
    bool generic = eqs.size() % 2 == 1 && eqs.size() <= 5;
    bool boundary = false;
    for (const auto& e : eqs) boundary |= (e.kind == EqKind::degenerate);
    CHECK((generic || boundary));
  }
  auto five = find_equilibria({0.02, 2.0 / 3.0, -0.8519, -0.9560});
  CHECK(five.size() == 5);
}

TEST_CASE("eigenvalue and residual invariants") {
  std::mt19937 rng(7171);
  std::uniform_real_distribution<double> uv0(-1.8, 0.2), un0(-2.0, 1.0),
      ui(-0.5, 2.0);
  for (int draw = 0; draw < 80; ++draw) {
    Params p{draw % 2 ? 0.02 : 0.05, ui(rng), uv0(rng), un0(rng)};
    for (const auto& eq : find_equilibria(p)) {
      State f = vector_field(p, eq.state);
      CHECK(std::hypot(f.v, f.n) < 1e-10);
      Mat2 j = jacobian(p, eq.state);
      auto sum = eq.eigenvalues[0] + eq.eigenvalues[1];
      auto prod = eq.eigenvalues[0] * eq.eigenvalues[1];
      CHECK(sum.real() == doctest::Approx(j.trace()).epsilon(1e-10));
      CHECK(std::abs(sum.imag()) < 1e-12);
      CHECK(prod.real() == doctest::Approx(j.det()).epsilon(1e-10));
      CHECK(eq.eigenvalues[0].real() <= eq.eigenvalues[1].real());
      if (eq.kind == EqKind::saddle) {
        CHECK(j.det() < 0.0);
        CHECK(eq.eigenvalues[0].real() < 0.0);
        CHECK(eq.eigenvalues[1].real() > 0.0);
      }
      if (eq.branch == Branch::lower_left || eq.branch == Branch::lower_right) {
        CHECK(eq.state.n < 0.0);
        CHECK(eq.interaction == Interaction::cooperative);
      }
    }
  }
}

TEST_CASE("classification rejects non-equilibria") {
  Params p{0.02, 2.0 / 3.0, -0.3, -0.1586};
  CHECK_THROWS_AS(classify_equilibrium(p, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("eigenvectors satisfy the defining relation") {
  Params p{0.02, 0.67, -0.3, -0.1586};
  auto eqs = find_equilibria(p);
  REQUIRE(eqs.size() == 3);
  const Equilibrium& saddle = eqs[1];
  Mat2 j = jacobian(p, saddle.state);
  for (int side = 0; side < 2; ++side) {
    double lam = saddle.eigenvalues[side].real();
    State v = eigenvector(j, lam);
    CHECK(std::hypot(v.v, v.n) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j.a * v.v + j.b * v.n == doctest::Approx(lam * v.v).epsilon(1e-9));
    CHECK(j.c * v.v + j.d * v.n == doctest::Approx(lam * v.n).epsilon(1e-9));
    CHECK(v.v >= 0.0);
  }
}

TEST_CASE("manifold arcs around the connection current") {
  // near I ~ 0.66855 the saddle loop reorganizes: the unstable arc's return
  // lands left of the stable arc's crossing below the connection and right
  // of it above; both arcs reach the section only while it sits between the
  // saddle and n = 0, so rho = -0.05 here (the saddle sits near n = -0.078)
  constexpr double kConn = 0.668553416;
  auto cross_v = [](double i_app, ManifoldDirection dir, double offset,
                    int direction) -> std::pair<bool, std::pair<double, double>> {
    Params p{0.02, i_app, -0.3, -0.1586};
    auto eqs = find_equilibria(p);
    REQUIRE(eqs.size() == 3);
    IntegratorOptions o;
    o.t_end = 3000.0;
    o.rel_tol = 1e-10;
    o.abs_tol = 1e-12;
    o.section = Section{-0.05, -2.5, 0.5, direction, true};
    Trajectory tr = manifold_arc(p, {eqs[1], dir, offset}, o);
    if (tr.reason != StopReason::section_stop) return {false, {0.0, 0.0}};
    return {true, {tr.y.back().v, tr.t.back()}};
  };
  auto stable_cross = [&](double i_app) {
    auto a = cross_v(i_app, ManifoldDirection::stable_plus, 1e-6, 0);
    auto b = cross_v(i_app, ManifoldDirection::stable_minus, 1e-6, 0);
    REQUIRE((a.first || b.first));
    if (a.first && b.first)
      return a.second.second < b.second.second ? a.second.first
                                               : b.second.first;
    return a.first ? a.second.first : b.second.first;
  };

  double above = kConn + 1e-4;
  double below = kConn - 5e-3;
  auto u_above = cross_v(above, ManifoldDirection::unstable_plus, 1e-6, -1);
  auto u_below = cross_v(below, ManifoldDirection::unstable_plus, 1e-6, -1);
  REQUIRE(u_above.first);
  REQUIRE(u_below.first);
  CHECK(u_above.second.first > stable_cross(above));
  CHECK(u_below.second.first < stable_cross(below));
  CHECK(u_below.second.first == doctest::Approx(-1.068328).epsilon(1e-3));
  CHECK(stable_cross(below) == doctest::Approx(-0.922248).epsilon(1e-3));

  // at the connection itself the two crossings coincide almost exactly
  double arc_gap = cross_v(kConn, ManifoldDirection::unstable_plus, 1e-6, -1)
                       .second.first -
                   stable_cross(kConn);
  CHECK(std::abs(arc_gap) < 1e-6);

  // seed-offset insensitivity
  auto half = cross_v(above, ManifoldDirection::unstable_plus, 5e-7, -1);
  REQUIRE(half.first);
  CHECK(std::abs(half.second.first - u_above.second.first) < 1e-4);

  // below the connection the unstable arc ends on the stable node if left alone
  Params p{0.02, below, -0.3, -0.1586};
  auto eqs = find_equilibria(p);
  IntegratorOptions o;
  o.t_end = 4000.0;
  o.rel_tol = 1e-10;
  o.abs_tol = 1e-12;
  Trajectory tr = manifold_arc(p, {eqs[1], ManifoldDirection::unstable_plus, 1e-6}, o);
  REQUIRE(tr.reason == StopReason::converged);
  CHECK(tr.y.back().v == doctest::Approx(eqs[0].state.v).epsilon(1e-6));
  CHECK(tr.y.back().n == doctest::Approx(eqs[0].state.n).epsilon(1e-5));
}

TEST_CASE("manifold seed validation") {
  Params p{0.02, 2.0 / 3.0, -0.3, -0.1586};
  auto eqs = find_equilibria(p);
  REQUIRE(eqs.size() == 3);
  IntegratorOptions o;
  CHECK_THROWS_AS(manifold_arc(p, {eqs[0], ManifoldDirection::unstable_plus, 1e-6}, o),
                  std::invalid_argument);
  CHECK_THROWS_AS(manifold_arc(p, {eqs[1], ManifoldDirection::unstable_plus, 1e-2}, o),
                  std::invalid_argument);
  CHECK_THROWS_AS(manifold_arc(p, {eqs[1], ManifoldDirection::unstable_plus, 1e-9}, o),
                  std::invalid_argument);
}
