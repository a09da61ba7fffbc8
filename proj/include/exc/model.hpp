// Planar excitable-membrane model: cubic fast voltage dynamics driven by a
// sigmoidal recovery variable that enters the voltage equation quadratically.
//
//   V' = V - V^3/3 - n^2 + I_app
//   n' = eps * (n_inf(V - V0) + n0 - n)
//
// This header defines the parameter/state types, the vector field and its
// Jacobian, nullclines, the organizing-center constants, and the closed-form
// equilibrium branch graph I(V) that the continuation module exploits.
#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace exc {

// Critical current at which the left knee of the V-nullcline touches n = 0
// at V = -1 (the self-intersection of the two signed nullcline branches).
inline constexpr double i_star = 2.0 / 3.0;

struct Params {
  double epsilon;  // timescale ratio, > 0
  double i_app;    // applied current
  double v0;       // half-activation voltage of the recovery sigmoid
  double n0;       // recovery offset
};

struct State {
  double v;
  double n;
};

// 2x2 Jacobian, row-major: [[dvdot_dv, dvdot_dn], [dndot_dv, dndot_dn]].
struct Mat2 {
  double a, b, c, d;
  double trace() const { return a + d; }
  double det() const { return a * d - b * c; }
};

inline bool is_valid(const Params& p) {
  return std::isfinite(p.epsilon) && p.epsilon > 0.0 && std::isfinite(p.i_app) &&
         std::isfinite(p.v0) && std::isfinite(p.n0);
}

// Sigmoidal activation, range (0, 2), midpoint value 1 at x = 0.
inline double n_inf(double x) { return 2.0 / (1.0 + std::exp(-5.0 * x)); }

// d/dx n_inf = 5 * n_inf * (1 - n_inf/2); this form stays finite under
// saturation where the exp quotient would produce inf/inf.
inline double n_inf_prime(double x) {
  double s = n_inf(x);
  return 5.0 * s * (1.0 - 0.5 * s);
}

inline State vector_field(const Params& p, const State& s) {
  return {s.v - s.v * s.v * s.v / 3.0 - s.n * s.n + p.i_app,
          p.epsilon * (n_inf(s.v - p.v0) + p.n0 - s.n)};
}

inline Mat2 jacobian(const Params& p, const State& s) {
  return {1.0 - s.v * s.v, -2.0 * s.n, p.epsilon * n_inf_prime(s.v - p.v0),
          -p.epsilon};
}

// n-values of the V-nullcline at a voltage: {-sqrt(a), +sqrt(a)} when
// a = V - V^3/3 + I > 0, {0} at the pinch a = 0, empty when a < 0.
std::vector<double> v_nullcline(double v, double i_app);

inline double n_nullcline(const Params& p, double v) {
  return n_inf(v - p.v0) + p.n0;
}

enum class Interaction { competitive, cooperative, degenerate };

// Sign of the off-diagonal Jacobian product (dV'/dn)(dn'/dV) = -2n * eps * n_inf';
// determined by sign(n) alone since n_inf' > 0.
inline Interaction interaction_sign(const Params&, const State& s) {
  if (s.n > 0.0) return Interaction::competitive;
  if (s.n < 0.0) return Interaction::cooperative;
  return Interaction::degenerate;
}

// Recovery offset that places the n-nullcline through the pinch point (-1, 0).
inline double n0_star(double v0) { return -n_inf(-1.0 - v0); }

// Slope of the recovery sigmoid at the pinch voltage.
inline double k_slope(double v0) { return n_inf_prime(-1.0 - v0); }

// The unique v0 > -1 with k_slope(v0) = 1, located by bisection to 1e-12.
// Equals -1 + ln(4 + sqrt(15))/5; the bisection is the defining computation,
// the closed form is cross-checked in tests.
double v0_star();

// Offset of the n-nullcline from the pinch point: n0 + n_inf(-1 - V0).
// Vanishes exactly on the line n0 = n0_star(v0).
inline double delta0(const Params& p) { return p.n0 + n_inf(-1.0 - p.v0); }

struct OrganizingCenter {
  double i_star;       // 2/3 exactly
  State tc_point;      // (-1, 0)
  double v0_star;      // degenerate half-activation voltage
  double pitchfork_n0; // n0_star(v0_star)
};

OrganizingCenter organizing_center();

// Equilibrium branch graph: the equilibrium set is globally parameterized by V
// through I(V) = (n_inf(V - v0) + n0)^2 + V^3/3 - V.  Only v0, n0 of p are
// read; i_app is ignored.
inline double branch_current(const Params& p, double v) {
  double nn = n_inf(v - p.v0) + p.n0;
  return nn * nn + v * v * v / 3.0 - v;
}

// dI/dV along the branch graph: 2 N(V) n_inf'(V - v0) + V^2 - 1.
inline double branch_current_dv(const Params& p, double v) {
  double nn = n_inf(v - p.v0) + p.n0;
  return 2.0 * nn * n_inf_prime(v - p.v0) + v * v - 1.0;
}

}  // namespace exc
