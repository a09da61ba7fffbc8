// Affine conjugacy between the phase plane and the coordinates centered on the
// organizing point (-1, 0), plus the scalar center-manifold dynamics and the
// degeneracy residuals that locate the transcritical line and the pitchfork.
#pragma once

#include "exc/model.hpp"

namespace exc {

// v = V + 1, w_tilde = n - delta0, u = v - w_tilde / k(v0).  The triple is
// redundant (u is determined by v and w_tilde); keeping all three makes the
// center-space restriction {u = 0} explicit.
struct NormalCoords {
  double v;
  double u;
  double w_tilde;
};

struct DegeneracyReport {
  // First-order defining conditions evaluated at v = 0: the center value, its
  // v-derivative, and its delta0-derivative.
  double residual_value;
  double residual_dv;
  double residual_ddelta;
  // Second-order coefficients of the center dynamics.
  double coeff_quadratic;  // 2 (1 - k^2)
  double coeff_cross;      // 2 k
  double pitchfork_extra;  // 1 - k^2
};

NormalCoords to_normal(const Params& p, const State& s);
State from_normal(const Params& p, const NormalCoords& c);

// Fast-equation rate in normal coordinates:
//   v^2 (3 - v) / 3 - (k (v - u) + delta0)^2 + i_app - i_star.
// Algebraically identical to the V-equation of vector_field; the conjugacy is
// exact, not a truncation.
double v_dot_normal(const Params& p, const NormalCoords& c);

// Scalar dynamics on the center space {u = 0}:
//   (1 - k^2) v^2 - v^3/3 - 2 k v delta0 - delta0^2 + i_app - i_star.
double center_dynamics(const Params& p, double v);

// Closed-form residuals and coefficients; no differencing.
DegeneracyReport degeneracy_report(const Params& p);

}  // namespace exc
