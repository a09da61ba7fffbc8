#include "exc/normalform.hpp"

namespace exc {

NormalCoords to_normal(const Params& p, const State& s) {
  double v = s.v + 1.0;
  double w = s.n - delta0(p);
  return {v, v - w / k_slope(p.v0), w};
}

State from_normal(const Params& p, const NormalCoords& c) {
  return {c.v - 1.0, c.w_tilde + delta0(p)};
}

double v_dot_normal(const Params& p, const NormalCoords& c) {
  double k = k_slope(p.v0);
  double recov = k * (c.v - c.u) + delta0(p);
  return c.v * c.v * (3.0 - c.v) / 3.0 - recov * recov + p.i_app - i_star;
}

double center_dynamics(const Params& p, double v) {
  double k = k_slope(p.v0);
  double d = delta0(p);
  return (1.0 - k * k) * v * v - v * v * v / 3.0 - 2.0 * k * v * d - d * d +
         p.i_app - i_star;
}

DegeneracyReport degeneracy_report(const Params& p) {
  double k = k_slope(p.v0);
  double d = delta0(p);
  DegeneracyReport r;
  r.residual_value = -d * d + p.i_app - i_star;   // center_dynamics at v = 0
  r.residual_dv = -2.0 * k * d;                   // d/dv at v = 0
  r.residual_ddelta = -2.0 * d;                   // d/ddelta0 at v = 0
  r.coeff_quadratic = 2.0 * (1.0 - k * k);
  r.coeff_cross = 2.0 * k;
  r.pitchfork_extra = 1.0 - k * k;
  return r;
}

}  // namespace exc
