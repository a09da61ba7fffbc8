// Dormand-Prince 5(4) stepper with FSAL, PI-free classic step control, and
// the order-4 dense-output interpolant.  Planar state only; the right-hand
// side is a callable State(double t, State y).
#pragma once

#include <algorithm>
#include <cmath>

#include "exc/model.hpp"

namespace exc::detail {

struct StepControl {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.1;
  double first_step = 1e-3;
};

template <class Rhs>
class Dopri5 {
 public:
  Dopri5(Rhs rhs, double t0, State y0, StepControl ctl)
      : rhs_(rhs), ctl_(ctl), t_(t0), y_(y0) {
    k1_ = rhs_(t_, y_);
    h_ = std::min(ctl_.first_step, ctl_.max_step);
  }

  double t() const { return t_; }
  const State& y() const { return y_; }
  const State& f() const { return k1_; }         // derivative at (t, y)
  double t_prev() const { return tp_; }
  const State& y_prev() const { return yp_; }

  // Advances one accepted step, not crossing t_limit.  Returns false when the
  // step size underflows (stiffness failure).
  bool step(double t_limit) {
    bool rejected = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      double h = std::min(h_, t_limit - t_);
      if (h <= 0.0) h = t_limit - t_;
      if (h < 1e-14 * std::max(1.0, std::abs(t_))) return false;

      State k2, k3, k4, k5, k6, k7, y5;
      double t0 = t_;
      const State& y0 = y_;

      auto at = [&](double cv, double cn) { return State{y0.v + h * cv, y0.n + h * cn}; };

      k2 = rhs_(t0 + h * (1.0 / 5.0), at(a21 * k1_.v, a21 * k1_.n));
      k3 = rhs_(t0 + h * (3.0 / 10.0),
                at(a31 * k1_.v + a32 * k2.v, a31 * k1_.n + a32 * k2.n));
      k4 = rhs_(t0 + h * (4.0 / 5.0),
                at(a41 * k1_.v + a42 * k2.v + a43 * k3.v,
                   a41 * k1_.n + a42 * k2.n + a43 * k3.n));
      k5 = rhs_(t0 + h * (8.0 / 9.0),
                at(a51 * k1_.v + a52 * k2.v + a53 * k3.v + a54 * k4.v,
                   a51 * k1_.n + a52 * k2.n + a53 * k3.n + a54 * k4.n));
      k6 = rhs_(t0 + h,
                at(a61 * k1_.v + a62 * k2.v + a63 * k3.v + a64 * k4.v + a65 * k5.v,
                   a61 * k1_.n + a62 * k2.n + a63 * k3.n + a64 * k4.n + a65 * k5.n));
      y5 = at(a71 * k1_.v + a73 * k3.v + a74 * k4.v + a75 * k5.v + a76 * k6.v,
              a71 * k1_.n + a73 * k3.n + a74 * k4.n + a75 * k5.n + a76 * k6.n);
      k7 = rhs_(t0 + h, y5);

      double ev = h * (e1 * k1_.v + e3 * k3.v + e4 * k4.v + e5 * k5.v +
                       e6 * k6.v + e7 * k7.v);
      double en = h * (e1 * k1_.n + e3 * k3.n + e4 * k4.n + e5 * k5.n +
                       e6 * k6.n + e7 * k7.n);
      double scv = ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(y0.v), std::abs(y5.v));
      double scn = ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(y0.n), std::abs(y5.n));
      double err = std::sqrt(0.5 * ((ev / scv) * (ev / scv) + (en / scn) * (en / scn)));

      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);

      if (err <= 1.0) {
        // dense-output coefficients for this step
        r1_ = y0;
        r2_ = {y5.v - y0.v, y5.n - y0.n};
        r3_ = {h * k1_.v - r2_.v, h * k1_.n - r2_.n};
        r4_ = {r2_.v - h * k7.v - r3_.v, r2_.n - h * k7.n - r3_.n};
        r5_ = {h * (d1 * k1_.v + d3 * k3.v + d4 * k4.v + d5 * k5.v + d6 * k6.v + d7 * k7.v),
               h * (d1 * k1_.n + d3 * k3.n + d4 * k4.n + d5 * k5.n + d6 * k6.n + d7 * k7.n)};
        tp_ = t0;
        yp_ = y0;
        hp_ = h;
        t_ = t0 + h;
        y_ = y5;
        k1_ = k7;  // FSAL
        h_ = std::min(ctl_.max_step, h * fac);
        return true;
      }
      rejected = true;
      h_ = h * fac;
    }
    return false;
  }

  // Interpolates within the last accepted step [t_prev, t].
  State dense(double t) const {
    double th = (t - tp_) / hp_;
    double th1 = 1.0 - th;
    return {r1_.v + th * (r2_.v + th1 * (r3_.v + th * (r4_.v + th1 * r5_.v))),
            r1_.n + th * (r2_.n + th1 * (r3_.n + th * (r4_.n + th1 * r5_.n)))};
  }

 private:
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                          a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                          a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                          a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                          e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                          e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;

  Rhs rhs_;
  StepControl ctl_;
  double t_, h_;
  State y_, k1_;
  double tp_ = 0.0, hp_ = 1.0;
  State yp_{};
  State r1_{}, r2_{}, r3_{}, r4_{}, r5_{};
};

}  // namespace exc::detail
