#include "exc/model.hpp"

namespace exc {

std::vector<double> v_nullcline(double v, double i_app) {
  double a = v - v * v * v / 3.0 + i_app;
  if (a < 0.0) return {};
  if (a == 0.0) return {0.0};
  double r = std::sqrt(a);
  return {-r, r};
}

double v0_star() {
  // k_slope decreases monotonically from 2.5 at v0 = -1 toward 0, so the
  // k = 1 crossing is bracketed by [-1, 0].
  static const double cached = [] {
    double lo = -1.0, hi = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      double mid = 0.5 * (lo + hi);
      if (k_slope(mid) > 1.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return cached;
}

OrganizingCenter organizing_center() {
  double vs = v0_star();
  return {i_star, {-1.0, 0.0}, vs, n0_star(vs)};
}

}  // namespace exc
