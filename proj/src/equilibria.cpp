#include "exc/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exc {
namespace {

constexpr double kScanLo = -4.0;
constexpr double kScanHi = 3.0;
constexpr int kGridBase = 4000;
constexpr int kGridMax = 64000;

double jac_norm(const Mat2& j) {
  return std::sqrt(j.a * j.a + j.b * j.b + j.c * j.c + j.d * j.d);
}

// g(V) = V-dot restricted to the n-nullcline graph; equilibria are its roots
double graph_residual(const Params& p, double v) {
  return vector_field(p, {v, n_nullcline(p, v)}).v;
}

double bisect_root(const Params& p, double lo, double hi, double glo) {
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    double mid = 0.5 * (lo + hi);
    double gm = graph_residual(p, mid);
    if (gm == 0.0) return mid;
    if ((glo < 0.0) == (gm < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Extremum of g inside [lo, hi] by Newton on g' with central differences,
// seeded at the midpoint; iterates are kept inside the bracket.
double g_extremum(const Params& p, double lo, double hi) {
  double v = 0.5 * (lo + hi);
  for (int it = 0; it < 12; ++it) {
    const double h = 1e-7;
    double gm = graph_residual(p, v - h);
    double gc = graph_residual(p, v);
    double gp = graph_residual(p, v + h);
    double d1 = (gp - gm) / (2.0 * h);
    double d2 = (gp - 2.0 * gc + gm) / (h * h);
    if (d2 == 0.0) break;
    double next = v - d1 / d2;
    if (next < lo) next = 0.5 * (v + lo);
    if (next > hi) next = 0.5 * (v + hi);
    if (std::abs(next - v) < 1e-13) {
      v = next;
      break;
    }
    v = next;
  }
  return v;
}

State newton_polish(const Params& p, State s) {
  State f = vector_field(p, s);
  Mat2 j = jacobian(p, s);
  double det = j.det();
  if (std::abs(det) <= 1e-9 * jac_norm(j)) return s;  // tangency: keep 1-D root
  s.v += (-f.v * j.d + f.n * j.b) / det;
  s.n += (-f.n * j.a + f.v * j.c) / det;
  return s;
}

std::vector<double> scan_roots(const Params& p, int grid, bool& tangency) {
  std::vector<double> roots;
  std::vector<double> g(grid + 1);
  double h = (kScanHi - kScanLo) / grid;
  for (int i = 0; i <= grid; ++i)
    g[i] = graph_residual(p, kScanLo + h * i);
  for (int i = 0; i < grid; ++i) {
    double vl = kScanLo + h * i, vr = vl + h;
    if (g[i] == 0.0) {
      roots.push_back(vl);
    } else if ((g[i] < 0.0) != (g[i + 1] < 0.0)) {
      roots.push_back(bisect_root(p, vl, vr, g[i]));
    }
  }
  if (g[grid] == 0.0) roots.push_back(kScanHi);
  // tangency sweep: a local |g| minimum with a tiny value and no sign change
  // hides either a genuine double root or a root pair closer than the grid
  // can separate; the extremum of g between the flanks decides which
  for (int i = 1; i < grid; ++i) {
    if (std::abs(g[i]) < 1e-4 && std::abs(g[i]) <= std::abs(g[i - 1]) &&
        std::abs(g[i]) <= std::abs(g[i + 1]) &&
        (g[i - 1] < 0.0) == (g[i + 1] < 0.0) && g[i] != 0.0 &&
        (g[i] < 0.0) == (g[i - 1] < 0.0)) {
      double vl = kScanLo + h * (i - 1), vr = kScanLo + h * (i + 1);
      double va = g_extremum(p, vl, vr);
      double ga = graph_residual(p, va);
      if (ga != 0.0 && (ga < 0.0) != (g[i - 1] < 0.0)) {
        // the extremum overshoots zero: two simple roots straddle it
        roots.push_back(bisect_root(p, vl, va, g[i - 1]));
        roots.push_back(bisect_root(p, va, vr, ga));
      } else if (std::abs(ga) < 1e-11 * (1.0 + std::abs(p.i_app))) {
        roots.push_back(va);
        tangency = true;
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

State eigenvector(const Mat2& j, double lambda) {
  // null vector of (J - lambda I) from whichever row is better conditioned
  double x1 = j.b, y1 = lambda - j.a;
  double x2 = lambda - j.d, y2 = j.c;
  double n1 = std::hypot(x1, y1), n2 = std::hypot(x2, y2);
  double x, y;
  if (n1 >= n2) {
    x = x1 / n1;
    y = y1 / n1;
  } else {
    x = x2 / n2;
    y = y2 / n2;
  }
  if (x < 0.0 || (x == 0.0 && y < 0.0)) {
    x = -x;
    y = -y;
  }
  return {x, y};
}

Equilibrium classify_equilibrium(const Params& p, const State& s) {
  State f = vector_field(p, s);
  if (std::hypot(f.v, f.n) >= 1e-8)
    throw std::invalid_argument("state is not an equilibrium");
  Mat2 j = jacobian(p, s);
  double tr = j.trace(), det = j.det();
  double band = 1e-9 * jac_norm(j);

  Equilibrium eq;
  eq.state = s;
  double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    double r = std::sqrt(disc);
    eq.eigenvalues = {std::complex<double>(0.5 * (tr - r), 0.0),
                      std::complex<double>(0.5 * (tr + r), 0.0)};
  } else {
    double w = 0.5 * std::sqrt(-disc);
    eq.eigenvalues = {std::complex<double>(0.5 * tr, -w),
                      std::complex<double>(0.5 * tr, w)};
  }

  if (std::abs(det) <= band)
    eq.kind = EqKind::degenerate;
  else if (det < 0.0)
    eq.kind = EqKind::saddle;
  else if (disc >= 0.0)
    eq.kind = tr < 0.0 ? EqKind::stable_node : EqKind::unstable_node;
  else
    eq.kind = tr <= 0.0 ? EqKind::stable_focus : EqKind::unstable_focus;

  if (std::abs(s.v + 1.0) < 1e-8 && std::abs(s.n) < 1e-8)
    eq.branch = Branch::pinch;
  else if (s.n < 0.0)
    eq.branch = s.v < -1.0 ? Branch::lower_left : Branch::lower_right;
  else if (s.v < -1.0)
    eq.branch = Branch::upper_left;
  else
    eq.branch = s.v > 1.0 ? Branch::upper_right : Branch::upper_middle;

  eq.interaction =
      s.n < 0.0 ? Interaction::cooperative : Interaction::competitive;
  return eq;
}

std::vector<Equilibrium> find_equilibria(const Params& p) {
  if (!is_valid(p)) throw std::invalid_argument("invalid model parameters");

  std::vector<double> roots;
  for (int grid = kGridBase; grid <= kGridMax; grid *= 2) {
    bool tangency = false;
    roots = scan_roots(p, grid, tangency);
    double cell = (kScanHi - kScanLo) / grid;
    bool crowded = tangency;
    for (size_t i = 1; i < roots.size(); ++i)
      crowded |= (roots[i] - roots[i - 1] < cell);
    if (!crowded) break;
  }

  std::vector<State> states;
  for (double v : roots)
    states.push_back(newton_polish(p, {v, n_nullcline(p, v)}));
  std::sort(states.begin(), states.end(),
            [](const State& a, const State& b) { return a.v < b.v; });
  std::vector<State> merged;
  for (const State& s : states) {
    if (!merged.empty() && std::abs(s.v - merged.back().v) < 1e-8 &&
        std::abs(s.n - merged.back().n) < 1e-8)
      continue;
    merged.push_back(s);
  }

  std::vector<Equilibrium> out;
  for (const State& s : merged) out.push_back(classify_equilibrium(p, s));
  return out;
}

Trajectory manifold_arc(const Params& p, const ManifoldSeed& seed,
                        const IntegratorOptions& opts) {
  if (seed.base.kind != EqKind::saddle)
    throw std::invalid_argument("manifold seed must be a saddle");
  if (seed.offset < 1e-8 || seed.offset > 1e-3)
    throw std::invalid_argument("manifold seed offset outside [1e-8, 1e-3]");

  bool unstable = seed.direction == ManifoldDirection::unstable_plus ||
                  seed.direction == ManifoldDirection::unstable_minus;
  bool plus = seed.direction == ManifoldDirection::unstable_plus ||
              seed.direction == ManifoldDirection::stable_plus;

  Mat2 j = jacobian(p, seed.base.state);
  double lam = unstable ? seed.base.eigenvalues[1].real()
                        : seed.base.eigenvalues[0].real();
  State dir = eigenvector(j, lam);
  double sgn = plus ? 1.0 : -1.0;
  State s0{seed.base.state.v + sgn * seed.offset * dir.v,
           seed.base.state.n + sgn * seed.offset * dir.n};

  IntegratorOptions o = opts;
  o.reverse_time = !unstable;
  return integrate(p, s0, o);
}

}  // namespace exc
