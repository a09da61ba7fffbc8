// Equilibrium finding, linear classification, branch tagging, and
// saddle-manifold arcs.
#pragma once

#include <array>
#include <complex>
#include <vector>

#include "exc/dynamics.hpp"
#include "exc/model.hpp"

namespace exc {

enum class EqKind {
  stable_node,
  stable_focus,
  unstable_node,
  unstable_focus,
  saddle,
  degenerate
};

// Position on the n-nullcline graph: lower_* has n < 0, upper_* n >= 0, split
// at V = -1 and (for the upper side) at V = 1 where dV-dot/dV changes sign;
// pinch is the tangency point (-1, 0) itself.
enum class Branch {
  lower_left,
  lower_right,
  upper_left,
  upper_middle,
  upper_right,
  pinch
};

struct Equilibrium {
  State state;
  std::array<std::complex<double>, 2> eigenvalues;  // sorted by real part
  EqKind kind;
  Branch branch;
  Interaction interaction;
};

enum class ManifoldDirection {
  unstable_plus,   // along the unstable eigenvector, positive-V orientation
  unstable_minus,
  stable_plus,     // along the stable eigenvector, positive-V orientation
  stable_minus
};

struct ManifoldSeed {
  Equilibrium base;  // must be a saddle
  ManifoldDirection direction;
  double offset = 1e-6;  // displacement along the unit eigenvector, [1e-8, 1e-3]
};

// All equilibria at the given parameters, sorted by V.  Roots of the branch
// current on V in [-4, 3] located by a 4000-point sign scan plus bisection,
// with a tangency sweep that separates sub-cell root pairs from genuine
// double roots; each root gets one Newton polish on the 2-D system (skipped
// where the jacobian is singular) and duplicates within 1e-8 are merged.
// The grid is densified when two roots share a cell.
std::vector<Equilibrium> find_equilibria(const Params& p);

// Linear classification of a single equilibrium; the residual ||f|| must be
// below 1e-8 or the call throws.  Degeneracy band: |det J| <= 1e-9 * ||J||.
Equilibrium classify_equilibrium(const Params& p, const State& s);

// Unit eigenvector of j for eigenvalue lambda, oriented to positive V
// (positive n when the V component vanishes).
State eigenvector(const Mat2& j, double lambda);

// Integrates the saddle manifold branch selected by the seed: forward in time
// for unstable directions, time-reversed for stable ones.  Events and stop
// conditions follow `opts` (a terminal section is the usual stop for gap
// measurements).
Trajectory manifold_arc(const Params& p, const ManifoldSeed& seed,
                        const IntegratorOptions& opts);

}  // namespace exc
