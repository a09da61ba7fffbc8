#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exc/equilibria.hpp"

namespace exc {

// One-parameter bifurcation analysis in the applied current. The n-nullcline
// is a graph over V, so the whole equilibrium set is parameterized by V
// through I(V) = (n_inf(V - v0) + n0)^2 + V^3/3 - V and continuation reduces
// to 1-D scans of that graph; limit cycles and the saddle-loop connection
// are located by direct simulation.

enum class BifKind {
  saddle_node,
  snic,
  hopf,
  transcritical,
  homoclinic,
  pitchfork,
};

struct BifurcationPoint {
  BifKind kind = BifKind::saddle_node;
  double i_crit = 0.0;
  State location{0.0, 0.0};
  // Defining-condition residual: |dI/dV| at a fold, |tr J| at a Hopf, the
  // final bracket width at a homoclinic connection.
  double residual = 0.0;
  // Folds only: the fold sits on an invariant circle (see detect_snic).
  bool snic = false;
  // "down" on the lowest-V fold (where the rest branch ends) and "up" on the
  // highest-V fold (where the excited branch is born) when a branch carries
  // several; interior folds stay untagged.
  std::string tag;
};

struct BranchPoint {
  double i_app = 0.0;
  Equilibrium eq;
};

// Equilibrium branch tabulated over a V grid, ordered by V. Every point
// satisfies the equilibrium equations by construction; folds (dI/dV = 0) and
// Hopf candidates (tr J = 0 with det J > 0) are refined by bisection.
struct EquilibriumBranch {
  std::vector<BranchPoint> points;
  std::vector<BifurcationPoint> folds;
  std::vector<BifurcationPoint> hopf;
};

EquilibriumBranch equilibrium_branch(const Params& p_base, double v_lo = -4.0,
                                     double v_hi = 3.0, int resolution = 2001);

struct LimitCycle {
  double i_app = 0.0;
  double period = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  // One period sampled from a spike upstroke on the settled cycle; the
  // endpoint returns to the start within 1e-5 in phase space.
  Trajectory orbit;
};

enum class CycleStatus { cycle, absent, ambiguous };

struct CycleResult {
  CycleStatus status = CycleStatus::ambiguous;
  std::optional<LimitCycle> cycle;
};

struct CycleOptions {
  // Search budget in slow units (multiples of 1/epsilon).
  double slow_units = 50.0;
  // The launch state (launch_v, n0 + 1) sits left of the resting area at the
  // vertical midpoint of the invariant strip, outside any node basin that
  // coexists with a cycle.
  double launch_v = -2.5;
  double rel_isi_tol = 1e-4;
  int needed_intervals = 4;
};

// Periodicity by simulation: a cycle is accepted once `needed_intervals`
// trailing inter-spike intervals agree to rel_isi_tol, with the period taken
// from the last interval; convergence to an equilibrium reports absent, and
// exhausting the budget with neither outcome reports ambiguous.
CycleResult find_limit_cycle(const Params& p, const CycleOptions& opt = {});

// True iff a stable cycle exists at i_crit + 1e-3 whose orbit passes within
// 0.05 of the fold location: the invariant circle through the fold. Throws
// unless fold.kind == saddle_node.
bool detect_snic(const Params& p, const BifurcationPoint& fold);

enum class GapStatus {
  ok,         // both section crossings found
  respike,    // the unstable arc locked onto a cycle above the section
  converged,  // the unstable arc was captured without reaching the section
  lost,       // an arc left the window or exhausted the budget unresolved
  absent,     // no saddle exists at these parameters
};

// Signed separation on the section n = rho between the saddle's returning
// unstable arc (q_a, first downward crossing after the excursion) and its
// stable arc continued backward (q_r, earliest crossing of either side).
struct SectionGap {
  GapStatus status = GapStatus::absent;
  double rho = 0.0;
  double q_a = 0.0;
  double q_r = 0.0;
  double gap = 0.0;  // q_a - q_r, meaningful only when status == ok
};

struct GapOptions {
  // The section must sit strictly between the saddle and n = 0 for the gap
  // to close continuously at the connection; lower sections still carry a
  // usable sign through the respike/converged surrogates.
  double rho = -0.1;
  double v_lo = -2.5;
  double v_hi = 0.5;
  double seed_offset = 1e-6;
  double t_end = 5000.0;
};

// Measures the gap at the lowest-V saddle. A section below the invariant
// strip is never reached and yields surrogate statuses only.
SectionGap section_gap(const Params& p, const GapOptions& opt = {});

// Bisection sign of a gap measurement: ok maps to sign(gap); respike means
// the loop has opened rightward (+1), capture without crossing leftward
// (-1); lost/absent carry no sign (0).
int gap_sign(const SectionGap& g);

struct HomoclinicResult {
  BifurcationPoint point;  // kind homoclinic, residual = bracket width
  // The near-closed loop at i_crit: the unstable arc out to a section
  // halfway between the saddle and the strip floor, then the stable arc
  // back to its seed; closure is the endpoint distance to the saddle.
  Trajectory loop;
  double closure = 0.0;
};

// Saddle-homoclinic connection by bisection on gap_sign over [i_lo, i_hi],
// after isolating a single sign change by 5-point sampling (the gap is
// monotone only near the connection). nullopt reports an invalid bracket
// (no sign change): the connection is absent for these parameters.
std::optional<HomoclinicResult> find_homoclinic(const Params& p_base,
                                                double i_lo, double i_hi,
                                                const GapOptions& opt = {});

struct CycleBranchPoint {
  double i_app = 0.0;
  CycleStatus status = CycleStatus::absent;
  double period = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
};

struct BifurcationDiagram {
  // Branch points restricted to the requested current range.
  EquilibriumBranch branch;
  std::vector<CycleBranchPoint> cycles;
  // Folds (snic-flagged), Hopf points, and the homoclinic point when one is
  // found below the first fold past I*.
  std::vector<BifurcationPoint> points;
  // Two-fold diagrams report where the Hopf sits relative to the bistable
  // interval: "hopf-within-bistable", "hopf-beyond-bistable", or "no-hopf";
  // empty for diagrams with fewer than two folds.
  std::string scenario;
};

BifurcationDiagram bifurcation_diagram(const Params& p_base, double i_lo,
                                       double i_hi, int cycle_resolution = 33);

}  // namespace exc
