#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exc/continuation.hpp"
#include "exc/dynamics.hpp"
#include "exc/equilibria.hpp"
#include "exc/model.hpp"

// Region labels over the (v0, n0) parameter plane and the electrophysiological
// signature battery.  A label is decided by the equilibrium census at the
// organizing current I* together with what happens to the resting branch as
// the applied current rises: the stable/saddle pair sits on the competitive
// branch (I), the resting state destabilizes at a Hopf (II), the resting state
// stays stable at every current (III), the pair sits on the cooperative branch
// with an unstable third point (IV), or two stable states coexist (V).  All
// battery measurements are direct simulations and carry the protocol values
// that produced them.

namespace exc {

enum class Region {
  type_i,
  type_ii,
  type_iii,
  type_iv,
  type_v,
  boundary,      // within 1e-6 of the transcritical line or a fold tangency
  unclassified,  // census fits no documented pattern; see evidence.note
};

// "I".."V", "boundary", or "unclassified"
const char* region_name(Region r);

struct RegionEvidence {
  std::vector<Equilibrium> census;  // equilibria at I = I*, ascending V
  int stable_count = 0;
  double delta0 = 0.0;           // signed offset from the transcritical line
  double tangency_margin = 0.0;  // |n0 - nearest fold-tangency offset|
  // some equilibrium segment turns unstable at a current above I* (trace zero
  // with positive determinant); current of the lowest such crossing
  bool destabilizes = false;
  double destabilization_current = 0.0;
  // stable limit cycle found on the bounded scan used by the III criterion
  bool cycle_found = false;
  double cycle_current = 0.0;
  double scan_ceiling = 0.0;  // I* + 2 when the cycle scan ran, 0 otherwise
  std::string note;           // filled when the census fits no pattern
};

struct RegionLabel {
  Region region = Region::unclassified;
  RegionEvidence evidence;
};

// Labels one parameter-plane point.  The census is taken at I = I*; the II/III
// split checks destabilization anywhere above I* in closed form and, only when
// no destabilization exists, hunts for a stable cycle on a 64-point grid over
// (I*, I* + 2] (the ceiling is recorded in the evidence).  Points within 1e-6
// of delta0 = 0 or of a fold tangency in n0 are labeled boundary.  Censuses
// matching no documented pattern are reported unclassified, never guessed.
// Throws std::invalid_argument on non-finite inputs or epsilon outside (0, 1).
RegionLabel region_at(double v0, double n0, double epsilon = 0.02);

// All recovery offsets n0 at which the branch current has a fold exactly at
// I* for the given half-activation, ascending.  These trace the saddle-node
// boundary curves of the parameter chart; the transcritical line itself
// (the known root at V = -1) is divided out, so the returned offsets continue
// smoothly through the pitchfork point.
std::vector<double> tangency_offsets(double v0);

struct ChartOptions {
  double v0_lo = -2.0;
  double v0_hi = 0.2;
  double n0_lo = -2.2;
  double n0_hi = 0.8;
  int v0_samples = 120;
  int n0_samples = 120;
  double epsilon = 0.02;
};

struct RegionChart {
  ChartOptions options;
  std::vector<double> v0;  // sample grids, inclusive of both window edges
  std::vector<double> n0;
  std::vector<Region> label;  // v0-major: label[iv * n0_samples + in]
  // boundary overlays evaluated per v0 sample: the transcritical line in
  // closed form and the fold-tangency offsets (ascending, count may vary)
  std::vector<double> tc_n0;
  std::vector<std::vector<double>> sn_n0;

  Region at(int iv, int in) const { return label[static_cast<size_t>(iv) * n0.size() + in]; }
};

// Labels every grid cell via region_at and attaches the boundary overlays.
// The window must contain the pitchfork point (v0_star, n0_star(v0_star));
// throws std::invalid_argument otherwise or on a degenerate grid.
RegionChart chart(const ChartOptions& opt = {});

// Integration tolerances for the battery measurements; halving them should
// move any reported quantity by well under a percent.
struct SimTols {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

// Time to the first spike after an instantaneous step from the resting state
// of p_rest to applied current i_step.  Returns nullopt when no spike occurs
// within 100/epsilon, reporting an infinite latency distinctly rather than
// clipping it.  Throws std::invalid_argument when p_rest has no stable
// resting state.
std::optional<double> measure_latency(const Params& p_rest, double i_step,
                                      const SimTols& tols = {});

struct AdpRecord {
  bool present = false;    // trough then bump above 1e-3 before convergence
  double trough_v = 0.0;   // lowest tail voltage before the bump
  double trough_t = 0.0;
  double bump_height = 0.0;
  State launch{0.0, 0.0};      // super-threshold state the spike started from
  State tail_start{0.0, 0.0};  // first sub-threshold tail sample (V < 0)
};

// Fires a single spike from a super-threshold perturbation of rest (V raised
// to the spike threshold, recovery untouched) and inspects the sub-threshold
// tail: an afterdepolarization is a local voltage minimum followed by a local
// maximum at least 1e-3 above it before the tail converges.  Throws
// std::invalid_argument without a stable resting state and std::runtime_error
// when the perturbation does not elicit a spike.
AdpRecord detect_adp(const Params& p, const SimTols& tols = {});

// Tail analysis alone, starting from a given sub-threshold post-spike state
// (V below 0); used to check that an ADP verdict survives perturbation of the
// post-spike state.  Throws std::invalid_argument when the state is not
// sub-threshold.
AdpRecord adp_from_state(const Params& p, State post_spike, const SimTols& tols = {});

// Probes each current in i_grid for coexisting attractors: the long-run
// outcome from the resting side (the lowest-V stable equilibrium, or a
// deep-left launch when none exists) is compared with the outcome from the
// far side of the saddle ((V_saddle + 0.3, n_saddle), or (2.0, n0 + 1)
// without a saddle).  Outcomes differ when exactly one locks onto a cycle or
// the final states disagree.  Returns the maximal contiguous bistable run of
// grid points with both endpoints bisected to 1e-6, or nullopt when no grid
// point is bistable.  The grid is sorted and deduplicated internally.
std::optional<std::pair<double, double>> bistable_range(const Params& p_base,
                                                        const std::vector<double>& i_grid,
                                                        const SimTols& tols = {});

struct FiPoint {
  double i_app = 0.0;
  double f = 0.0;  // 1/period for a confirmed cycle, 0 otherwise
  CycleStatus status = CycleStatus::absent;
};

// Firing frequency at each listed current via find_limit_cycle; points where
// the cycle hunt stays ambiguous keep f = 0 with the status recorded.
std::vector<FiPoint> fi_curve(const Params& p_base, const std::vector<double>& currents,
                              const CycleOptions& opt = {});

struct SubthresholdRecord {
  bool damped_oscillation = false;  // >= 2 sign alternations of V - V_rest
  double natural_frequency = 0.0;   // |Im lambda| / (2 pi) at the rest focus
  double fitted_frequency = 0.0;    // from zero-crossing spacing of the tail
  int alternations = 0;
  double kick = 0.0;  // voltage perturbation that seeded the ringing
};

// Reports the damped ringing around a stable focus: the eigenvalue frequency
// plus a small-perturbation simulation that confirms the oscillation and fits
// the frequency from zero crossings.  A stable node reports no-oscillation
// with zeroed frequencies.  Throws std::invalid_argument without a stable
// resting state and std::runtime_error when the kick elicits a spike.
SubthresholdRecord subthreshold_response(const Params& p, const SimTols& tols = {});

struct SlopeRecord {
  int step_spikes = 0;       // spikes under a single step of delta_i
  int staircase_spikes = 0;  // spikes under the staircase to the same level
  double delta_i = 0.0;
  int increments = 0;
  double hold = 0.0;  // per-level hold time, 50/epsilon
};

// Slope-detection protocol from rest: one instantaneous step by delta_i held
// for 50/epsilon against a staircase of `increments` equal sub-steps each held
// 50/epsilon.  Spike counts of both runs are reported; a slope detector fires
// on the step and stays quiescent on the staircase.
SlopeRecord slope_detection(const Params& p_base, double delta_i, int increments = 20,
                            const SimTols& tols = {});

struct BatteryOptions {
  // current offsets above the resting-branch onset for the latency curve and
  // the f-I curve; seven half-decade steps spanning [1e-4, 1e-1] by default
  std::vector<double> latency_deltas;
  std::vector<double> fi_deltas;
  // coarse sample count across the fold window; extra points are clustered
  // next to each fold so a strip much narrower than the window is still hit
  int bistable_samples = 41;
  double bistable_pad = 0.02;  // widens the fold window before scanning
  double slope_delta_i = 2.5;
  int slope_increments = 20;
  CycleOptions cycle;  // budget for the f-I cycle hunts
  SimTols tols;
};

struct SignatureReport {
  Params base;  // baseline parameters every protocol started from
  // current at which the resting branch ends or destabilizes, +inf when the
  // rest state survives the whole probed range (the type III situation)
  double onset_current = 0.0;
  std::vector<std::pair<double, double>> latency_curve;  // (delta_i, latency)
  double latency_slope = 0.0;  // log-log fit over the finite entries
  AdpRecord adp;
  std::optional<std::pair<double, double>> bistable;
  std::vector<FiPoint> fi;
  SubthresholdRecord subthreshold;
  SlopeRecord slope;
};

// Runs the full battery at a baseline point: locates the resting-branch onset
// by bisection, measures latency and firing frequency at offsets above it,
// probes ADP, bistability around the fold window, sub-threshold ringing, and
// the slope-detection protocol.  Measurements that do not apply (latency
// without an onset, ADP without a spike) are recorded as absent or infinite
// rather than omitted.  Infinite latencies are stored as +inf.
SignatureReport signature_battery(const Params& p, const BatteryOptions& opt = {});

}  // namespace exc
