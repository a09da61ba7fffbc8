// Time integration of the full system with event detection: spike threshold
// crossings (with hysteresis), Poincare-section crossings, convergence to an
// equilibrium, and phase-window exit.  Piecewise-constant stimulus protocols
// run as concatenated segments with a continuous state.
#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "exc/model.hpp"

namespace exc {

enum class EventKind { spike, section_cross, converged, window_exit };

struct Event {
  double t;
  EventKind kind;
  int segment;  // protocol segment index; 0 for plain integrate
  State state;
};

// Section {n = rho, v_lo <= V <= v_hi}; direction -1 records only falling-n
// crossings, +1 only rising, 0 both.  A terminal section stops the run at the
// first accepted crossing.
struct Section {
  double rho;
  double v_lo;
  double v_hi;
  int direction;
  bool terminal = false;
};

enum class StopReason {
  reached_t_end,
  converged,
  window_exit,
  section_stop,
  step_underflow
};

struct IntegratorOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.1;
  double t_end = 100.0;
  double spike_threshold = 1.0;
  std::optional<Section> section;
  // Every k-th accepted step is stored (the final state always is); 0 keeps
  // only the endpoints.  Event detection is unaffected.
  int sample_stride = 1;
  // Integrates the time-reversed field (sample times still increase from 0);
  // used for stable-manifold arcs.
  bool reverse_time = false;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<State> y;
  std::vector<Event> events;
  StopReason reason = StopReason::reached_t_end;

  std::vector<double> event_times(EventKind k) const {
    std::vector<double> out;
    for (const auto& e : events)
      if (e.kind == k) out.push_back(e.t);
    return out;
  }
};

struct ProtoSegment {
  double duration;
  double i_app;
};

struct StimulusProtocol {
  std::vector<ProtoSegment> segments;
};

// Adaptive integration of the full system from s0 until t_end, convergence
// (||f|| < 1e-9 sustained with displacement < 1e-9 over one slow time unit),
// or exit from the guard window V in [-6, 5].  Throws std::invalid_argument
// on out-of-range options; step-size underflow is reported via reason.
// Note: the convergence confirmation window (1/epsilon) must fit before t_end
// for the converged event to fire.
Trajectory integrate(const Params& p, State s0, const IntegratorOptions& opts);

// Runs the protocol segments back to back with I_app switched per segment and
// the state carried across switches.  A converged event inside a non-final
// segment freezes the state (it sits at an equilibrium under constant input)
// and skips to the segment end, keeping the global clock aligned.
Trajectory integrate_protocol(const Params& p, State s0,
                              const StimulusProtocol& proto,
                              const IntegratorOptions& opts);

// Offline spike scan over stored samples: upward crossings of the threshold,
// re-armed only after V falls below threshold - 0.5.  Crossing times are
// refined by local cubic interpolation, so the trajectory should be stored
// with sample_stride 1 for accurate times.
std::vector<double> detect_spikes(const Trajectory& traj, double threshold);

}  // namespace exc
