#include "exc/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "exc/detail/dopri5.hpp"

namespace exc {
namespace {

constexpr double kWindowLo = -6.0;
constexpr double kWindowHi = 5.0;
constexpr double kConvSpeed = 1e-9;
constexpr double kConvDisp = 1e-9;
constexpr int kSub = 8;  // event subsamples per accepted step

struct ModelRhs {
  Params p;
  double sign;  // +1 forward, -1 time-reversed
  State operator()(double, const State& y) const {
    State f = vector_field(p, y);
    return {sign * f.v, sign * f.n};
  }
};

double speed(const Params& p, const State& y) {
  State f = vector_field(p, y);
  return std::hypot(f.v, f.n);
}

void validate(const IntegratorOptions& o) {
  auto tol_ok = [](double t) { return t > 0.0 && t <= 1e-2; };
  if (!tol_ok(o.rel_tol) || !tol_ok(o.abs_tol))
    throw std::invalid_argument("integrator tolerances must lie in (0, 1e-2]");
  if (!(o.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(o.max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
  if (o.sample_stride < 0) throw std::invalid_argument("sample_stride must be >= 0");
}

using Stepper = detail::Dopri5<ModelRhs>;

// Bisects the dense output for g(state) == 0 inside [ta, tb]; g must change
// sign across the bracket.
template <class G>
double locate(const Stepper& st, G g, double ta, double tb) {
  double ga = g(st.dense(ta));
  for (int i = 0; i < 200; ++i) {
    double tm = 0.5 * (ta + tb);
    if (tb - ta < 1e-15 * std::max(1.0, std::abs(tb))) return tm;
    double gm = g(st.dense(tm));
    if (gm == 0.0) return tm;
    if ((ga < 0.0) == (gm < 0.0)) {
      ta = tm;
      ga = gm;
    } else {
      tb = tm;
    }
  }
  return 0.5 * (ta + tb);
}

struct SegmentResult {
  StopReason reason;
};

// Integrates one constant-current segment of `duration`, appending samples and
// events (shifted by t_offset, tagged seg_index) to `out`.  `spike_armed`
// carries the threshold hysteresis state across segments; `s` is updated to
// the segment's final state.
SegmentResult run_segment(const Params& p, State& s, double duration,
                          const IntegratorOptions& o, int seg_index,
                          double t_offset, bool& spike_armed, Trajectory& out) {
  detail::StepControl ctl{o.rel_tol, o.abs_tol, o.max_step,
                          std::min(1e-3, o.max_step)};
  Stepper st(ModelRhs{p, o.reverse_time ? -1.0 : 1.0}, 0.0, s, ctl);

  if (out.t.empty()) {
    out.t.push_back(t_offset);
    out.y.push_back(s);
  }

  // convergence-candidate bookkeeping
  bool cand = false;
  double cand_t = 0.0, cand_deadline = 0.0;
  State cand_y{};

  auto push_sample = [&](double tl, const State& y) {
    out.t.push_back(t_offset + tl);
    out.y.push_back(y);
  };

  auto confirm_convergence = [&]() {
    double tg = t_offset + cand_t;
    while (!out.t.empty() && out.t.back() > tg) {
      out.t.pop_back();
      out.y.pop_back();
    }
    std::erase_if(out.events, [&](const Event& e) { return e.t > tg; });
    if (!out.t.empty() && out.t.back() == tg)
      out.y.back() = cand_y;
    else
      push_sample(cand_t, cand_y);
    out.events.push_back({tg, EventKind::converged, seg_index, cand_y});
    s = cand_y;
  };

  long step_count = 0;
  while (st.t() < duration) {
    if (!st.step(duration)) {
      out.reason = StopReason::step_underflow;
      push_sample(st.t(), st.y());
      s = st.y();
      return {StopReason::step_underflow};
    }
    ++step_count;
    double ta = st.t_prev(), tb = st.t();

    // guard-window exit: terminal, truncated at the boundary crossing
    if (st.y().v < kWindowLo || st.y().v > kWindowHi) {
      double bound = st.y().v < kWindowLo ? kWindowLo : kWindowHi;
      double tx = tb;
      if ((st.y_prev().v - bound) * (st.y().v - bound) < 0.0)
        tx = locate(st, [&](const State& y) { return y.v - bound; }, ta, tb);
      State yx = st.dense(tx);
      push_sample(tx, yx);
      out.events.push_back({t_offset + tx, EventKind::window_exit, seg_index, yx});
      out.reason = StopReason::window_exit;
      s = yx;
      return {StopReason::window_exit};
    }

    // spike and section crossings on a subsample grid, processed in time order
    double tg[kSub + 1];
    State yg[kSub + 1];
    for (int i = 0; i <= kSub; ++i) {
      tg[i] = ta + (tb - ta) * i / kSub;
      yg[i] = st.dense(tg[i]);
    }
    std::vector<Event> step_events;
    for (int i = 0; i < kSub; ++i) {
      if (spike_armed && yg[i].v <= o.spike_threshold && yg[i + 1].v > o.spike_threshold) {
        double tx = locate(
            st, [&](const State& y) { return y.v - o.spike_threshold; }, tg[i],
            tg[i + 1]);
        State yx = st.dense(tx);
        step_events.push_back({t_offset + tx, EventKind::spike, seg_index, yx});
        spike_armed = false;
      }
      if (!spike_armed && yg[i + 1].v < o.spike_threshold - 0.5) spike_armed = true;
      if (o.section) {
        const Section& sec = *o.section;
        double ga = yg[i].n - sec.rho, gb = yg[i + 1].n - sec.rho;
        bool falling = ga > 0.0 && gb <= 0.0;
        bool rising = ga < 0.0 && gb >= 0.0;
        bool want = (sec.direction == 0 && (falling || rising)) ||
                    (sec.direction < 0 && falling) || (sec.direction > 0 && rising);
        if (want) {
          double tx = locate(st, [&](const State& y) { return y.n - sec.rho; },
                             tg[i], tg[i + 1]);
          State yx = st.dense(tx);
          if (yx.v >= sec.v_lo && yx.v <= sec.v_hi)
            step_events.push_back(
                {t_offset + tx, EventKind::section_cross, seg_index, yx});
        }
      }
    }
    std::stable_sort(step_events.begin(), step_events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    if (o.section && o.section->terminal) {
      for (size_t j = 0; j < step_events.size(); ++j) {
        if (step_events[j].kind != EventKind::section_cross) continue;
        out.events.insert(out.events.end(), step_events.begin(),
                          step_events.begin() + j + 1);
        const Event& hit = step_events[j];
        push_sample(hit.t - t_offset, hit.state);
        out.reason = StopReason::section_stop;
        s = hit.state;
        return {StopReason::section_stop};
      }
    }
    out.events.insert(out.events.end(), step_events.begin(), step_events.end());

    // convergence monitor: a speed dip below threshold opens a candidate that
    // must hold (displacement < kConvDisp) for one slow time unit
    if (!cand) {
      if (speed(p, st.y()) < kConvSpeed) {
        double tc = ta;
        if (speed(p, st.y_prev()) >= kConvSpeed)
          tc = locate(st, [&](const State& y) { return speed(p, y) - kConvSpeed; },
                      ta, tb);
        cand = true;
        cand_t = tc;
        cand_y = st.dense(tc);
        cand_deadline = tc + 1.0 / p.epsilon;
      }
    } else {
      double probe_t = std::min(tb, cand_deadline);
      State yq = st.dense(probe_t);
      double disp = std::max(std::abs(yq.v - cand_y.v), std::abs(yq.n - cand_y.n));
      if (disp > kConvDisp) {
        cand = false;
      } else if (probe_t >= cand_deadline) {
        confirm_convergence();
        out.reason = StopReason::converged;
        return {StopReason::converged};
      }
    }

    if (o.sample_stride > 0 && step_count % o.sample_stride == 0)
      push_sample(tb, st.y());
  }

  if (out.t.back() < t_offset + duration) push_sample(duration, st.y());
  s = st.y();
  out.reason = StopReason::reached_t_end;
  return {StopReason::reached_t_end};
}

}  // namespace

Trajectory integrate(const Params& p, State s0, const IntegratorOptions& opts) {
  validate(opts);
  if (!is_valid(p)) throw std::invalid_argument("invalid model parameters");
  Trajectory out;
  bool armed = s0.v < opts.spike_threshold;
  State s = s0;
  run_segment(p, s, opts.t_end, opts, 0, 0.0, armed, out);
  return out;
}

Trajectory integrate_protocol(const Params& p, State s0,
                              const StimulusProtocol& proto,
                              const IntegratorOptions& opts) {
  validate(opts);
  if (!is_valid(p)) throw std::invalid_argument("invalid model parameters");
  if (proto.segments.empty())
    throw std::invalid_argument("protocol needs at least one segment");
  for (const auto& seg : proto.segments)
    if (!(seg.duration > 0.0) || !std::isfinite(seg.i_app))
      throw std::invalid_argument("protocol segment durations must be positive");

  Trajectory out;
  bool armed = s0.v < opts.spike_threshold;
  State s = s0;
  double t_offset = 0.0;
  for (int k = 0; k < static_cast<int>(proto.segments.size()); ++k) {
    Params pk = p;
    pk.i_app = proto.segments[k].i_app;
    double dur = proto.segments[k].duration;
    SegmentResult r = run_segment(pk, s, dur, opts, k, t_offset, armed, out);
    bool last = k + 1 == static_cast<int>(proto.segments.size());
    if (r.reason == StopReason::window_exit ||
        r.reason == StopReason::section_stop ||
        r.reason == StopReason::step_underflow)
      return out;
    if (r.reason == StopReason::converged) {
      if (last) return out;
      // state frozen at the equilibrium for the remainder of the segment
      out.t.push_back(t_offset + dur);
      out.y.push_back(s);
    }
    t_offset += dur;
  }
  out.reason = StopReason::reached_t_end;
  return out;
}

std::vector<double> detect_spikes(const Trajectory& traj, double threshold) {
  std::vector<double> times;
  const auto& t = traj.t;
  const auto& y = traj.y;
  if (t.size() < 2) return times;

  // Hermite slope estimates from neighboring samples
  auto slope = [&](size_t j) {
    size_t a = j == 0 ? 0 : j - 1;
    size_t b = j + 1 < t.size() ? j + 1 : j;
    double dt = t[b] - t[a];
    return dt > 0.0 ? (y[b].v - y[a].v) / dt : 0.0;
  };

  bool armed = y[0].v < threshold;
  for (size_t j = 0; j + 1 < t.size(); ++j) {
    double v0 = y[j].v, v1 = y[j + 1].v;
    if (armed && v0 <= threshold && v1 > threshold) {
      double h = t[j + 1] - t[j];
      double m0 = slope(j) * h, m1 = slope(j + 1) * h;
      auto hermite = [&](double u) {
        double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * v0 + (u3 - 2 * u2 + u) * m0 +
               (-2 * u3 + 3 * u2) * v1 + (u3 - u2) * m1;
      };
      double lo = 0.0, hi = 1.0;
      double glo = v0 - threshold;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = hermite(mid) - threshold;
        if ((glo < 0.0) == (gm < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      times.push_back(t[j] + 0.5 * (lo + hi) * h);
      armed = false;
    }
    if (!armed && v1 < threshold - 0.5) armed = true;
  }
  return times;
}

}  // namespace exc
