#include "exc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace exc {
namespace {

constexpr double kBoundaryTol = 1e-6;   // distance to a region boundary in n0
constexpr double kAdpBumpTol = 1e-3;    // voltage bump that counts as an ADP
constexpr double kCycleLockTol = 1e-3;  // relative ISI spread of a locked cycle
constexpr double kStateMatchTol = 1e-3; // final states closer than this agree
constexpr double kEdgeTol = 1e-6;       // bistable endpoint bisection width
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_stable(const Equilibrium& e) {
  return e.kind == EqKind::stable_node || e.kind == EqKind::stable_focus;
}

bool is_unstable(const Equilibrium& e) {
  return e.kind == EqKind::unstable_node || e.kind == EqKind::unstable_focus;
}

void check_tols(const SimTols& t) {
  if (!(t.rel_tol > 0.0) || !(t.abs_tol > 0.0) || !std::isfinite(t.rel_tol) ||
      !std::isfinite(t.abs_tol))
    throw std::invalid_argument("integration tolerances must be positive");
}

IntegratorOptions sim_options(const SimTols& t, double t_end) {
  check_tols(t);
  IntegratorOptions o;
  o.rel_tol = t.rel_tol;
  o.abs_tol = t.abs_tol;
  o.t_end = t_end;
  return o;
}

// lowest-V stable equilibrium, the resting state of every labeled region
std::optional<Equilibrium> resting_equilibrium(const Params& p) {
  for (const auto& e : find_equilibria(p))
    if (is_stable(e)) return e;
  return std::nullopt;
}

std::optional<Equilibrium> first_saddle(const std::vector<Equilibrium>& eqs) {
  for (const auto& e : eqs)
    if (e.kind == EqKind::saddle) return e;
  return std::nullopt;
}

}  // namespace

const char* region_name(Region r) {
  switch (r) {
    case Region::type_i: return "I";
    case Region::type_ii: return "II";
    case Region::type_iii: return "III";
    case Region::type_iv: return "IV";
    case Region::type_v: return "V";
    case Region::boundary: return "boundary";
    case Region::unclassified: return "unclassified";
  }
  return "unclassified";
}

std::vector<double> tangency_offsets(double v0) {
  if (!std::isfinite(v0)) throw std::invalid_argument("tangency_offsets: non-finite v0");
  // A fold of the branch current at voltage V requires 2*N*n_inf' = 1 - V^2;
  // substituting that N into the branch current and asking for the value I*
  // leaves a single equation h(V) = 0 per tangency.  h has a double root at
  // the pinch voltage V = -1 for every v0 (the transcritical degeneracy), so
  // the scan works on h(V)/(V + 1)^2: its non-pinch roots are the genuine
  // saddle-node offsets, and a root at -1 itself appears exactly where the
  // saddle-node curve crosses the transcritical line (the pitchfork).
  auto reduced = [v0](double v) {
    if (std::abs(v + 1.0) < 1e-9) v += 1e-7;
    double sp = n_inf_prime(v - v0);
    if (sp < 1e-12) return kInf;  // saturated sigmoid: no fold can sit here
    double nv = (1.0 - v * v) / (2.0 * sp);
    double h = nv * nv + v * v * v / 3.0 - v - i_star;
    return h / ((v + 1.0) * (v + 1.0));
  };
  const double lo = -4.0, hi = 3.0;
  const int steps = 3989;
  std::vector<double> roots;
  double prev_v = lo, prev_r = reduced(lo);
  for (int k = 1; k <= steps; ++k) {
    double v = lo + (hi - lo) * k / steps;
    double r = reduced(v);
    if (std::isfinite(prev_r) && std::isfinite(r) && prev_r * r < 0.0) {
      double a = prev_v, b = v, fa = prev_r;
      while (b - a > 1e-12) {
        double m = 0.5 * (a + b);
        double fm = reduced(m);
        if (fa * fm <= 0.0) b = m;
        else { a = m; fa = fm; }
      }
      double vr = 0.5 * (a + b);
      roots.push_back((1.0 - vr * vr) / (2.0 * n_inf_prime(vr - v0)) - n_inf(vr - v0));
    }
    prev_v = v;
    prev_r = r;
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              roots.end());
  return roots;
}

namespace {

// Shared by region_at and chart; the caller supplies the tangency offsets for
// this v0 column so chart columns reuse one solve per column.
RegionLabel label_point(double v0, double n0, double epsilon,
                        const std::vector<double>& offsets) {
  Params p{epsilon, i_star, v0, n0};
  if (!is_valid(p) || epsilon >= 1.0)
    throw std::invalid_argument("region_at: invalid parameters");

  RegionLabel out;
  RegionEvidence& ev = out.evidence;
  ev.delta0 = delta0(p);
  ev.tangency_margin = kInf;
  for (double o : offsets)
    ev.tangency_margin = std::min(ev.tangency_margin, std::abs(n0 - o));
  ev.census = find_equilibria(p);
  for (const auto& e : ev.census)
    if (is_stable(e)) ++ev.stable_count;

  // closed-form destabilization test: the trace vanishes only at +-sqrt(1-eps)
  // and the crossing is a Hopf candidate where the determinant is positive
  double vh = std::sqrt(1.0 - epsilon);
  ev.destabilization_current = kNan;
  for (double v : {-vh, vh}) {
    if (branch_current_dv(p, v) <= 0.0) continue;
    double i = branch_current(p, v);
    if (i > i_star && (!ev.destabilizes || i < ev.destabilization_current)) {
      ev.destabilizes = true;
      ev.destabilization_current = i;
    }
  }
  ev.cycle_current = kNan;

  if (std::abs(ev.delta0) < kBoundaryTol || ev.tangency_margin < kBoundaryTol) {
    out.region = Region::boundary;
    return out;
  }

  const auto& c = ev.census;
  int saddles = 0, unstables = 0;
  const Equilibrium* the_stable = nullptr;
  const Equilibrium* the_saddle = nullptr;
  for (const auto& e : c) {
    if (e.kind == EqKind::saddle) {
      ++saddles;
      the_saddle = &e;
    } else if (is_unstable(e)) {
      ++unstables;
    }
    if (is_stable(e)) the_stable = &e;
  }
  if (c.size() == 3 && ev.stable_count == 1 && saddles == 1 && unstables == 1) {
    // the stable/saddle pair's branch decides the side of the pinch point
    if (the_stable->state.n > 0.0 && the_saddle->state.n > 0.0)
      out.region = Region::type_i;
    else if (the_stable->state.n < 0.0 && the_saddle->state.n < 0.0)
      out.region = Region::type_iv;
    else {
      out.region = Region::unclassified;
      ev.note = "stable/saddle pair straddles the pinch point";
    }
  } else if (c.size() == 3 && ev.stable_count == 2 && saddles == 1) {
    out.region = Region::type_v;
  } else if (c.size() == 1 && ev.stable_count == 1) {
    if (ev.destabilizes) {
      out.region = Region::type_ii;
    } else {
      // nothing ever destabilizes in closed form; a type II label now needs a
      // stable cycle on the bounded scan, otherwise the point is type III
      ev.scan_ceiling = i_star + 2.0;
      for (int k = 1; k <= 64 && !ev.cycle_found; ++k) {
        Params pk = p;
        pk.i_app = i_star + 2.0 * k / 64.0;
        if (find_limit_cycle(pk).status == CycleStatus::cycle) {
          ev.cycle_found = true;
          ev.cycle_current = pk.i_app;
        }
      }
      out.region = ev.cycle_found ? Region::type_ii : Region::type_iii;
    }
  } else {
    out.region = Region::unclassified;
    ev.note = "census of " + std::to_string(c.size()) + " equilibria (" +
              std::to_string(ev.stable_count) + " stable) fits no documented pattern";
  }
  return out;
}

}  // namespace

RegionLabel region_at(double v0, double n0, double epsilon) {
  if (!std::isfinite(v0)) throw std::invalid_argument("region_at: invalid parameters");
  return label_point(v0, n0, epsilon, tangency_offsets(v0));
}

RegionChart chart(const ChartOptions& opt) {
  if (!(opt.v0_lo < opt.v0_hi) || !(opt.n0_lo < opt.n0_hi) || opt.v0_samples < 2 ||
      opt.n0_samples < 2 || !(opt.epsilon > 0.0) || opt.epsilon >= 1.0)
    throw std::invalid_argument("chart: degenerate window or grid");
  double vs = v0_star();
  double ns = n0_star(vs);
  if (vs < opt.v0_lo || vs > opt.v0_hi || ns < opt.n0_lo || ns > opt.n0_hi)
    throw std::invalid_argument("chart: window must contain the pitchfork point");

  RegionChart ch;
  ch.options = opt;
  ch.v0.resize(opt.v0_samples);
  ch.n0.resize(opt.n0_samples);
  for (int i = 0; i < opt.v0_samples; ++i)
    ch.v0[i] = opt.v0_lo + (opt.v0_hi - opt.v0_lo) * i / (opt.v0_samples - 1);
  for (int j = 0; j < opt.n0_samples; ++j)
    ch.n0[j] = opt.n0_lo + (opt.n0_hi - opt.n0_lo) * j / (opt.n0_samples - 1);

  ch.label.resize(static_cast<size_t>(opt.v0_samples) * opt.n0_samples);
  ch.tc_n0.resize(opt.v0_samples);
  ch.sn_n0.resize(opt.v0_samples);
  for (int i = 0; i < opt.v0_samples; ++i) {
    ch.tc_n0[i] = n0_star(ch.v0[i]);
    ch.sn_n0[i] = tangency_offsets(ch.v0[i]);
    for (int j = 0; j < opt.n0_samples; ++j)
      ch.label[static_cast<size_t>(i) * opt.n0_samples + j] =
          label_point(ch.v0[i], ch.n0[j], opt.epsilon, ch.sn_n0[i]).region;
  }
  return ch;
}

std::optional<double> measure_latency(const Params& p_rest, double i_step,
                                      const SimTols& tols) {
  if (!is_valid(p_rest) || !std::isfinite(i_step))
    throw std::invalid_argument("measure_latency: invalid parameters");
  auto rest = resting_equilibrium(p_rest);
  if (!rest) throw std::invalid_argument("measure_latency: no stable resting state");

  Params p = p_rest;
  p.i_app = i_step;
  Trajectory tr = integrate(p, rest->state, sim_options(tols, 100.0 / p.epsilon));
  auto spikes = tr.event_times(EventKind::spike);
  if (spikes.empty()) return std::nullopt;
  return spikes.front();
}

namespace {

// Walks the stored tail for the trough-then-bump shape; start indexes the
// first sample considered part of the sub-threshold tail.
void analyze_tail(const Trajectory& tr, size_t start, AdpRecord& rec) {
  rec.trough_v = kInf;
  size_t trough = 0;
  bool have_trough = false;
  for (size_t k = start + 1; k + 1 < tr.y.size(); ++k) {
    double v = tr.y[k].v;
    if (!have_trough && tr.y[k - 1].v > v && tr.y[k + 1].v > v) {
      have_trough = true;
      trough = k;
      rec.trough_v = v;
      rec.trough_t = tr.t[k];
      continue;
    }
    if (have_trough && tr.y[k - 1].v < v && tr.y[k + 1].v < v) {
      rec.bump_height = v - tr.y[trough].v;
      break;
    }
  }
  if (!have_trough) {
    // monotone tail: record its floor so the verdict still carries a voltage
    for (size_t k = start; k < tr.y.size(); ++k)
      if (tr.y[k].v < rec.trough_v) {
        rec.trough_v = tr.y[k].v;
        rec.trough_t = tr.t[k];
      }
  }
  rec.present = rec.bump_height > kAdpBumpTol;
}

}  // namespace

AdpRecord detect_adp(const Params& p, const SimTols& tols) {
  if (!is_valid(p)) throw std::invalid_argument("detect_adp: invalid parameters");
  auto rest = resting_equilibrium(p);
  if (!rest) throw std::invalid_argument("detect_adp: no stable resting state");

  AdpRecord rec;
  rec.launch = {1.0, rest->state.n};  // voltage lifted to the spike threshold
  Trajectory tr = integrate(p, rec.launch, sim_options(tols, 150.0 / p.epsilon));
  auto spikes = tr.event_times(EventKind::spike);
  if (spikes.empty())
    throw std::runtime_error("detect_adp: perturbation did not elicit a spike");
  if (tr.reason != StopReason::converged)
    throw std::runtime_error("detect_adp: no sub-threshold tail, spiking persists");

  size_t start = tr.y.size();
  for (size_t k = 0; k < tr.y.size(); ++k)
    if (tr.t[k] > spikes.back() && tr.y[k].v < 0.0) {
      start = k;
      break;
    }
  if (start == tr.y.size())
    throw std::runtime_error("detect_adp: tail never returned below zero");
  rec.tail_start = tr.y[start];
  analyze_tail(tr, start, rec);
  return rec;
}

AdpRecord adp_from_state(const Params& p, State post_spike, const SimTols& tols) {
  if (!is_valid(p)) throw std::invalid_argument("adp_from_state: invalid parameters");
  if (!(post_spike.v < 0.0))
    throw std::invalid_argument("adp_from_state: state is not on the sub-threshold tail");

  AdpRecord rec;
  rec.launch = post_spike;
  rec.tail_start = post_spike;
  Trajectory tr = integrate(p, post_spike, sim_options(tols, 150.0 / p.epsilon));
  analyze_tail(tr, 0, rec);
  return rec;
}

namespace {

struct LongRun {
  bool cycle = false;
  State final{0.0, 0.0};
};

// Long-run attractor classification: convergence wins outright; otherwise a
// trajectory carrying at least six spikes whose last four inter-spike
// intervals agree to 1e-3 counts as locked on a cycle.
LongRun long_run(const Params& p, State s0, const SimTols& tols) {
  Trajectory tr = integrate(p, s0, sim_options(tols, 60.0 / p.epsilon));
  LongRun r;
  r.final = tr.y.back();
  if (tr.reason == StopReason::converged) return r;
  auto sp = tr.event_times(EventKind::spike);
  if (sp.size() < 6) return r;
  double isi = sp[sp.size() - 1] - sp[sp.size() - 2];
  r.cycle = true;
  for (size_t k = 2; k <= 4; ++k) {
    double d = sp[sp.size() - k] - sp[sp.size() - k - 1];
    if (std::abs(d - isi) > kCycleLockTol * isi) r.cycle = false;
  }
  return r;
}

bool outcomes_differ(const LongRun& a, const LongRun& b) {
  if (a.cycle != b.cycle) return true;
  if (a.cycle) return false;  // the fold windows carry a single spiking cycle
  return std::hypot(a.final.v - b.final.v, a.final.n - b.final.n) > kStateMatchTol;
}

}  // namespace

std::optional<std::pair<double, double>> bistable_range(const Params& p_base,
                                                        const std::vector<double>& i_grid,
                                                        const SimTols& tols) {
  if (!is_valid(p_base) || i_grid.size() < 2)
    throw std::invalid_argument("bistable_range: need at least two grid currents");
  for (double i : i_grid)
    if (!std::isfinite(i))
      throw std::invalid_argument("bistable_range: non-finite grid current");
  check_tols(tols);

  auto bistable_at = [&](double i) {
    Params p = p_base;
    p.i_app = i;
    auto eqs = find_equilibria(p);
    std::optional<Equilibrium> rest;
    for (const auto& e : eqs)
      if (is_stable(e)) {
        rest = e;
        break;
      }
    auto saddle = first_saddle(eqs);
    State rest_side = rest ? rest->state : State{-2.5, p.n0};
    State far_side = saddle ? State{saddle->state.v + 0.3, saddle->state.n}
                            : State{2.0, p.n0 + 1.0};
    return outcomes_differ(long_run(p, rest_side, tols), long_run(p, far_side, tols));
  };

  std::vector<double> grid = i_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());
  const int samples = static_cast<int>(grid.size());
  std::vector<char> flag(samples);
  for (int k = 0; k < samples; ++k) flag[k] = bistable_at(grid[k]) ? 1 : 0;

  // maximal contiguous bistable run, first one on ties
  int best_a = -1, best_b = -1;
  for (int a = 0; a < samples;) {
    if (!flag[a]) {
      ++a;
      continue;
    }
    int b = a;
    while (b + 1 < samples && flag[b + 1]) ++b;
    if (b - a > best_b - best_a) {
      best_a = a;
      best_b = b;
    }
    a = b + 1;
  }
  if (best_a < 0) return std::nullopt;

  double lo = grid[best_a];
  if (best_a > 0) {
    double out = grid[best_a - 1], in = grid[best_a];
    while (in - out > kEdgeTol) {
      double m = 0.5 * (out + in);
      (bistable_at(m) ? in : out) = m;
    }
    lo = in;
  }
  double hi = grid[best_b];
  if (best_b + 1 < samples) {
    double in = grid[best_b], out = grid[best_b + 1];
    while (out - in > kEdgeTol) {
      double m = 0.5 * (in + out);
      (bistable_at(m) ? in : out) = m;
    }
    hi = in;
  }
  return std::make_pair(lo, hi);
}

std::vector<FiPoint> fi_curve(const Params& p_base, const std::vector<double>& currents,
                              const CycleOptions& opt) {
  if (!is_valid(p_base)) throw std::invalid_argument("fi_curve: invalid parameters");
  std::vector<FiPoint> out;
  out.reserve(currents.size());
  for (double i : currents) {
    if (!std::isfinite(i)) throw std::invalid_argument("fi_curve: non-finite current");
    Params p = p_base;
    p.i_app = i;
    CycleResult r = find_limit_cycle(p, opt);
    FiPoint pt;
    pt.i_app = i;
    pt.status = r.status;
    if (r.status == CycleStatus::cycle) pt.f = 1.0 / r.cycle->period;
    out.push_back(pt);
  }
  return out;
}

SubthresholdRecord subthreshold_response(const Params& p, const SimTols& tols) {
  if (!is_valid(p)) throw std::invalid_argument("subthreshold_response: invalid parameters");
  auto rest = resting_equilibrium(p);
  if (!rest) throw std::invalid_argument("subthreshold_response: no stable resting state");

  SubthresholdRecord rec;
  if (rest->kind != EqKind::stable_focus) return rec;  // node: no-oscillation

  double im = std::abs(rest->eigenvalues[0].imag());
  rec.natural_frequency = im / (2.0 * std::numbers::pi);
  rec.kick = 1e-2;

  double period = 2.0 * std::numbers::pi / im;
  State s0{rest->state.v + rec.kick, rest->state.n};
  Trajectory tr = integrate(p, s0, sim_options(tols, 6.0 * period));
  if (!tr.event_times(EventKind::spike).empty())
    throw std::runtime_error("subthreshold_response: kick elicited a spike");

  // zero crossings of the voltage deviation; spacing of consecutive crossings
  // is half the ringing period
  std::vector<double> crossings;
  double prev_dev = tr.y.front().v - rest->state.v;
  double prev_t = tr.t.front();
  for (size_t k = 1; k < tr.y.size(); ++k) {
    double dev = tr.y[k].v - rest->state.v;
    if (std::abs(dev) > 1e-9 && std::abs(prev_dev) > 1e-9 && prev_dev * dev < 0.0)
      crossings.push_back(prev_t + (tr.t[k] - prev_t) * prev_dev / (prev_dev - dev));
    prev_dev = dev;
    prev_t = tr.t[k];
  }
  rec.alternations = static_cast<int>(crossings.size());
  rec.damped_oscillation = rec.alternations >= 2;
  if (crossings.size() >= 2) {
    double span = crossings.back() - crossings.front();
    rec.fitted_frequency = (crossings.size() - 1) / (2.0 * span);
  }
  return rec;
}

SlopeRecord slope_detection(const Params& p_base, double delta_i, int increments,
                            const SimTols& tols) {
  if (!is_valid(p_base) || !std::isfinite(delta_i) || increments < 1)
    throw std::invalid_argument("slope_detection: invalid protocol");
  auto rest = resting_equilibrium(p_base);
  if (!rest) throw std::invalid_argument("slope_detection: no stable resting state");

  SlopeRecord rec;
  rec.delta_i = delta_i;
  rec.increments = increments;
  rec.hold = 50.0 / p_base.epsilon;
  IntegratorOptions o = sim_options(tols, rec.hold);

  StimulusProtocol step{{{rec.hold, p_base.i_app + delta_i}}};
  rec.step_spikes = static_cast<int>(
      integrate_protocol(p_base, rest->state, step, o).event_times(EventKind::spike).size());

  StimulusProtocol staircase;
  for (int k = 1; k <= increments; ++k)
    staircase.segments.push_back({rec.hold, p_base.i_app + delta_i * k / increments});
  rec.staircase_spikes = static_cast<int>(
      integrate_protocol(p_base, rest->state, staircase, o)
          .event_times(EventKind::spike)
          .size());
  return rec;
}

namespace {

// Current at which the resting branch ends or destabilizes, found by marching
// the lowest-V stable equilibrium upward from I* and bisecting the step that
// loses it.  Tracking by voltage continuity keeps the march on the resting
// branch when other stable states coexist.
double resting_onset(const Params& p_base) {
  const double ceiling = i_star + 3.0;
  const int steps = 128;

  auto track = [&](double i, double near_v) -> std::optional<Equilibrium> {
    Params p = p_base;
    p.i_app = i;
    std::optional<Equilibrium> best;
    for (const auto& e : find_equilibria(p))
      if (is_stable(e) && std::abs(e.state.v - near_v) < 0.25 &&
          (!best || std::abs(e.state.v - near_v) < std::abs(best->state.v - near_v)))
        best = e;
    return best;
  };

  Params p0 = p_base;
  p0.i_app = i_star;
  auto rest = resting_equilibrium(p0);
  if (!rest) return kNan;

  double i_prev = i_star;
  double v_prev = rest->state.v;
  for (int k = 1; k <= steps; ++k) {
    double i = i_star + (ceiling - i_star) * k / steps;
    auto cur = track(i, v_prev);
    if (cur) {
      i_prev = i;
      v_prev = cur->state.v;
      continue;
    }
    double lo = i_prev, hi = i;
    while (hi - lo > 1e-9) {
      double m = 0.5 * (lo + hi);
      auto mid = track(m, v_prev);
      if (mid) {
        lo = m;
        v_prev = mid->state.v;
      } else {
        hi = m;
      }
    }
    return 0.5 * (lo + hi);
  }
  return kInf;  // the resting state survives the whole probed range
}

std::vector<double> half_decades() {
  return {1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1};
}

double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [x, y] : pts) {
    if (!std::isfinite(y) || y <= 0.0) continue;
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kNan;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

SignatureReport signature_battery(const Params& p, const BatteryOptions& opt) {
  if (!is_valid(p)) throw std::invalid_argument("signature_battery: invalid parameters");
  if (opt.bistable_samples < 2 || !(opt.bistable_pad >= 0.0))
    throw std::invalid_argument("signature_battery: invalid options");
  check_tols(opt.tols);
  if (!resting_equilibrium(p))
    throw std::invalid_argument("signature_battery: no stable resting state at baseline");

  BatteryOptions o = opt;
  if (o.latency_deltas.empty()) o.latency_deltas = half_decades();
  if (o.fi_deltas.empty()) o.fi_deltas = half_decades();
  // the default cycle budget is too small for the long periods right above a
  // fold; widen it unless the caller already asked for more
  o.cycle.slow_units = std::max(o.cycle.slow_units, 160.0);

  SignatureReport rep;
  rep.base = p;
  rep.onset_current = resting_onset(p);

  rep.latency_slope = kNan;
  if (std::isfinite(rep.onset_current)) {
    for (double d : o.latency_deltas) {
      auto lat = measure_latency(p, rep.onset_current + d, o.tols);
      rep.latency_curve.emplace_back(d, lat ? *lat : kInf);
    }
    rep.latency_slope = loglog_slope(rep.latency_curve);
  }

  double fi_anchor = std::isfinite(rep.onset_current) ? rep.onset_current : i_star;
  std::vector<double> fi_currents;
  for (double d : o.fi_deltas) fi_currents.push_back(fi_anchor + d);
  rep.fi = fi_curve(p, fi_currents, o.cycle);

  try {
    rep.adp = detect_adp(p, o.tols);
  } catch (const std::runtime_error&) {
    // no spike or no tail at this baseline: the record stays absent
  }

  auto branch = equilibrium_branch(p);
  const BifurcationPoint* up = nullptr;
  const BifurcationPoint* down = nullptr;
  for (const auto& f : branch.folds) {
    if (f.tag == "up") up = &f;
    if (f.tag == "down") down = &f;
  }
  if (up && down) {
    double lo = std::min({i_star, up->i_crit, down->i_crit}) - o.bistable_pad;
    double hi = std::max(up->i_crit, down->i_crit) + o.bistable_pad;
    std::vector<double> grid;
    for (int k = 0; k < o.bistable_samples; ++k)
      grid.push_back(lo + (hi - lo) * k / (o.bistable_samples - 1));
    // a bistable strip can be far narrower than the fold window (it shrinks
    // toward the fold current as epsilon drops), so cluster extra samples on
    // the rest-side flank of each fold
    for (int k = 0; k <= 8; ++k) {
      grid.push_back(down->i_crit - 0.012 + 0.015 * k / 8);
      grid.push_back(up->i_crit - 0.003 + 0.015 * k / 8);
    }
    rep.bistable = bistable_range(p, grid, o.tols);
  }

  try {
    rep.subthreshold = subthreshold_response(p, o.tols);
  } catch (const std::runtime_error&) {
    // kick spiked: leave the no-oscillation record
  }

  rep.slope = slope_detection(p, o.slope_delta_i, o.slope_increments, o.tols);
  return rep;
}

}  // namespace exc
