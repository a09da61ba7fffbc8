#include "exc/continuation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "exc/dynamics.hpp"
#include "exc/model.hpp"

namespace exc {
namespace {

constexpr double kFoldVTol = 1e-12;
constexpr double kHopfVTol = 1e-12;
constexpr double kFoldMergeTol = 1e-9;
constexpr double kGapBisectTol = 1e-10;
constexpr double kHuntTol = 1e-4;
constexpr double kSnicProbeShift = 1e-3;
constexpr double kSnicProximity = 0.05;
constexpr double kCycleClosureTol = 1e-5;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Params at_current(Params p, double i) {
  p.i_app = i;
  return p;
}

// tr J on the branch graph; the n-row contributes only -epsilon there
double trace_on_branch(const Params& p, double v) {
  return 1.0 - v * v - p.epsilon;
}

double bisect_sign_change(double lo, double hi, double flo, double tol,
                          const std::function<double(double)>& f) {
  for (int i = 0; i < 200 && hi - lo > tol; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double min_distance(const Trajectory& tr, const State& target, size_t from) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t k = from; k < tr.y.size(); ++k) {
    double d = std::hypot(tr.y[k].v - target.v, tr.y[k].n - target.n);
    best = std::min(best, d);
  }
  return best;
}

int spike_count_before(const Trajectory& tr, double t_cut) {
  int c = 0;
  for (const auto& e : tr.events)
    if (e.kind == EventKind::spike && e.t <= t_cut) ++c;
  return c;
}

const Event* stopping_cross(const Trajectory& tr) {
  for (auto it = tr.events.rbegin(); it != tr.events.rend(); ++it)
    if (it->kind == EventKind::section_cross) return &*it;
  return nullptr;
}

// The arcs anchor at the lowest-V saddle, the one adjacent to the resting
// state; censuses with two saddles only occur in micro-fold windows where
// the upper saddle plays no role in the return loop.
const Equilibrium* anchor_saddle(const std::vector<Equilibrium>& eqs) {
  for (const auto& e : eqs)
    if (e.kind == EqKind::saddle) return &e;
  return nullptr;
}

void check_gap_options(const GapOptions& o) {
  if (!std::isfinite(o.rho) || o.rho >= 0.0)
    throw std::invalid_argument("section height rho must be finite and negative");
  if (!(o.v_lo < o.v_hi))
    throw std::invalid_argument("section window must satisfy v_lo < v_hi");
  if (!(o.seed_offset >= 1e-8) || !(o.seed_offset <= 1e-3))
    throw std::invalid_argument("manifold seed offset outside [1e-8, 1e-3]");
  if (!(o.t_end > 0.0))
    throw std::invalid_argument("gap budget t_end must be positive");
}

}  // namespace

EquilibriumBranch equilibrium_branch(const Params& p_base, double v_lo,
                                     double v_hi, int resolution) {
  if (!is_valid(p_base)) throw std::invalid_argument("invalid model parameters");
  if (!std::isfinite(v_lo) || !std::isfinite(v_hi) || !(v_lo < v_hi))
    throw std::invalid_argument("branch range must satisfy v_lo < v_hi");
  if (resolution < 2)
    throw std::invalid_argument("branch resolution must be >= 2");

  EquilibriumBranch out;
  out.points.reserve(resolution);
  auto grid_v = [&](int k) {
    return v_lo + (v_hi - v_lo) * k / (resolution - 1);
  };

  double dv_prev = 0.0;
  double tr_prev = 0.0;
  for (int k = 0; k < resolution; ++k) {
    double v = grid_v(k);
    double i = branch_current(p_base, v);
    Params p = at_current(p_base, i);
    out.points.push_back({i, classify_equilibrium(p, {v, n_nullcline(p, v)})});

    double dv_cur = branch_current_dv(p_base, v);
    double tr_cur = trace_on_branch(p_base, v);
    if (k > 0) {
      double vp = grid_v(k - 1);
      if ((dv_prev < 0.0) != (dv_cur < 0.0)) {
        double vf = bisect_sign_change(vp, v, dv_prev, kFoldVTol, [&](double x) {
          return branch_current_dv(p_base, x);
        });
        BifurcationPoint f;
        f.kind = BifKind::saddle_node;
        f.i_crit = branch_current(p_base, vf);
        f.location = {vf, n_nullcline(p_base, vf)};
        f.residual = std::abs(branch_current_dv(p_base, vf));
        if (out.folds.empty() ||
            std::abs(out.folds.back().location.v - vf) > kFoldMergeTol)
          out.folds.push_back(std::move(f));
      }
      if ((tr_prev < 0.0) != (tr_cur < 0.0)) {
        double vh = bisect_sign_change(vp, v, tr_prev, kHopfVTol, [&](double x) {
          return trace_on_branch(p_base, x);
        });
        // a trace zero is a Hopf candidate only off the saddle segment
        if (p_base.epsilon * branch_current_dv(p_base, vh) > 0.0) {
          BifurcationPoint h;
          h.kind = BifKind::hopf;
          h.i_crit = branch_current(p_base, vh);
          h.location = {vh, n_nullcline(p_base, vh)};
          h.residual = std::abs(trace_on_branch(p_base, vh));
          out.hopf.push_back(std::move(h));
        }
      }
    }
    dv_prev = dv_cur;
    tr_prev = tr_cur;
  }

  // the lowest-V fold terminates the rest branch and the highest-V fold
  // births the excited branch; interior folds bound middle segments only
  if (out.folds.size() >= 2) {
    auto by_v = [](const BifurcationPoint& x, const BifurcationPoint& y) {
      return x.location.v < y.location.v;
    };
    std::min_element(out.folds.begin(), out.folds.end(), by_v)->tag = "down";
    std::max_element(out.folds.begin(), out.folds.end(), by_v)->tag = "up";
  }
  return out;
}

CycleResult find_limit_cycle(const Params& p, const CycleOptions& opt) {
  if (!is_valid(p)) throw std::invalid_argument("invalid model parameters");
  if (opt.needed_intervals < 2 || !(opt.rel_isi_tol > 0.0) ||
      !(opt.slow_units > 0.0) || !std::isfinite(opt.launch_v))
    throw std::invalid_argument("cycle search options out of range");

  IntegratorOptions io;
  io.rel_tol = 1e-10;
  io.abs_tol = 1e-12;
  io.t_end = opt.slow_units / p.epsilon;
  Trajectory tr = integrate(p, {opt.launch_v, p.n0 + 1.0}, io);

  CycleResult res;
  if (tr.reason == StopReason::converged) {
    res.status = CycleStatus::absent;
    return res;
  }
  if (tr.reason != StopReason::reached_t_end) return res;  // ambiguous

  std::vector<const Event*> spikes;
  for (const auto& e : tr.events)
    if (e.kind == EventKind::spike) spikes.push_back(&e);
  int need = opt.needed_intervals;
  if (static_cast<int>(spikes.size()) < need + 1) return res;

  double period = spikes.back()->t - spikes[spikes.size() - 2]->t;
  for (size_t k = spikes.size() - need; k < spikes.size(); ++k) {
    double isi = spikes[k]->t - spikes[k - 1]->t;
    if (std::abs(isi - period) > opt.rel_isi_tol * period) return res;
  }

  // one clean period from the settled upstroke; the endpoint must return to
  // the start, otherwise the trailing intervals only looked periodic
  IntegratorOptions po = io;
  po.t_end = period;
  Trajectory orbit = integrate(p, spikes.back()->state, po);
  if (orbit.y.empty()) return res;
  double closure = std::hypot(orbit.y.back().v - orbit.y.front().v,
                              orbit.y.back().n - orbit.y.front().n);
  if (closure > kCycleClosureTol) return res;

  LimitCycle lc;
  lc.i_app = p.i_app;
  lc.period = period;
  lc.v_min = std::numeric_limits<double>::infinity();
  lc.v_max = -lc.v_min;
  for (const auto& s : orbit.y) {
    lc.v_min = std::min(lc.v_min, s.v);
    lc.v_max = std::max(lc.v_max, s.v);
  }
  lc.orbit = std::move(orbit);
  res.status = CycleStatus::cycle;
  res.cycle = std::move(lc);
  return res;
}

bool detect_snic(const Params& p, const BifurcationPoint& fold) {
  if (fold.kind != BifKind::saddle_node && fold.kind != BifKind::snic)
    throw std::invalid_argument("detect_snic needs a fold point");
  CycleResult r = find_limit_cycle(at_current(p, fold.i_crit + kSnicProbeShift));
  if (r.status != CycleStatus::cycle) return false;
  return min_distance(r.cycle->orbit, fold.location, 0) < kSnicProximity;
}

SectionGap section_gap(const Params& p, const GapOptions& opt) {
  if (!is_valid(p)) throw std::invalid_argument("invalid model parameters");
  check_gap_options(opt);

  SectionGap out;
  out.rho = opt.rho;
  out.q_a = out.q_r = out.gap = kNan;

  auto eqs = find_equilibria(p);
  const Equilibrium* sad = anchor_saddle(eqs);
  if (sad == nullptr) {
    out.status = GapStatus::absent;
    return out;
  }

  IntegratorOptions au;
  au.rel_tol = 1e-10;
  au.abs_tol = 1e-12;
  au.t_end = opt.t_end;
  au.section = Section{opt.rho, opt.v_lo, opt.v_hi, -1, true};

  Trajectory ua =
      manifold_arc(p, {*sad, ManifoldDirection::unstable_plus, opt.seed_offset}, au);
  if (ua.reason == StopReason::section_stop) {
    const Event* cross = stopping_cross(ua);
    // a crossing that only happens on a second excursion means the loop has
    // already opened past the section
    if (cross == nullptr || spike_count_before(ua, cross->t) >= 2) {
      out.status = GapStatus::respike;
      return out;
    }
    out.q_a = cross->state.v;
  } else if (ua.reason == StopReason::converged) {
    out.status = GapStatus::converged;
    return out;
  } else if (ua.reason == StopReason::reached_t_end &&
             spike_count_before(ua, au.t_end) >= 2) {
    out.status = GapStatus::respike;
    return out;
  } else {
    out.status = GapStatus::lost;
    return out;
  }

  // backward stable arc: the loop closes through whichever side reaches the
  // section first, so both are continued and the earliest crossing wins
  IntegratorOptions as = au;
  as.section->direction = 0;
  double best_t = std::numeric_limits<double>::infinity();
  for (auto dir : {ManifoldDirection::stable_plus, ManifoldDirection::stable_minus}) {
    Trajectory sa = manifold_arc(p, {*sad, dir, opt.seed_offset}, as);
    if (sa.reason != StopReason::section_stop) continue;
    const Event* cross = stopping_cross(sa);
    if (cross != nullptr && cross->t < best_t) {
      best_t = cross->t;
      out.q_r = cross->state.v;
    }
  }
  if (!std::isfinite(best_t)) {
    out.q_a = kNan;
    out.status = GapStatus::lost;
    return out;
  }

  out.gap = out.q_a - out.q_r;
  out.status = GapStatus::ok;
  return out;
}

int gap_sign(const SectionGap& g) {
  switch (g.status) {
    case GapStatus::ok:
      return (g.gap > 0.0) - (g.gap < 0.0);
    case GapStatus::respike:
      return 1;
    case GapStatus::converged:
      return -1;
    default:
      return 0;
  }
}

std::optional<HomoclinicResult> find_homoclinic(const Params& p_base,
                                                double i_lo, double i_hi,
                                                const GapOptions& opt) {
  if (!is_valid(p_base)) throw std::invalid_argument("invalid model parameters");
  check_gap_options(opt);
  if (!std::isfinite(i_lo) || !std::isfinite(i_hi) || !(i_lo < i_hi))
    throw std::invalid_argument("homoclinic bracket must satisfy i_lo < i_hi");

  auto sign_at = [&](double i) {
    return gap_sign(section_gap(at_current(p_base, i), opt));
  };

  // locate one closed-side (-1) and one open-side (+1) sample; measurements
  // go signless near a fold, where both saddle eigenvalues collapse and the
  // arcs stall, so a plain endpoint check is not enough
  double neg = kNan;
  double pos = kNan;
  for (int k = 0; k < 5; ++k) {
    double x = i_lo + (i_hi - i_lo) * k / 4.0;
    int s = sign_at(x);
    if (s == -1 && std::isnan(pos)) neg = x;
    if (s == +1 && std::isnan(pos)) pos = x;
  }
  if (std::isnan(neg)) return std::nullopt;
  if (std::isnan(pos)) {
    // hunt between the last closed sample and the top, stepping the top
    // down through signless ground
    double lo = neg;
    double hi = i_hi;
    while (hi - lo > kHuntTol) {
      double mid = 0.5 * (lo + hi);
      int s = sign_at(mid);
      if (s == +1) {
        pos = mid;
        break;
      }
      if (s == -1) {
        lo = mid;
        neg = mid;
      } else {
        hi = mid;
      }
    }
    if (std::isnan(pos)) return std::nullopt;  // no sign change: bracket invalid
  }

  // validate monotone sign order inside the isolated bracket; a violation
  // shrinks to the leftmost transition
  double a = neg;
  double b = pos;
  for (int round = 0; round < 3; ++round) {
    std::array<double, 5> xs;
    std::array<int, 5> ss;
    for (int k = 0; k < 5; ++k) {
      xs[k] = a + (b - a) * k / 4.0;
      ss[k] = sign_at(xs[k]);
    }
    bool ordered = true;
    int prev = 0;
    int prev_k = 0;
    bool found = false;
    for (int k = 0; k < 5; ++k) {
      if (ss[k] == 0) continue;  // signless sample; skip
      if (prev != 0) {
        if (ss[k] < prev) ordered = false;
        if (prev < 0 && ss[k] > 0 && !found) {
          a = xs[prev_k];
          b = xs[k];
          found = true;
        }
      }
      prev = ss[k];
      prev_k = k;
    }
    if (!found) return std::nullopt;
    if (ordered) break;
  }

  while (b - a > kGapBisectTol) {
    double mid = 0.5 * (a + b);
    int s = sign_at(mid);
    if (s == 0) {
      for (double f : {0.125, -0.125, 0.3, -0.3}) {
        double alt = mid + f * (b - a);
        int sa = sign_at(alt);
        if (sa != 0) {
          mid = alt;
          s = sa;
          break;
        }
      }
      if (s == 0)
        throw std::runtime_error("section lost throughout the gap bracket");
    }
    if (s < 0)
      a = mid;
    else
      b = mid;
  }
  double i_crit = 0.5 * (a + b);

  Params pc = at_current(p_base, i_crit);
  auto eqs = find_equilibria(pc);
  const Equilibrium* sad = anchor_saddle(eqs);
  if (sad == nullptr)
    throw std::runtime_error("saddle vanished at the bisected current");

  // near-closed loop, spliced from both manifold arcs on a section strictly
  // between the saddle and the strip floor (where the gap closes
  // continuously).  Forward shooting alone cannot end near the saddle: the
  // stable rate is much weaker than the unstable one, so the return pass
  // distance scales like a tiny power of the current offset.  The spliced
  // loop instead ends at the stable seed, one offset from the saddle.
  double rho_loop = 0.5 * sad->state.n;
  IntegratorOptions lu;
  lu.rel_tol = 1e-10;
  lu.abs_tol = 1e-12;
  lu.t_end = opt.t_end;
  lu.section = Section{rho_loop, opt.v_lo, opt.v_hi, -1, true};
  Trajectory loop = manifold_arc(
      pc, {*sad, ManifoldDirection::unstable_plus, opt.seed_offset}, lu);
  if (loop.reason != StopReason::section_stop)
    throw std::runtime_error("unstable arc missed the loop section");

  IntegratorOptions ls = lu;
  ls.section->direction = 0;
  Trajectory back;
  double t_back = std::numeric_limits<double>::infinity();
  for (auto dir : {ManifoldDirection::stable_plus, ManifoldDirection::stable_minus}) {
    Trajectory sa = manifold_arc(pc, {*sad, dir, opt.seed_offset}, ls);
    if (sa.reason != StopReason::section_stop) continue;
    const Event* cross = stopping_cross(sa);
    if (cross != nullptr && cross->t < t_back) {
      t_back = cross->t;
      back = std::move(sa);
    }
  }
  if (!std::isfinite(t_back))
    throw std::runtime_error("stable arc missed the loop section");

  // the stable arc was integrated backward from its seed; appended in
  // reverse it carries the loop from the section back to the saddle
  double t_join = loop.t.back();
  double t_end_back = back.t.back();
  for (size_t m = back.y.size(); m-- > 0;) {
    loop.t.push_back(t_join + (t_end_back - back.t[m]));
    loop.y.push_back(back.y[m]);
  }

  HomoclinicResult out;
  out.point.kind = BifKind::homoclinic;
  out.point.i_crit = i_crit;
  out.point.location = sad->state;
  out.point.residual = b - a;
  out.closure = std::hypot(loop.y.back().v - sad->state.v,
                           loop.y.back().n - sad->state.n);
  out.loop = std::move(loop);
  return out;
}

BifurcationDiagram bifurcation_diagram(const Params& p_base, double i_lo,
                                       double i_hi, int cycle_resolution) {
  if (!is_valid(p_base)) throw std::invalid_argument("invalid model parameters");
  if (!std::isfinite(i_lo) || !std::isfinite(i_hi) || !(i_lo < i_hi))
    throw std::invalid_argument("current range must satisfy i_lo < i_hi");
  if (cycle_resolution < 2)
    throw std::invalid_argument("cycle resolution must be >= 2");

  BifurcationDiagram d;
  EquilibriumBranch full = equilibrium_branch(p_base);
  for (auto& bp : full.points)
    if (bp.i_app >= i_lo && bp.i_app <= i_hi) d.branch.points.push_back(bp);
  for (auto& f : full.folds)
    if (f.i_crit >= i_lo && f.i_crit <= i_hi) d.branch.folds.push_back(f);
  for (auto& h : full.hopf)
    if (h.i_crit >= i_lo && h.i_crit <= i_hi) d.branch.hopf.push_back(h);

  for (auto& f : d.branch.folds) {
    f.snic = detect_snic(p_base, f);
    d.points.push_back(f);
  }
  for (const auto& h : d.branch.hopf) d.points.push_back(h);

  // the saddle loop, when present, sits between the organizing current and
  // the first fold beyond it
  const double i_star = 2.0 / 3.0;
  double hom_hi = i_hi;
  for (const auto& f : d.branch.folds)
    if (f.i_crit > i_star) hom_hi = std::min(hom_hi, f.i_crit - 1e-6);
  double hom_lo = std::max(i_lo, i_star - 0.05);
  if (hom_lo < hom_hi) {
    auto hom = find_homoclinic(p_base, hom_lo, hom_hi);
    if (hom.has_value()) d.points.push_back(hom->point);
  }

  d.cycles.reserve(cycle_resolution);
  for (int k = 0; k < cycle_resolution; ++k) {
    double i = i_lo + (i_hi - i_lo) * k / (cycle_resolution - 1);
    CycleResult r = find_limit_cycle(at_current(p_base, i));
    CycleBranchPoint cb;
    cb.i_app = i;
    cb.status = r.status;
    if (r.status == CycleStatus::cycle) {
      cb.period = r.cycle->period;
      cb.v_min = r.cycle->v_min;
      cb.v_max = r.cycle->v_max;
    }
    d.cycles.push_back(cb);
  }

  if (d.branch.folds.size() >= 2) {
    double f_lo = std::numeric_limits<double>::infinity();
    double f_hi = -f_lo;
    for (const auto& f : d.branch.folds) {
      f_lo = std::min(f_lo, f.i_crit);
      f_hi = std::max(f_hi, f.i_crit);
    }
    bool within = false;
    for (const auto& h : d.branch.hopf)
      within = within || (h.i_crit > f_lo && h.i_crit < f_hi);
    d.scenario = d.branch.hopf.empty()
                     ? "no-hopf"
                     : (within ? "hopf-within-bistable" : "hopf-beyond-bistable");
  }
  return d;
}

}  // namespace exc
