#pragma once

// Coupling experiments on independent copies: crossings without touching,
// the two-copy monotone coupling, the three-copy convexity coupling and the
// epsilon-approach times.
//
// Paths are read through their skeletons (linear between knots, exact jumps),
// so a gap that changes sign between knots meets zero at the interpolated
// time, and only a jump can carry a gap across zero without touching.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <tuple>
#include <vector>

#include "mshape/condexp.hpp"
#include "mshape/error.hpp"
#include "mshape/model.hpp"
#include "mshape/random.hpp"
#include "mshape/simulate.hpp"

namespace mshape {

inline constexpr double kTouchEps = 1e-9;
inline constexpr double kNever = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Crossing without touching

struct CrossingEvent {
  std::size_t path = 0;
  double time = 0.0;
  double pre_gap = 0.0;   // (Y - Z) just before the jump
  double post_gap = 0.0;  // (Y - Z) at the jump
};

struct CrossScan {
  std::size_t pairs = 0;
  std::size_t violating_pairs = 0;
  std::size_t touching_pairs = 0;
  std::vector<CrossingEvent> events;

  double violation_fraction() const {
    return pairs ? static_cast<double>(violating_pairs) / static_cast<double>(pairs) : 0.0;
  }
};

namespace detail {

inline int strict_sign(double v) { return v > kTouchEps ? 1 : (v < -kTouchEps ? -1 : 0); }

}  // namespace detail

/// Pairs (Y_p, Z_p) over [s, t]. A touch is a knot where |Y - Z| <= 1e-9 or a
/// sign change along a linear piece; a violation is a jump knot whose left and
/// right gaps have strictly opposite signs.
inline CrossScan cross_without_touch_scan(const PathBundle& y, const PathBundle& z, double s, double t) {
  if (!(y.grid() == z.grid())) throw InvalidArgument("cross_without_touch_scan: bundles use different grids");
  if (!(s < t)) throw InvalidArgument("cross_without_touch_scan: need s < t");
  const std::size_t is = y.grid().require_index(s);
  const std::size_t it = y.grid().require_index(t);
  CrossScan out;
  out.pairs = std::min(y.n_paths(), z.n_paths());
  for (std::size_t p = 0; p < out.pairs; ++p) {
    const auto ky = skeleton(y.path(p), is, it);
    const auto kz = skeleton(z.path(p), is, it);
    const std::vector<Knot>* both[] = {&ky, &kz};
    const auto times = merged_knot_times(both);
    SkeletonCursor cy(ky), cz(kz);
    bool touched = false, violated = false;
    double prev = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto [yl, yr] = cy.at(times[k]);
      const auto [zl, zr] = cz.at(times[k]);
      const double gl = yl - zl, gr = yr - zr;
      if (k > 0) {
        const int a = detail::strict_sign(prev), b = detail::strict_sign(gl);
        if (a == 0 || b == 0 || a != b) touched = true;
      }
      if (detail::strict_sign(gr) == 0) touched = true;
      if (gl != gr && detail::strict_sign(gl) * detail::strict_sign(gr) < 0) {
        violated = true;
        out.events.push_back({p, times[k], gl, gr});
      }
      prev = gr;
    }
    if (violated) ++out.violating_pairs;
    if (touched) ++out.touching_pairs;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared machinery for the coupling experiments

namespace detail {

struct Hit {
  double time = kNever;
  std::vector<double> values;  // positions at the hit (or at the end)
  bool at_jump = false;
};

/// First time some entry of gaps(positions) is >= 0, walking the merged knots
/// of several skeletons. Zeros on the linear pieces are located by
/// interpolation; at a jump the post-jump positions are used.
template <class GapFn>
Hit first_hit(const std::vector<std::vector<Knot>>& skels, GapFn&& gaps) {
  std::vector<const std::vector<Knot>*> ptrs;
  for (const auto& s : skels) ptrs.push_back(&s);
  const auto times = merged_knot_times(ptrs);
  std::vector<SkeletonCursor> cur;
  for (const auto& s : skels) cur.emplace_back(s);
  const std::size_t m = skels.size();
  std::vector<double> prev(m), left(m), right(m);

  Hit hit;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t c = 0; c < m; ++c) std::tie(left[c], right[c]) = cur[c].at(times[k]);
    if (k > 0) {
      // Earliest zero of any gap on the linear piece prev -> left.
      const auto g0 = gaps(prev);
      const auto g1 = gaps(left);
      double best = kNever;
      for (std::size_t q = 0; q < g0.size(); ++q)
        if (g1[q] >= 0.0) best = std::min(best, g0[q] >= 0.0 ? 0.0 : g0[q] / (g0[q] - g1[q]));
      if (best != kNever) {
        hit.time = times[k - 1] + best * (times[k] - times[k - 1]);
        hit.values.resize(m);
        for (std::size_t c = 0; c < m; ++c) hit.values[c] = prev[c] + best * (left[c] - prev[c]);
        return hit;
      }
    }
    const auto gr = gaps(right);
    if (std::any_of(gr.begin(), gr.end(), [](double g) { return g >= 0.0; })) {
      hit.time = times[k];
      hit.values = right;
      hit.at_jump = (left != right);
      return hit;
    }
    prev = right;
  }
  hit.values = prev;
  return hit;
}

inline double touch_tolerance(const ProcessSpec& spec, const TimeGrid& grid) {
  const double dt = (grid.back() - grid.front()) / static_cast<double>(grid.steps());
  return std::max(4.0 * sigma_bound(spec) * std::sqrt(dt), kTouchEps);
}

}  // namespace detail

struct CouplingRecord {
  double tau = kNever;  // first meeting time, or infinity when none by T
  double at_tau = 0.0;  // gap (two copies) or M (three copies) at tau
  double terminal = 0.0;  // g(Y_T) - g(X_T), or M at T ^ tau
};

struct CouplingOutcome {
  std::size_t trials = 0;
  std::size_t conditioned = 0;  // trials whose starts are strictly ordered
  std::size_t touched = 0;      // conditioned trials with tau <= T
  std::size_t touch_ok = 0;     // touched trials within the touch tolerance
  double mean = 0.0;
  double se = 0.0;
  double touch_tol = 0.0;
  double min_touch_fraction = 0.99;
  std::vector<CouplingRecord> records;

  double touch_fraction() const {
    return touched ? static_cast<double>(touch_ok) / static_cast<double>(touched) : 1.0;
  }
  bool mean_ok() const { return mean >= -3.0 * se; }
  bool touch_rule_ok() const { return touch_fraction() >= min_touch_fraction; }
  bool pass() const { return mean_ok() && touch_rule_ok(); }
};

// ---------------------------------------------------------------------------
// Two copies

struct TwoCopyConfig {
  double s = 0.0;
  double T = 1.0;
  double x_low = 0.0;   // start of X
  double x_high = 0.5;  // start of Y
  std::size_t n_pairs = 10000;
  std::uint64_t seed = 1;
  std::size_t steps = 200;
  double min_touch_fraction = 0.99;
  SimOptions sim{};
};

/// X from x_low (stream CopyA), Y from x_high (stream CopyB), both on a
/// uniform grid over [s, T]. tau = inf{u >= s : X_u >= Y_u}.
inline CouplingOutcome two_copy_monotone_coupling(const ProcessSpec& spec, const Payoff& g, const TwoCopyConfig& cfg) {
  if (!(cfg.s < cfg.T)) throw InvalidArgument("two_copy_monotone_coupling: need s < T");
  if (cfg.n_pairs < 2 || cfg.steps == 0) throw InvalidArgument("two_copy_monotone_coupling: need n_pairs >= 2");
  const TimeGrid grid = TimeGrid::uniform(cfg.s, cfg.T, cfg.steps);
  CouplingOutcome out;
  out.trials = cfg.n_pairs;
  out.touch_tol = detail::touch_tolerance(spec, grid);
  out.min_touch_fraction = cfg.min_touch_fraction;
  if (!(cfg.x_low < cfg.x_high)) return out;

  RunningStats stats;
  out.records.reserve(cfg.n_pairs);
  const std::size_t last = grid.size() - 1;
  for (std::size_t p = 0; p < cfg.n_pairs; ++p) {
    Engine ea = make_engine(cfg.seed, Stream::CopyA, p);
    Engine eb = make_engine(cfg.seed, Stream::CopyB, p);
    const SamplePath x = simulate_path(spec, grid, cfg.x_low, ea, cfg.sim);
    const SamplePath y = simulate_path(spec, grid, cfg.x_high, eb, cfg.sim);
    std::vector<std::vector<Knot>> sk{skeleton({&grid, x.values, x.jumps}, 0, last),
                                      skeleton({&grid, y.values, y.jumps}, 0, last)};
    const auto hit = detail::first_hit(sk, [](const std::vector<double>& v) { return std::array<double, 1>{v[0] - v[1]}; });

    CouplingRecord rec;
    rec.terminal = g(y.values.back()) - g(x.values.back());
    if (hit.time != kNever) {
      rec.tau = hit.time;
      rec.at_tau = hit.values[0] - hit.values[1];
      ++out.touched;
      if (std::abs(rec.at_tau) <= out.touch_tol) ++out.touch_ok;
    }
    stats.push(rec.terminal);
    out.records.push_back(rec);
  }
  out.conditioned = cfg.n_pairs;
  out.mean = stats.mean;
  out.se = stats.se();
  return out;
}

// ---------------------------------------------------------------------------
// Three copies

struct ThreeCopyConfig {
  double s = 0.0;
  double T = 1.0;
  double x1 = -1.0;
  double x2 = 0.0;
  double x3 = 1.0;
  std::size_t n_triples = 100000;
  std::uint64_t seed = 1;
  std::size_t steps = 200;
  double min_touch_fraction = 0.99;
  SimOptions sim{};
};

/// M = (X3 - X2) h(X1) + (X2 - X1) h(X3) + (X1 - X3) h(X2).
inline double convexity_martingale(double t, double x1, double x2, double x3, const GridFunction& h) {
  return (x3 - x2) * h.eval_at(t, x1) + (x2 - x1) * h.eval_at(t, x3) + (x1 - x3) * h.eval_at(t, x2);
}

/// Copies on streams CopyA, CopyB, CopyC; M is read at T ^ tau with
/// tau = inf{u >= s : X1_u >= X2_u or X2_u >= X3_u}. At a touch the rule is
/// |M_tau| <= touch_tol * L * (X3 - X1) at s, with L the larger slope bound of h.
inline CouplingOutcome three_copy_convexity_coupling(const ProcessSpec& spec, const GridFunction& h,
                                                     const ThreeCopyConfig& cfg) {
  if (!(cfg.x1 < cfg.x2 && cfg.x2 < cfg.x3)) throw InvalidArgument("three_copy_convexity_coupling: need x1 < x2 < x3");
  if (!(cfg.s < cfg.T)) throw InvalidArgument("three_copy_convexity_coupling: need s < T");
  if (cfg.n_triples < 2 || cfg.steps == 0) throw InvalidArgument("three_copy_convexity_coupling: need n_triples >= 2");
  if (cfg.s < h.tgrid().front() || cfg.T > h.tgrid().back())
    throw InvalidArgument("three_copy_convexity_coupling: [s, T] outside the surface");

  const TimeGrid grid = TimeGrid::uniform(cfg.s, cfg.T, cfg.steps);
  CouplingOutcome out;
  out.trials = out.conditioned = cfg.n_triples;
  out.min_touch_fraction = cfg.min_touch_fraction;
  const double slope = h.slopes() ? std::max({std::abs(h.slopes()->lo), std::abs(h.slopes()->hi), 1.0}) : 1.0;
  const double scale = slope * (cfg.x3 - cfg.x1);
  out.touch_tol = detail::touch_tolerance(spec, grid) * scale;

  RunningStats stats;
  out.records.reserve(cfg.n_triples);
  const std::size_t last = grid.size() - 1;
  auto gaps = [](const std::vector<double>& v) { return std::array<double, 2>{v[0] - v[1], v[1] - v[2]}; };
  for (std::size_t p = 0; p < cfg.n_triples; ++p) {
    Engine e1 = make_engine(cfg.seed, Stream::CopyA, p);
    Engine e2 = make_engine(cfg.seed, Stream::CopyB, p);
    Engine e3 = make_engine(cfg.seed, Stream::CopyC, p);
    const SamplePath a = simulate_path(spec, grid, cfg.x1, e1, cfg.sim);
    const SamplePath b = simulate_path(spec, grid, cfg.x2, e2, cfg.sim);
    const SamplePath c = simulate_path(spec, grid, cfg.x3, e3, cfg.sim);
    std::vector<std::vector<Knot>> sk{skeleton({&grid, a.values, a.jumps}, 0, last),
                                      skeleton({&grid, b.values, b.jumps}, 0, last),
                                      skeleton({&grid, c.values, c.jumps}, 0, last)};
    const auto hit = detail::first_hit(sk, gaps);

    CouplingRecord rec;
    if (hit.time != kNever) {
      rec.tau = hit.time;
      rec.at_tau = convexity_martingale(hit.time, hit.values[0], hit.values[1], hit.values[2], h);
      rec.terminal = rec.at_tau;
      ++out.touched;
      if (std::abs(rec.at_tau) <= out.touch_tol) ++out.touch_ok;
    } else {
      rec.terminal = convexity_martingale(cfg.T, a.values.back(), b.values.back(), c.values.back(), h);
    }
    stats.push(rec.terminal);
    out.records.push_back(rec);
  }
  out.mean = stats.mean;
  out.se = stats.se();
  return out;
}

// ---------------------------------------------------------------------------
// Epsilon-approach times

struct ApproachTimes {
  std::vector<std::size_t> n;  // sorted ascending
  std::vector<double> t_n;     // first knot time with Y + 1/n >= Z (inf if none)
  double t = kNever;           // first knot time with Y >= Z
  bool monotone = true;        // t_n nondecreasing in n
  bool bounded = true;         // t_n <= t for every n
  bool jump_at_t = false;      // a jump happens at t and Y_t != Z_t
  bool strict = true;          // t_n < t for every n (meaningful when jump_at_t)
};

/// Scans knot times (grid times in [t_s, end] and jump times of either path)
/// using values at those times. If Y_s >= Z_s already, every time is t_s.
inline ApproachTimes epsilon_approach_times(const PathView& y, const PathView& z, std::size_t s_idx,
                                            std::vector<std::size_t> n_list) {
  if (y.grid == nullptr || z.grid == nullptr || !(*y.grid == *z.grid))
    throw InvalidArgument("epsilon_approach_times: paths use different grids");
  if (std::find(n_list.begin(), n_list.end(), std::size_t{0}) != n_list.end())
    throw InvalidArgument("epsilon_approach_times: n must be positive");
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());

  const std::size_t last = y.grid->size() - 1;
  const auto ky = skeleton(y, s_idx, last);
  const auto kz = skeleton(z, s_idx, last);
  const std::vector<Knot>* both[] = {&ky, &kz};
  const auto times = merged_knot_times(both);
  SkeletonCursor cy(ky), cz(kz);

  ApproachTimes out;
  out.n = n_list;
  out.t_n.assign(n_list.size(), kNever);
  std::size_t pending = 0;  // 1/n descends along n_list, so thresholds are met in list order
  double gap_at_t = 0.0;
  bool jump_here = false;
  for (double u : times) {
    const auto [yl, yr] = cy.at(u);
    const auto [zl, zr] = cz.at(u);
    const double gap = zr - yr;  // Z - Y
    while (pending < n_list.size() && gap <= 1.0 / static_cast<double>(n_list[pending]) + 1e-12) {
      out.t_n[pending++] = u;
    }
    if (gap <= 1e-12) {
      out.t = u;
      gap_at_t = gap;
      jump_here = (yl != yr) || (zl != zr);
      break;
    }
  }
  for (std::size_t k = 1; k < out.t_n.size(); ++k) out.monotone = out.monotone && out.t_n[k] >= out.t_n[k - 1];
  for (double v : out.t_n) out.bounded = out.bounded && v <= out.t;
  out.jump_at_t = jump_here && std::abs(gap_at_t) > kTouchEps;
  for (double v : out.t_n) out.strict = out.strict && v < out.t;
  return out;
}

}  // namespace mshape
