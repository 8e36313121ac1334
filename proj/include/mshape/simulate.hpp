#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "mshape/error.hpp"
#include "mshape/grid.hpp"
#include "mshape/model.hpp"
#include "mshape/random.hpp"

namespace mshape {

/// A jump of one path at an exact (not grid-rounded) time.
struct JumpEvent {
  double time = 0.0;
  double left = 0.0;   // X_{t-}
  double right = 0.0;  // X_t
};

struct SamplePath {
  std::vector<double> values;  // one value per grid time
  std::vector<JumpEvent> jumps;
};

struct SimOptions {
  /// Euler step for state-dependent coefficients; 0 selects horizon / 2000.
  double euler_dt = 0.0;
  /// Step of the Brownian clock driving the counterexample before t = 1.
  double clock_dt = 1e-4;
};

namespace detail {

inline double euler_step(const TimeGrid& grid, const SimOptions& opts) {
  if (opts.euler_dt > 0.0) return opts.euler_dt;
  return std::max(grid.back(), grid.back() - grid.front()) / 2000.0;
}

// Diffusion, compensated Poisson and jump diffusion share one representation:
//   X_t = x_start + W_t + jump_size * N_t + drift * (t - t_0)
// where W is the Euler (or exact, for constant sigma) diffusion part and N the
// jump count driven by exponential clocks.
inline SamplePath simulate_jump_diffusion(const ProcessSpec& spec, const TimeGrid& grid, double x_start,
                                          Engine& eng, const SimOptions& opts) {
  SamplePath path;
  path.values.resize(grid.size());
  path.values[0] = x_start;

  const double t0 = grid.front();
  const double drift = spec.drift();
  const double jump = spec.jump_size;
  const bool has_jumps = spec.has_jumps();
  const bool exact = sigma_is_constant(spec);
  const bool no_diffusion = spec.kind == ProcessKind::CompensatedPoisson;
  const double dt_max = euler_step(grid, opts);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> clock(has_jumps ? spec.intensity : 1.0);

  double w = 0.0;
  long long count = 0;
  double t = t0;
  auto value = [&](double at) { return x_start + w + jump * static_cast<double>(count) + drift * (at - t0); };

  auto diffuse_to = [&](double t_end) {
    if (no_diffusion || t_end <= t) {
      t = std::max(t, t_end);
      return;
    }
    if (exact) {
      const double s = eval_sigma(spec, t, value(t));
      w += s * std::sqrt(t_end - t) * normal(eng);
      t = t_end;
      return;
    }
    const auto k = std::max<long long>(1, static_cast<long long>(std::ceil((t_end - t) / dt_max - 1e-9)));
    const double h = (t_end - t) / static_cast<double>(k);
    const double sqrt_h = std::sqrt(h);
    for (long long s = 0; s < k; ++s) {
      const double sig = eval_sigma(spec, t, value(t));
      w += sig * sqrt_h * normal(eng);
      t += h;
    }
    t = t_end;
  };

  double next_jump = has_jumps ? t0 + clock(eng) : std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    while (next_jump <= grid[i]) {
      diffuse_to(next_jump);
      const double left = value(next_jump);
      ++count;
      const double right = value(next_jump);
      path.jumps.push_back({next_jump, left, right});
      next_jump += clock(eng);
    }
    diffuse_to(grid[i]);
    path.values[i] = value(grid[i]);
  }
  return path;
}

// The counterexample: B on its own clock u = t/(1-t) until |B| reaches 1
// (crossing located by linear bracketing), frozen at +-1 until t = 1, then a
// unit Brownian motion.
inline SamplePath simulate_counterexample(const TimeGrid& grid, double x_start, Engine& eng,
                                          const SimOptions& opts) {
  SamplePath path;
  path.values.resize(grid.size());
  path.values[0] = x_start;
  std::normal_distribution<double> normal(0.0, 1.0);

  double t = grid.front();
  double x = x_start;
  const double du_max = opts.clock_dt > 0.0 ? opts.clock_dt : 1e-4;

  auto advance_to = [&](double target) {
    if (t < 1.0 && std::abs(x) < 1.0) {
      double u = t / (1.0 - t);
      const double u_target = target < 1.0 ? target / (1.0 - target) : std::numeric_limits<double>::infinity();
      bool absorbed = false;
      while (u < u_target) {
        const double du = std::min(du_max, u_target - u);
        const double next = x + std::sqrt(du) * normal(eng);
        if (std::abs(next) >= 1.0) {
          const double edge = next > 0.0 ? 1.0 : -1.0;
          const double u_hit = u + du * (edge - x) / (next - x);
          x = edge;
          t = u_hit / (1.0 + u_hit);
          absorbed = true;
          break;
        }
        x = next;
        u += du;
      }
      if (!absorbed) {
        t = target;
        return;
      }
    }
    if (t < 1.0) {
      if (target <= 1.0) {
        t = target;
        return;
      }
      t = 1.0;
    }
    if (target > t) x += std::sqrt(target - t) * normal(eng);
    t = target;
  };

  for (std::size_t i = 1; i < grid.size(); ++i) {
    advance_to(grid[i]);
    path.values[i] = x;
  }
  return path;
}

}  // namespace detail

/// One cadlag sample path on `grid`, started at (grid.front(), x_start).
inline SamplePath simulate_path(const ProcessSpec& spec, const TimeGrid& grid, double x_start, Engine& eng,
                                const SimOptions& opts = {}) {
  if (!std::isfinite(x_start)) throw InvalidArgument("simulate_path: start value must be finite");
  if (spec.kind == ProcessKind::Counterexample) return detail::simulate_counterexample(grid, x_start, eng, opts);
  return detail::simulate_jump_diffusion(spec, grid, x_start, eng, opts);
}

/// Non-owning view of one path of a bundle.
struct PathView {
  const TimeGrid* grid = nullptr;
  std::span<const double> values;
  std::span<const JumpEvent> jumps;
};

class PathBundle {
 public:
  PathBundle(ProcessSpec spec, TimeGrid grid, std::uint64_t seed, double x_start, std::vector<SamplePath> paths)
      : spec_(std::move(spec)), grid_(std::move(grid)), seed_(seed), x_start_(x_start) {
    n_ = paths.size();
    values_.reserve(n_ * grid_.size());
    jumps_.reserve(n_);
    for (auto& p : paths) {
      if (p.values.size() != grid_.size()) throw InvalidArgument("PathBundle: path length does not match grid");
      values_.insert(values_.end(), p.values.begin(), p.values.end());
      jumps_.push_back(std::move(p.jumps));
    }
  }

  const ProcessSpec& spec() const { return spec_; }
  const TimeGrid& grid() const { return grid_; }
  std::uint64_t seed() const { return seed_; }
  double x_start() const { return x_start_; }
  std::size_t n_paths() const { return n_; }
  bool empty() const { return n_ == 0; }

  double value(std::size_t path, std::size_t i) const { return values_[path * grid_.size() + i]; }
  std::span<const double> row(std::size_t path) const {
    return std::span<const double>(values_).subspan(path * grid_.size(), grid_.size());
  }
  std::span<const JumpEvent> jumps(std::size_t path) const { return jumps_[path]; }
  PathView path(std::size_t p) const { return {&grid_, row(p), jumps(p)}; }

  std::vector<double> column(std::size_t i) const {
    std::vector<double> c(n_);
    for (std::size_t p = 0; p < n_; ++p) c[p] = value(p, i);
    return c;
  }

  std::size_t total_jumps() const {
    std::size_t n = 0;
    for (const auto& j : jumps_) n += j.size();
    return n;
  }

 private:
  ProcessSpec spec_;
  TimeGrid grid_;
  std::uint64_t seed_;
  double x_start_;
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::vector<std::vector<JumpEvent>> jumps_;
};

/// Path p draws from the stream (seed, Paths, p); bundles are reproducible
/// and the first n paths do not depend on the bundle size.
inline PathBundle generate_paths(const ProcessSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                 std::uint64_t seed, const SimOptions& opts = {},
                                 std::optional<double> x_start = std::nullopt) {
  if (n_paths == 0) throw InvalidArgument("generate_paths: n_paths must be positive");
  const double x = x_start.value_or(spec.x0);
  std::vector<SamplePath> paths;
  paths.reserve(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    Engine eng = make_engine(seed, Stream::Paths, p);
    paths.push_back(simulate_path(spec, grid, x, eng, opts));
  }
  return PathBundle(spec, grid, seed, x, std::move(paths));
}

// ---------------------------------------------------------------------------
// Diagnostics

struct DriftStat {
  double t = 0.0;
  double mean = 0.0;
  double se = 0.0;
  bool pass = false;
};

/// Sample mean and standard error, computed with Welford's recurrence so that
/// identical samples give an exact mean and zero error.
struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double sd() const { return std::sqrt(variance()); }
  double se() const { return n > 0 ? sd() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

/// Passes at time t iff |mean(X_t) - x_start| <= 3 SE.
inline std::vector<DriftStat> martingale_drift_check(const PathBundle& bundle, std::span<const double> times) {
  if (bundle.empty()) throw InvalidArgument("martingale_drift_check: empty bundle");
  std::vector<DriftStat> out;
  for (double t : times) {
    const std::size_t i = bundle.grid().require_index(t);
    RunningStats s;
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) s.push(bundle.value(p, i));
    const double se = s.se();
    out.push_back({bundle.grid()[i], s.mean, se, std::abs(s.mean - bundle.x_start()) <= 3.0 * se});
  }
  return out;
}

/// Number of pairs (Y_p, Z_p) sharing an exact jump time.
inline std::size_t simultaneous_jump_scan(const PathBundle& y, const PathBundle& z) {
  if (!(y.grid() == z.grid())) throw InvalidArgument("simultaneous_jump_scan: bundles use different grids");
  const std::size_t n = std::min(y.n_paths(), z.n_paths());
  std::size_t count = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto a = y.jumps(p);
    const auto b = z.jumps(p);
    std::size_t i = 0, k = 0;
    bool shared = false;
    while (i < a.size() && k < b.size() && !shared) {
      if (a[i].time == b[k].time) shared = true;
      else if (a[i].time < b[k].time) ++i;
      else ++k;
    }
    if (shared) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Piecewise-linear skeletons with exact jumps.
//
// Between knots (grid times and jump times) a path is taken to move linearly.
// For continuous motion this is the intermediate-value convention: a sign
// change of a gap between two knots counts as a touch.

struct Knot {
  double time = 0.0;
  double left = 0.0;
  double right = 0.0;
};

inline std::vector<Knot> skeleton(const PathView& p, std::size_t i_from, std::size_t i_to) {
  const TimeGrid& g = *p.grid;
  if (i_from > i_to || i_to >= g.size()) throw InvalidArgument("skeleton: bad index range");
  std::vector<Knot> knots;
  knots.reserve(i_to - i_from + 1 + p.jumps.size());
  knots.push_back({g[i_from], p.values[i_from], p.values[i_from]});
  auto jit = std::upper_bound(p.jumps.begin(), p.jumps.end(), g[i_from],
                              [](double t, const JumpEvent& e) { return t < e.time; });
  for (std::size_t i = i_from + 1; i <= i_to; ++i) {
    Knot grid_knot{g[i], p.values[i], p.values[i]};
    while (jit != p.jumps.end() && jit->time <= g[i]) {
      if (jit->time == g[i]) {
        grid_knot.left = jit->left;
      } else {
        knots.push_back({jit->time, jit->left, jit->right});
      }
      ++jit;
    }
    knots.push_back(grid_knot);
  }
  return knots;
}

/// Evaluates a skeleton at nondecreasing query times.
class SkeletonCursor {
 public:
  explicit SkeletonCursor(const std::vector<Knot>& knots) : k_(&knots) {}

  /// (left limit, value) at time t.
  std::pair<double, double> at(double t) {
    const auto& ks = *k_;
    while (pos_ + 1 < ks.size() && ks[pos_ + 1].time <= t) ++pos_;
    const Knot& a = ks[pos_];
    if (t == a.time) return {a.left, a.right};
    if (pos_ + 1 >= ks.size()) return {a.right, a.right};
    const Knot& b = ks[pos_ + 1];
    const double w = (t - a.time) / (b.time - a.time);
    const double v = a.right + w * (b.left - a.right);
    return {v, v};
  }

 private:
  const std::vector<Knot>* k_;
  std::size_t pos_ = 0;
};

/// Sorted union of knot times of several skeletons.
inline std::vector<double> merged_knot_times(std::span<const std::vector<Knot>* const> paths) {
  std::vector<double> times;
  for (const auto* p : paths)
    for (const auto& k : *p) times.push_back(k.time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

}  // namespace mshape
