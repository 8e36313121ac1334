#pragma once

// Marginal supports estimated from path bundles by histogram occupancy, the
// S_{a,b} time sets, and the containment / jumped-over-interval scans.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "mshape/error.hpp"
#include "mshape/grid.hpp"
#include "mshape/simulate.hpp"

namespace mshape {

/// Bin j covers [(j - 1/2) w, (j + 1/2) w).
inline long long bin_of(double x, double binwidth) {
  return static_cast<long long>(std::floor(x / binwidth + 0.5));
}

/// Per-time closed intervals, disjoint and sorted within each slice.
class SupportEstimate {
 public:
  SupportEstimate(TimeGrid tgrid, std::vector<std::vector<Interval>> slices, double binwidth, std::size_t min_count,
                  double threshold)
      : tgrid_(std::move(tgrid)),
        slices_(std::move(slices)),
        binwidth_(binwidth),
        min_count_(min_count),
        threshold_(threshold) {
    if (slices_.size() != tgrid_.size()) throw InvalidArgument("SupportEstimate: one slice per grid time required");
    if (!(binwidth_ > 0.0)) throw InvalidArgument("SupportEstimate: binwidth must be positive");
  }

  const TimeGrid& tgrid() const { return tgrid_; }
  const std::vector<Interval>& slice(std::size_t i) const { return slices_.at(i); }
  double binwidth() const { return binwidth_; }
  std::size_t min_count() const { return min_count_; }
  /// Occupancy fraction a bin must reach: min_count / n_paths.
  double threshold() const { return threshold_; }

  bool empty() const {
    return std::all_of(slices_.begin(), slices_.end(), [](const auto& s) { return s.empty(); });
  }

  bool contains(std::size_t i, double x) const {
    for (const auto& iv : slices_[i])
      if (iv.contains(x)) return true;
    return false;
  }

  /// Distance from x to slice i (infinity for an empty slice).
  double distance(std::size_t i, double x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& iv : slices_[i]) {
      if (iv.contains(x)) return 0.0;
      d = std::min(d, x < iv.lo ? iv.lo - x : x - iv.hi);
    }
    return d;
  }

 private:
  TimeGrid tgrid_;
  std::vector<std::vector<Interval>> slices_;
  double binwidth_;
  std::size_t min_count_;
  double threshold_;
};

namespace detail {

inline std::vector<Interval> occupied_intervals(std::span<const double> xs, double binwidth, std::size_t min_count) {
  std::map<long long, std::size_t> counts;
  for (double x : xs) ++counts[bin_of(x, binwidth)];
  // Runs of consecutive kept bins, each widened by one bin per side, then merged.
  std::vector<std::pair<long long, long long>> runs;
  for (const auto& [b, c] : counts) {
    if (c < min_count) continue;
    if (!runs.empty() && b <= runs.back().second + 3) runs.back().second = b;
    else runs.emplace_back(b, b);
  }
  std::vector<Interval> out;
  out.reserve(runs.size());
  for (const auto& [lo, hi] : runs)
    out.push_back({(static_cast<double>(lo) - 1.5) * binwidth, (static_cast<double>(hi) + 1.5) * binwidth});
  return out;
}

}  // namespace detail

/// Union of bins holding at least min_count samples (occupancy fraction
/// min_count / n_paths), merged into maximal intervals and dilated by one bin.
inline std::vector<Interval> estimate_support(const PathBundle& bundle, double t, double binwidth,
                                              std::size_t min_count = 5) {
  if (!(binwidth > 0.0)) throw InvalidArgument("estimate_support: binwidth must be positive");
  if (min_count == 0) throw InvalidArgument("estimate_support: min_count must be positive");
  if (bundle.n_paths() < min_count) throw InsufficientData("estimate_support: fewer paths than min_count");
  const std::size_t i = bundle.grid().require_index(t);
  const auto xs = bundle.column(i);
  return detail::occupied_intervals(xs, binwidth, min_count);
}

inline SupportEstimate marginal_support(const PathBundle& bundle, double binwidth, std::size_t min_count = 5) {
  const auto& g = bundle.grid();
  std::vector<std::vector<Interval>> slices;
  slices.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) slices.push_back(estimate_support(bundle, g[i], binwidth, min_count));
  const double threshold = static_cast<double>(min_count) / static_cast<double>(bundle.n_paths());
  return SupportEstimate(g, std::move(slices), binwidth, min_count, threshold);
}

// ---------------------------------------------------------------------------
// S_{a,b}

struct SabPoint {
  double t = 0.0;
  double statistic = 0.0;  // mean of min((X_t - a)+, (b - X_t)+)
};

inline std::vector<SabPoint> s_ab_statistic(const PathBundle& bundle, double a, double b) {
  if (!(a < b)) throw InvalidArgument("s_ab_statistic: need a < b");
  const auto& g = bundle.grid();
  std::vector<SabPoint> out;
  out.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double sum = 0.0;
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
      const double x = bundle.value(p, i);
      sum += std::min(std::max(x - a, 0.0), std::max(b - x, 0.0));
    }
    out.push_back({g[i], sum / static_cast<double>(bundle.n_paths())});
  }
  return out;
}

/// Grid times where the statistic is at most threshold.
inline std::vector<double> s_ab_set(const PathBundle& bundle, double a, double b, double threshold = 0.0) {
  std::vector<double> times;
  for (const auto& s : s_ab_statistic(bundle, a, b))
    if (s.statistic <= threshold) times.push_back(s.t);
  return times;
}

// ---------------------------------------------------------------------------
// Containment

struct ContainmentResult {
  std::size_t samples = 0;
  std::size_t violations = 0;
  std::size_t left_limit_samples = 0;
  std::size_t left_limit_violations = 0;

  std::size_t total_samples() const { return samples + left_limit_samples; }
  std::size_t total_violations() const { return violations + left_limit_violations; }
  double fraction() const {
    const auto n = total_samples();
    return n ? static_cast<double>(total_violations()) / static_cast<double>(n) : 0.0;
  }
};

/// Counts samples more than `slack` bins away from the support slice at their
/// time. Left limits at jumps are checked against the two slices around the
/// jump time and pass if close enough to either.
inline ContainmentResult paths_in_support_check(const PathBundle& bundle, const SupportEstimate& support,
                                                std::size_t slack) {
  if (!(bundle.grid() == support.tgrid())) throw InvalidArgument("paths_in_support_check: grids differ");
  const auto& g = bundle.grid();
  const double reach = static_cast<double>(slack) * support.binwidth();
  ContainmentResult r;
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      ++r.samples;
      if (support.distance(i, bundle.value(p, i)) > reach) ++r.violations;
    }
    for (const auto& e : bundle.jumps(p)) {
      ++r.left_limit_samples;
      const std::size_t i = g.interval_of(e.time);
      const double d = std::min(support.distance(i, e.left), support.distance(i + 1, e.left));
      if (d > reach) ++r.left_limit_violations;
    }
  }
  return r;
}

struct JumpViolation {
  std::size_t path = 0;
  JumpEvent jump;
};

/// Jumps whose open jumped-over interval, shrunk by guard_bins bins at each
/// end, meets the support slice nearest the jump time.
inline std::vector<JumpViolation> jump_past_support_scan(const PathBundle& bundle, const SupportEstimate& support,
                                                         std::size_t guard_bins = 3) {
  if (!(bundle.grid() == support.tgrid())) throw InvalidArgument("jump_past_support_scan: grids differ");
  const double guard = static_cast<double>(guard_bins) * support.binwidth();
  std::vector<JumpViolation> out;
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    for (const auto& e : bundle.jumps(p)) {
      const double lo = std::min(e.left, e.right) + guard;
      const double hi = std::max(e.left, e.right) - guard;
      if (!(lo < hi)) continue;
      const auto& slice = support.slice(bundle.grid().nearest(e.time));
      const bool hit = std::any_of(slice.begin(), slice.end(), [&](const Interval& iv) { return iv.lo < hi && iv.hi > lo; });
      if (hit) out.push_back({p, e});
    }
  }
  return out;
}

}  // namespace mshape
