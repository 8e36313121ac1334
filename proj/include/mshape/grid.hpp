#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mshape/error.hpp"

namespace mshape {

/// Strictly increasing sample times t_0 < t_1 < ... < t_M with t_0 >= 0.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw InvalidArgument("TimeGrid: need at least two times");
    if (!std::isfinite(times_.front()) || times_.front() < 0.0)
      throw InvalidArgument("TimeGrid: first time must be finite and >= 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i]) || !(times_[i] > times_[i - 1]))
        throw InvalidArgument("TimeGrid: times must be finite and strictly increasing");
    }
  }

  static TimeGrid uniform(double t0, double t1, std::size_t steps) {
    if (steps == 0) throw InvalidArgument("TimeGrid::uniform: steps must be positive");
    if (!(t1 > t0)) throw InvalidArgument("TimeGrid::uniform: need t1 > t0");
    std::vector<double> t(steps + 1);
    const double n = static_cast<double>(steps);
    for (std::size_t i = 0; i <= steps; ++i) {
      const double k = static_cast<double>(i);
      t[i] = (t0 * (n - k) + t1 * k) / n;
    }
    return TimeGrid(std::move(t));
  }

  std::size_t size() const { return times_.size(); }
  std::size_t steps() const { return times_.size() - 1; }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  std::span<const double> times() const { return times_; }

  /// Index of a lattice time, matched to a relative tolerance.
  std::optional<std::size_t> index_of(double t, double rel_tol = 1e-12) const {
    const double tol = rel_tol * std::max(1.0, std::abs(back()));
    auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
    if (it != times_.end() && std::abs(*it - t) <= tol)
      return static_cast<std::size_t>(it - times_.begin());
    return std::nullopt;
  }

  std::size_t require_index(double t) const {
    if (auto i = index_of(t)) return *i;
    throw InvalidArgument("time " + std::to_string(t) + " is not on the grid");
  }

  /// Interval index i with t_i <= t < t_{i+1}, clamped to [0, M-1].
  std::size_t interval_of(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return 0;
    const auto i = static_cast<std::size_t>(it - times_.begin()) - 1;
    return std::min(i, steps() - 1);
  }

  /// Index of the lattice time closest to t.
  std::size_t nearest(double t) const {
    const std::size_t i = interval_of(t);
    return (t - times_[i] <= times_[i + 1] - t) ? i : i + 1;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

/// Uniform points x_min + j*h for j = 0..n.
class SpaceGrid {
 public:
  SpaceGrid(double x_min, double h, std::size_t n) : x_min_(x_min), h_(h), n_(n) {
    if (!std::isfinite(x_min) || !std::isfinite(h) || !(h > 0.0))
      throw InvalidArgument("SpaceGrid: spacing must be finite and positive");
    if (n < 2) throw InvalidArgument("SpaceGrid: need at least three points");
  }

  static SpaceGrid from_bounds(double lo, double hi, std::size_t intervals) {
    if (!(hi > lo)) throw InvalidArgument("SpaceGrid: need hi > lo");
    if (intervals < 2) throw InvalidArgument("SpaceGrid: need at least two intervals");
    return SpaceGrid(lo, (hi - lo) / static_cast<double>(intervals), intervals);
  }

  std::size_t size() const { return n_ + 1; }
  std::size_t intervals() const { return n_; }
  double h() const { return h_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_min_ + h_ * static_cast<double>(n_); }
  double operator[](std::size_t j) const { return x_min_ + h_ * static_cast<double>(j); }

  std::vector<double> points() const {
    std::vector<double> x(size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (*this)[j];
    return x;
  }

  friend bool operator==(const SpaceGrid&, const SpaceGrid&) = default;

 private:
  double x_min_;
  double h_;
  std::size_t n_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace mshape
