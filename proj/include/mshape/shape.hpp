#pragma once

// Shape checks on lattice surfaces: monotone and Lipschitz in x, convex in x,
// nonincreasing in t, and the modulus of continuity restricted to a support.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mshape/condexp.hpp"
#include "mshape/error.hpp"
#include "mshape/support.hpp"

namespace mshape {

struct LatticePoint {
  double t = 0.0;
  double x = 0.0;
};

/// Outcome of one property check. `worst` is the largest violation found
/// (0 when none) and pass == (worst <= tol).
struct ShapeReport {
  std::string property;
  bool pass = true;
  double worst = 0.0;
  std::vector<LatticePoint> location;
  double tol = 0.0;
};

namespace detail {

inline void record(ShapeReport& r, double violation, std::vector<LatticePoint> where) {
  if (violation > r.worst) {
    r.worst = violation;
    r.location = std::move(where);
  }
}

inline ShapeReport finish(ShapeReport r) {
  r.pass = r.worst <= r.tol;
  return r;
}

}  // namespace detail

/// f(t_i, x_{j+1}) - f(t_i, x_j) >= -tol for all j.
inline ShapeReport check_monotone(const GridFunction& f, std::size_t i, double tol) {
  ShapeReport r{"monotone", true, 0.0, {}, tol};
  const auto& xg = f.xgrid();
  const double t = f.tgrid()[i];
  for (std::size_t j = 0; j + 1 < xg.size(); ++j)
    detail::record(r, f.at(i, j) - f.at(i, j + 1), {{t, xg[j]}, {t, xg[j + 1]}});
  return detail::finish(std::move(r));
}

/// k - tol <= (f(t_i, x_{j+1}) - f(t_i, x_j)) / h <= K + tol. Adjacent pairs
/// suffice: any chord slope is an average of adjacent ones.
inline ShapeReport check_lipschitz(const GridFunction& f, std::size_t i, double k, double K, double tol) {
  if (k > K) throw InvalidArgument("check_lipschitz: need k <= K");
  ShapeReport r{"lipschitz", true, 0.0, {}, tol};
  const auto& xg = f.xgrid();
  const double t = f.tgrid()[i];
  for (std::size_t j = 0; j + 1 < xg.size(); ++j) {
    const double slope = (f.at(i, j + 1) - f.at(i, j)) / xg.h();
    detail::record(r, std::max(k - slope, slope - K), {{t, xg[j]}, {t, xg[j + 1]}});
  }
  return detail::finish(std::move(r));
}

/// f(t_i, x_{j-1}) - 2 f(t_i, x_j) + f(t_i, x_{j+1}) >= -tol for interior j.
inline ShapeReport check_convex(const GridFunction& f, std::size_t i, double tol) {
  ShapeReport r{"convex", true, 0.0, {}, tol};
  const auto& xg = f.xgrid();
  const double t = f.tgrid()[i];
  for (std::size_t j = 1; j + 1 < xg.size(); ++j) {
    const double d2 = f.at(i, j - 1) - 2.0 * f.at(i, j) + f.at(i, j + 1);
    detail::record(r, -d2, {{t, xg[j - 1]}, {t, xg[j]}, {t, xg[j + 1]}});
  }
  return detail::finish(std::move(r));
}

/// Slice i of f, made linear across the gaps of the support slice and
/// continued with slopes k below / K above it. Lattice points inside the
/// support keep their values.
inline std::vector<double> extend_off_support(const GridFunction& f, std::size_t i, const SupportEstimate& support,
                                              double k, double K) {
  const auto& xg = f.xgrid();
  const auto raw = f.slice(i);
  std::vector<double> out(raw.begin(), raw.end());
  std::vector<std::size_t> inside;
  for (std::size_t j = 0; j < xg.size(); ++j)
    if (support.contains(i, xg[j])) inside.push_back(j);
  if (inside.empty()) return out;
  const std::size_t a = inside.front();
  const std::size_t b = inside.back();
  for (std::size_t j = 0; j < a; ++j) out[j] = raw[a] + k * (xg[j] - xg[a]);
  for (std::size_t j = b + 1; j < xg.size(); ++j) out[j] = raw[b] + K * (xg[j] - xg[b]);
  for (std::size_t m = 0; m + 1 < inside.size(); ++m) {
    const std::size_t lo = inside[m], hi = inside[m + 1];
    for (std::size_t j = lo + 1; j < hi; ++j) {
      const double w = static_cast<double>(j - lo) / static_cast<double>(hi - lo);
      out[j] = (1.0 - w) * raw[lo] + w * raw[hi];
    }
  }
  return out;
}

/// f(t_i, x_j) >= f(t_{i+1}, x_j) - tol for all i, j. With a support the
/// slices are first extended off the support (see extend_off_support) using
/// the surface's slopes, or its edge slopes when it carries none.
inline ShapeReport check_time_decreasing(const GridFunction& f, double tol,
                                         const std::optional<SupportEstimate>& restrict_to = std::nullopt) {
  ShapeReport r{"time-decreasing", true, 0.0, {}, tol};
  const auto& tg = f.tgrid();
  const auto& xg = f.xgrid();
  if (restrict_to && !(restrict_to->tgrid() == tg))
    throw InvalidArgument("check_time_decreasing: support uses a different time grid");

  auto slice = [&](std::size_t i) -> std::vector<double> {
    if (!restrict_to) {
      const auto s = f.slice(i);
      return {s.begin(), s.end()};
    }
    const std::size_t n = xg.intervals();
    const double k = f.slopes() ? f.slopes()->lo : (f.at(i, 1) - f.at(i, 0)) / xg.h();
    const double K = f.slopes() ? f.slopes()->hi : (f.at(i, n) - f.at(i, n - 1)) / xg.h();
    return extend_off_support(f, i, *restrict_to, k, K);
  };

  std::vector<double> later = slice(tg.size() - 1);
  for (std::size_t i = tg.size() - 1; i-- > 0;) {
    std::vector<double> earlier = slice(i);
    for (std::size_t j = 0; j < xg.size(); ++j)
      detail::record(r, later[j] - earlier[j], {{tg[i], xg[j]}, {tg[i + 1], xg[j]}});
    later.swap(earlier);
  }
  return detail::finish(std::move(r));
}

/// Discrete modulus of continuity omega(delta) over lattice cells in the
/// support, with distance max(|dt|, |dx|).
struct ContinuityReport {
  ShapeReport report;
  std::vector<double> deltas;
  std::vector<double> omega;
};

namespace detail {

inline ContinuityReport joint_continuity(const GridFunction& f, const std::vector<char>& mask,
                                         std::vector<double> deltas, double tol) {
  if (deltas.empty()) throw InvalidArgument("check_joint_continuity: empty mesh sequence");
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const auto& tg = f.tgrid();
  const auto& xg = f.xgrid();
  const std::size_t nx = xg.size();
  const double eps = 1e-12;

  ContinuityReport out;
  out.report = {"joint-continuity-on-support", true, 0.0, {}, tol};
  out.deltas = deltas;
  const std::size_t nj = static_cast<std::size_t>(std::floor(deltas.front() / xg.h() + eps));

  // Each delta gets its own maximum; pairs are visited once per (p, q) with q later in (i, j) order.
  std::vector<double> omega(deltas.size(), 0.0);
  std::vector<std::vector<LatticePoint>> where(deltas.size());
  for (std::size_t i = 0; i < tg.size(); ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      if (!mask[i * nx + j]) continue;
      const double fp = f.at(i, j);
      for (std::size_t i2 = i; i2 < tg.size() && tg[i2] - tg[i] <= deltas.front() + eps; ++i2) {
        const std::size_t j_lo = (i2 == i) ? j + 1 : (j >= nj ? j - nj : 0);
        const std::size_t j_hi = std::min(nx - 1, j + nj);
        for (std::size_t j2 = j_lo; j2 <= j_hi; ++j2) {
          if (!mask[i2 * nx + j2]) continue;
          const double diff = std::abs(f.at(i2, j2) - fp);
          const double dist = std::max(tg[i2] - tg[i], std::abs(xg[j2] - xg[j]));
          for (std::size_t d = 0; d < deltas.size(); ++d) {
            if (dist > deltas[d] + eps) break;
            if (diff > omega[d]) {
              omega[d] = diff;
              where[d] = {{tg[i], xg[j]}, {tg[i2], xg[j2]}};
            }
          }
        }
      }
    }
  }
  out.omega = omega;
  bool decreasing = true;
  for (std::size_t d = 1; d < omega.size(); ++d) decreasing = decreasing && omega[d] <= omega[d - 1];
  out.report.worst = omega.back();
  out.report.location = where.back();
  out.report.pass = decreasing && out.report.worst <= tol;
  return out;
}

}  // namespace detail

/// Restricted to lattice cells whose x lies in the support slice at that time.
inline ContinuityReport check_joint_continuity_on_support(const GridFunction& f, const SupportEstimate& support,
                                                         std::vector<double> deltas, double tol) {
  if (!(support.tgrid() == f.tgrid()))
    throw InvalidArgument("check_joint_continuity_on_support: support uses a different time grid");
  if (support.empty()) throw InvalidArgument("check_joint_continuity_on_support: empty support");
  const auto& xg = f.xgrid();
  std::vector<char> mask(f.tgrid().size() * xg.size(), 0);
  for (std::size_t i = 0; i < f.tgrid().size(); ++i)
    for (std::size_t j = 0; j < xg.size(); ++j) mask[i * xg.size() + j] = support.contains(i, xg[j]) ? 1 : 0;
  return detail::joint_continuity(f, mask, std::move(deltas), tol);
}

/// Same modulus over every lattice cell.
inline ContinuityReport check_joint_continuity(const GridFunction& f, std::vector<double> deltas, double tol) {
  std::vector<char> mask(f.tgrid().size() * f.xgrid().size(), 1);
  auto out = detail::joint_continuity(f, mask, std::move(deltas), tol);
  out.report.property = "joint-continuity";
  return out;
}

// ---------------------------------------------------------------------------
// Whole-surface helpers: the worst report over every lattice time.

template <class Check>
ShapeReport worst_over_times(const GridFunction& f, Check&& check) {
  ShapeReport worst;
  for (std::size_t i = 0; i < f.tgrid().size(); ++i) {
    ShapeReport r = check(i);
    if (i == 0 || r.worst > worst.worst) {
      const bool ok = worst.pass && r.pass;
      worst = std::move(r);
      worst.pass = ok;
    } else {
      worst.pass = worst.pass && r.pass;
    }
  }
  return worst;
}

inline ShapeReport check_monotone_all(const GridFunction& f, double tol) {
  return worst_over_times(f, [&](std::size_t i) { return check_monotone(f, i, tol); });
}
inline ShapeReport check_lipschitz_all(const GridFunction& f, double k, double K, double tol) {
  return worst_over_times(f, [&](std::size_t i) { return check_lipschitz(f, i, k, K, tol); });
}
inline ShapeReport check_convex_all(const GridFunction& f, double tol) {
  return worst_over_times(f, [&](std::size_t i) { return check_convex(f, i, tol); });
}

}  // namespace mshape
