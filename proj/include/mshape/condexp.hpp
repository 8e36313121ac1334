#pragma once

// Conditional-expectation surfaces f(t,x) = E[g(X_T) | X_t = x]: a backward
// theta-scheme for f_t + sigma^2/2 f_xx = 0, Monte Carlo restarts from (t,x),
// and closed forms for Brownian motion and the compensated Poisson process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "mshape/error.hpp"
#include "mshape/grid.hpp"
#include "mshape/model.hpp"
#include "mshape/random.hpp"
#include "mshape/simulate.hpp"
#include "mshape/tridiagonal.hpp"

namespace mshape {

/// Slopes used to extend f linearly outside the space grid.
struct Slopes {
  double lo = 0.0;  // k
  double hi = 0.0;  // K
};

/// f sampled on a time x space lattice, row-major by time.
class GridFunction {
 public:
  GridFunction(TimeGrid tgrid, SpaceGrid xgrid, std::vector<double> values,
               std::optional<Slopes> slopes = std::nullopt)
      : tgrid_(std::move(tgrid)), xgrid_(xgrid), values_(std::move(values)), slopes_(slopes) {
    if (values_.size() != tgrid_.size() * xgrid_.size())
      throw InvalidArgument("GridFunction: value count does not match lattice");
    for (double v : values_)
      if (!std::isfinite(v)) throw InvalidArgument("GridFunction: non-finite value");
    if (slopes_ && slopes_->lo > slopes_->hi) throw InvalidArgument("GridFunction: slope k exceeds K");
  }

  template <class F>
  static GridFunction sample(const TimeGrid& tg, const SpaceGrid& xg, F&& f,
                             std::optional<Slopes> slopes = std::nullopt) {
    std::vector<double> v(tg.size() * xg.size());
    for (std::size_t i = 0; i < tg.size(); ++i)
      for (std::size_t j = 0; j < xg.size(); ++j) v[i * xg.size() + j] = f(tg[i], xg[j]);
    return GridFunction(tg, xg, std::move(v), slopes);
  }

  const TimeGrid& tgrid() const { return tgrid_; }
  const SpaceGrid& xgrid() const { return xgrid_; }
  const std::optional<Slopes>& slopes() const { return slopes_; }
  std::span<const double> values() const { return values_; }

  double at(std::size_t i, std::size_t j) const { return values_[i * xgrid_.size() + j]; }
  std::span<const double> slice(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * xgrid_.size(), xgrid_.size());
  }

  /// Value at lattice time i, linear in x inside the grid and extended with
  /// slopes (k, K) outside it (edge slopes when no metadata is attached).
  double eval(std::size_t i, double x) const {
    const auto f = slice(i);
    const std::size_t n = xgrid_.intervals();
    const double h = xgrid_.h();
    if (x <= xgrid_.x_min()) {
      const double k = slopes_ ? slopes_->lo : (f[1] - f[0]) / h;
      return f[0] + k * (x - xgrid_.x_min());
    }
    if (x >= xgrid_.x_max()) {
      const double K = slopes_ ? slopes_->hi : (f[n] - f[n - 1]) / h;
      return f[n] + K * (x - xgrid_.x_max());
    }
    const double s = (x - xgrid_.x_min()) / h;
    const std::size_t j = std::min(static_cast<std::size_t>(s), n - 1);
    const double w = s - static_cast<double>(j);
    return f[j] + w * (f[j + 1] - f[j]);
  }

  /// Value at any (t, x), linear in t between lattice times.
  double eval_at(double t, double x) const {
    if (t <= tgrid_.front()) return eval(0, x);
    if (t >= tgrid_.back()) return eval(tgrid_.size() - 1, x);
    const std::size_t i = tgrid_.interval_of(t);
    const double w = (t - tgrid_[i]) / (tgrid_[i + 1] - tgrid_[i]);
    return (1.0 - w) * eval(i, x) + w * eval(i + 1, x);
  }

 private:
  TimeGrid tgrid_;
  SpaceGrid xgrid_;
  std::vector<double> values_;
  std::optional<Slopes> slopes_;
};

// ---------------------------------------------------------------------------
// PDE

enum class BoundaryRule {
  Auto,           // Slopes when the payoff carries (k, K), otherwise ZeroCurvature
  Slopes,         // f_x = k at x_min, f_x = K at x_max
  ZeroCurvature,  // f_xx = 0 at the edge nodes, so their values stay at g
};

struct PdeOptions {
  double theta = 0.5;
  /// Fully implicit sub-steps replacing the first theta step (smooths kinks in g).
  int rannacher_substeps = 2;
  BoundaryRule boundary = BoundaryRule::Auto;
  /// Start the backward sweep from cell averages of g over [x_j - h/2, x_j + h/2].
  /// The stored terminal row is always g sampled at the nodes.
  bool average_terminal = true;
};

/// Mean of g over [x - h/2, x + h/2] by the composite midpoint rule.
inline double cell_average(const Payoff& g, double x, double h, int points = 64) {
  double s = 0.0;
  for (int q = 0; q < points; ++q) s += g(x - 0.5 * h + h * (q + 0.5) / points);
  return s / points;
}

/// Closed-form surface of the counterexample with g = x^2 and horizon tgrid.back().
inline GridFunction counterexample_surface(const TimeGrid& tgrid, const SpaceGrid& xgrid) {
  const double T = tgrid.back();
  return GridFunction::sample(tgrid, xgrid, [T](double t, double x) { return counterexample_f(t, x, T); });
}

inline GridFunction solve_pde(const ProcessSpec& spec, const Payoff& payoff, const TimeGrid& tgrid,
                              const SpaceGrid& xgrid, const PdeOptions& opts = {}) {
  if (spec.kind == ProcessKind::Counterexample) {
    // sigma = 1/(1-t) blows up before t = 1; the closed form is used instead.
    if (payoff.kind != PayoffKind::Square || payoff.sign != 1.0)
      throw UnsupportedProcess("solve_pde: counterexample surface is only available for g = x^2");
    return counterexample_surface(tgrid, xgrid);
  }
  if (spec.kind != ProcessKind::Diffusion)
    throw UnsupportedProcess(std::string("solve_pde: no PDE for process kind ") + to_string(spec.kind));
  if (!(opts.theta >= 0.5 && opts.theta <= 1.0)) throw InvalidArgument("solve_pde: theta must lie in [0.5, 1]");
  if (opts.rannacher_substeps < 0) throw InvalidArgument("solve_pde: negative Rannacher sub-step count");
  payoff.validate_on(xgrid);

  bool use_slopes = false;
  switch (opts.boundary) {
    case BoundaryRule::Auto: use_slopes = payoff.has_slopes(); break;
    case BoundaryRule::Slopes:
      if (!payoff.has_slopes()) throw InvalidArgument("solve_pde: slope boundary requires payoff (k, K)");
      use_slopes = true;
      break;
    case BoundaryRule::ZeroCurvature: use_slopes = false; break;
  }
  const double k = use_slopes ? *payoff.lip_lo : 0.0;
  const double K = use_slopes ? *payoff.lip_hi : 0.0;

  const std::size_t n = xgrid.size();
  const std::size_t last = n - 1;
  const double h = xgrid.h();
  const auto x = xgrid.points();

  std::vector<double> values(tgrid.size() * n);
  std::vector<double> u(n), rhs(n), sub(n), diag(n), sup(n), a_new(n), a_old(n), scratch;
  for (std::size_t j = 0; j < n; ++j) u[j] = payoff(x[j]);
  std::copy(u.begin(), u.end(), values.end() - static_cast<std::ptrdiff_t>(n));
  if (opts.average_terminal)
    for (std::size_t j = 0; j < n; ++j) u[j] = cell_average(payoff, x[j], h);

  // a_j(t) = sigma^2(t, x_j) / (2 h^2); edge nodes are frozen without slope data.
  auto coefficients = [&](double t, std::vector<double>& a) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = eval_sigma(spec, t, x[j]);
      a[j] = 0.5 * s * s / (h * h);
    }
    if (!use_slopes) a[0] = a[last] = 0.0;
  };
  // (L u)_j with the ghost-node treatment of the slope boundaries.
  auto apply = [&](const std::vector<double>& a, const std::vector<double>& f, std::size_t j) {
    if (j == 0) return a[0] * (2.0 * f[1] - 2.0 * f[0] - 2.0 * h * k);
    if (j == last) return a[last] * (2.0 * f[last - 1] - 2.0 * f[last] + 2.0 * h * K);
    return a[j] * (f[j - 1] - 2.0 * f[j] + f[j + 1]);
  };

  // One backward step of size dt from t_old to t_new = t_old - dt.
  auto step = [&](double t_old, double t_new, double theta) {
    const double dt = t_old - t_new;
    coefficients(t_old, a_old);
    coefficients(t_new, a_new);
    for (std::size_t j = 0; j < n; ++j) {
      rhs[j] = u[j] + (1.0 - theta) * dt * apply(a_old, u, j);
      const double c = theta * dt * a_new[j];
      if (j == 0) {
        sub[j] = 0.0;
        diag[j] = 1.0 + 2.0 * c;
        sup[j] = -2.0 * c;
        rhs[j] -= theta * dt * a_new[0] * 2.0 * h * k;
      } else if (j == last) {
        sub[j] = -2.0 * c;
        diag[j] = 1.0 + 2.0 * c;
        sup[j] = 0.0;
        rhs[j] += theta * dt * a_new[last] * 2.0 * h * K;
      } else {
        sub[j] = -c;
        diag[j] = 1.0 + 2.0 * c;
        sup[j] = -c;
      }
    }
    solve_tridiagonal(sub, diag, sup, rhs, scratch);
    u.swap(rhs);
  };

  const std::size_t M = tgrid.steps();
  for (std::size_t i = M; i-- > 0;) {
    const double t_old = tgrid[i + 1];
    const double t_new = tgrid[i];
    if (i + 1 == M && opts.rannacher_substeps > 0 && opts.theta < 1.0) {
      const int m = opts.rannacher_substeps;
      for (int s = 0; s < m; ++s) {
        const double a = t_old - (t_old - t_new) * s / m;
        const double b = (s + 1 == m) ? t_new : t_old - (t_old - t_new) * (s + 1) / m;
        step(a, b, 1.0);
      }
    } else {
      step(t_old, t_new, opts.theta);
    }
    std::copy(u.begin(), u.end(), values.begin() + static_cast<std::ptrdiff_t>(i * n));
  }

  std::optional<Slopes> slopes;
  if (payoff.has_slopes()) slopes = Slopes{*payoff.lip_lo, *payoff.lip_hi};
  return GridFunction(tgrid, xgrid, std::move(values), slopes);
}

// ---------------------------------------------------------------------------
// Closed-form oracles

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// Bachelier call (x - K) Phi(d) + s phi(d), d = (x - K)/s.
inline double bachelier_call(double x, double strike, double s) {
  if (s <= 0.0) return std::max(x - strike, 0.0);
  const double d = (x - strike) / s;
  return (x - strike) * normal_cdf(d) + s * normal_pdf(d);
}

/// E[g(x + sigma (W_T - W_t))] for g in {identity, square, call}.
inline double oracle_bm(const Payoff& payoff, double t, double x, double T, double sigma = 1.0) {
  if (!(t <= T)) throw InvalidArgument("oracle_bm: need t <= T");
  const double s = sigma * std::sqrt(T - t);
  double v = 0.0;
  switch (payoff.kind) {
    case PayoffKind::Identity: v = x; break;
    case PayoffKind::Square: v = x * x + s * s; break;
    case PayoffKind::Call: v = bachelier_call(x, payoff.strike, s); break;
    default: throw Unsupported("oracle_bm: no closed form for payoff " + payoff.name);
  }
  return payoff.sign * v;
}

/// E[g(x + N - lambda (T - t))], N ~ Poisson(lambda (T - t)), for g in
/// {identity, square, call}; the call uses the pmf series cut at tail mass 1e-12.
inline double oracle_poisson(const Payoff& payoff, double lambda, double t, double x, double T) {
  if (!(t <= T)) throw InvalidArgument("oracle_poisson: need t <= T");
  if (!(lambda > 0.0)) throw InvalidArgument("oracle_poisson: intensity must be positive");
  const double mu = lambda * (T - t);
  double v = 0.0;
  switch (payoff.kind) {
    case PayoffKind::Identity: v = x; break;
    case PayoffKind::Square: v = x * x + mu; break;
    case PayoffKind::Call: {
      double mass = 0.0;
      const double j_min = mu + 10.0 * std::sqrt(mu) + 10.0;
      for (long j = 0;; ++j) {
        const double dj = static_cast<double>(j);
        const double p = mu > 0.0 ? std::exp(-mu + dj * std::log(mu) - std::lgamma(dj + 1.0)) : (j == 0 ? 1.0 : 0.0);
        v += p * std::max(x + dj - mu - payoff.strike, 0.0);
        mass += p;
        if (1.0 - mass < 1e-12 && dj > j_min) break;
        if (j > 100000) break;
      }
      break;
    }
    default: throw Unsupported("oracle_poisson: no closed form for payoff " + payoff.name);
  }
  return payoff.sign * v;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McEstimate {
  double estimate = 0.0;
  double se = 0.0;
};

/// Restarts the process at (t, x) and averages g(X_T) over n_paths paths.
inline McEstimate mc_condexp(const ProcessSpec& spec, const Payoff& payoff, double t, double x, double T,
                             std::size_t n_paths, std::uint64_t seed, const SimOptions& opts = {}) {
  if (n_paths < 2) throw InvalidArgument("mc_condexp: need at least two paths");
  if (!(t < T)) throw InvalidArgument("mc_condexp: need t < T");
  SimOptions o = opts;
  if (o.euler_dt <= 0.0) o.euler_dt = T / 2000.0;
  const TimeGrid grid({t, T});
  RunningStats stats;
  for (std::size_t p = 0; p < n_paths; ++p) {
    Engine eng = make_engine(seed, Stream::Restart, p);
    const SamplePath path = simulate_path(spec, grid, x, eng, o);
    stats.push(payoff(path.values.back()));
  }
  return {stats.mean, stats.se()};
}

struct CrossPoint {
  double t = 0.0;
  double x = 0.0;
  double pde = 0.0;
  double mc = 0.0;
  double se = 0.0;
  bool pass = false;
};

struct CrossValidation {
  std::vector<CrossPoint> points;
  double scheme_tol = 0.0;
  bool pass = true;
};

/// Compares the surface with Monte Carlo restarts; point k uses its own stream
/// family derived from (seed, k). Pass iff |pde - mc| <= 3 SE + scheme_tol.
inline CrossValidation cross_validate(const GridFunction& f, const ProcessSpec& spec, const Payoff& payoff,
                                      std::span<const std::pair<double, double>> points, std::size_t n_paths,
                                      std::uint64_t seed, double scheme_tol, const SimOptions& opts = {}) {
  CrossValidation out;
  out.scheme_tol = scheme_tol;
  const double T = f.tgrid().back();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto [t, x] = points[k];
    if (t < f.tgrid().front() || t > T || x < f.xgrid().x_min() || x > f.xgrid().x_max())
      throw InvalidArgument("cross_validate: sample point outside the lattice");
    CrossPoint cp{t, x, f.eval_at(t, x), 0.0, 0.0, false};
    if (t < T) {
      const auto mc = mc_condexp(spec, payoff, t, x, T, n_paths, derive_seed(seed, Stream::Restart, k), opts);
      cp.mc = mc.estimate;
      cp.se = mc.se;
    } else {
      cp.mc = payoff(x);
    }
    cp.pass = std::abs(cp.pde - cp.mc) <= 3.0 * cp.se + scheme_tol;
    out.pass = out.pass && cp.pass;
    out.points.push_back(cp);
  }
  return out;
}

}  // namespace mshape
