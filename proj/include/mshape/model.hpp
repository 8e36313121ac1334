#pragma once

// Process catalog, payoff descriptors and the closed-form counterexample
// process (a Brownian motion run on the clock t/(1-t) until it leaves (-1,1),
// frozen there until t = 1 and then released as a standard Brownian motion).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mshape/error.hpp"
#include "mshape/grid.hpp"

namespace mshape {

enum class ProcessKind { Diffusion, CompensatedPoisson, Counterexample, JumpDiffusion };

inline const char* to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::Diffusion: return "Diffusion";
    case ProcessKind::CompensatedPoisson: return "CompensatedPoisson";
    case ProcessKind::Counterexample: return "Counterexample";
    case ProcessKind::JumpDiffusion: return "JumpDiffusion";
  }
  return "?";
}

/// sigma(t,x) = value.
struct ConstantVol {
  double value = 1.0;
};

/// sigma(t,x) = base + amplitude * tanh(x).
struct TanhVol {
  double base = 0.2;
  double amplitude = 0.1;
};

using SigmaModel = std::variant<ConstantVol, TanhVol>;

struct ProcessSpec {
  std::string name;
  ProcessKind kind = ProcessKind::Diffusion;
  SigmaModel sigma = ConstantVol{1.0};
  double intensity = 0.0;  // jumps per unit time
  double jump_size = 0.0;
  double x0 = 0.0;
  // Jump processes carry the drift -intensity*jump_size so they stay
  // martingales. Turning this off is only meaningful for test fixtures.
  bool compensated = true;

  bool has_jumps() const {
    return kind == ProcessKind::CompensatedPoisson || kind == ProcessKind::JumpDiffusion;
  }
  bool almost_continuous() const { return kind != ProcessKind::JumpDiffusion; }
  double drift() const { return (has_jumps() && compensated) ? -intensity * jump_size : 0.0; }
};

// ---------------------------------------------------------------------------
// Counterexample closed forms

inline double counterexample_sigma(double t, double x) {
  if (t >= 1.0) return 1.0;
  if (t >= 0.0 && x > -1.0 && x < 1.0) return 1.0 / (1.0 - t);
  return 0.0;
}

/// f(t,x) = E[X_T^2 | X_t = x] for the counterexample, extended by x^2+T-1
/// off the support for t < 1.
inline double counterexample_f(double t, double x, double T) {
  if (!(T > 1.0)) throw InvalidArgument("counterexample_f: horizon must exceed 1");
  if (!(t >= 0.0) || t > T) throw InvalidArgument("counterexample_f: need 0 <= t <= T");
  if (t >= 1.0) return x * x + T - t;
  if (std::abs(x) <= 1.0) return T;
  return x * x + T - 1.0;
}

/// Support of X_t for the counterexample. For t > 1 the support is the whole
/// line, reported as the supplied working interval.
inline std::vector<Interval> counterexample_msupport(double t, Interval working = {-1e300, 1e300}) {
  if (!(t >= 0.0)) throw InvalidArgument("counterexample_msupport: need t >= 0");
  if (t == 0.0) return {{0.0, 0.0}};
  if (t < 1.0) return {{-1.0, 1.0}};
  if (t == 1.0) return {{-1.0, -1.0}, {1.0, 1.0}};
  return {working};
}

// ---------------------------------------------------------------------------
// Coefficients

inline double eval_sigma_model(const SigmaModel& m, double x) {
  return std::visit(
      [x](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantVol>) {
          return s.value;
        } else {
          return s.base + s.amplitude * std::tanh(x);
        }
      },
      m);
}

inline double eval_sigma(const ProcessSpec& spec, double t, double x) {
  if (!std::isfinite(t) || t < 0.0 || !std::isfinite(x))
    throw DomainError("eval_sigma: (t,x) outside [0,inf) x R for " + spec.name);
  double s = 0.0;
  switch (spec.kind) {
    case ProcessKind::CompensatedPoisson: s = 0.0; break;
    case ProcessKind::Counterexample: s = counterexample_sigma(t, x); break;
    case ProcessKind::Diffusion:
    case ProcessKind::JumpDiffusion: s = eval_sigma_model(spec.sigma, x); break;
  }
  if (!(s >= 0.0) || !std::isfinite(s))
    throw DomainError("eval_sigma: coefficient of " + spec.name + " is negative or not finite");
  return s;
}

/// True when sigma does not depend on the state, so Gaussian increments are exact.
inline bool sigma_is_constant(const ProcessSpec& spec) {
  if (spec.kind == ProcessKind::CompensatedPoisson) return true;
  if (spec.kind == ProcessKind::Counterexample) return false;
  return std::holds_alternative<ConstantVol>(spec.sigma);
}

/// Upper bound for the diffusion coefficient over the whole state space.
/// The counterexample is unbounded before t = 1; its bound after t = 1 is 1.
inline double sigma_bound(const ProcessSpec& spec) {
  switch (spec.kind) {
    case ProcessKind::CompensatedPoisson: return 0.0;
    case ProcessKind::Counterexample: return 1.0;
    case ProcessKind::Diffusion:
    case ProcessKind::JumpDiffusion:
      return std::visit(
          [](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ConstantVol>) {
              return std::abs(s.value);
            } else {
              return std::abs(s.base) + std::abs(s.amplitude);
            }
          },
          spec.sigma);
  }
  return 0.0;
}

/// Standard deviation of X_{t+1} - X_t bound, counting jumps as variance.
inline double volatility_scale(const ProcessSpec& spec) {
  const double s = sigma_bound(spec);
  const double j = spec.has_jumps() ? spec.intensity * spec.jump_size * spec.jump_size : 0.0;
  return std::sqrt(s * s + j);
}

/// Truncation of the state space to x0 +- xpad * scale * sqrt(T).
inline Interval working_interval(const ProcessSpec& spec, double T, double xpad = 8.0) {
  if (!(T > 0.0) || !(xpad > 0.0)) throw InvalidArgument("working_interval: need T > 0 and xpad > 0");
  if (spec.kind == ProcessKind::Counterexample) {
    const double w = xpad * std::sqrt(std::max(T - 1.0, 0.0));
    return {-1.0 - w, 1.0 + w};
  }
  double w = xpad * volatility_scale(spec) * std::sqrt(T);
  if (w <= 0.0) w = 1.0;
  return {spec.x0 - w, spec.x0 + w};
}

// ---------------------------------------------------------------------------
// Catalog

inline ProcessSpec brownian_motion(double sigma = 1.0, double x0 = 0.0) {
  return {"bm", ProcessKind::Diffusion, ConstantVol{sigma}, 0.0, 0.0, x0, true};
}

inline ProcessSpec bounded_vol_diffusion(double x0 = 0.0) {
  return {"boundedvol", ProcessKind::Diffusion, TanhVol{0.2, 0.1}, 0.0, 0.0, x0, true};
}

inline ProcessSpec compensated_poisson(double intensity = 1.0, double x0 = 0.0) {
  if (!(intensity > 0.0)) throw InvalidArgument("compensated_poisson: intensity must be positive");
  return {"poisson", ProcessKind::CompensatedPoisson, ConstantVol{0.0}, intensity, 1.0, x0, true};
}

inline ProcessSpec counterexample_process() {
  return {"counterexample", ProcessKind::Counterexample, ConstantVol{1.0}, 0.0, 0.0, 0.0, true};
}

inline ProcessSpec jump_diffusion(double sigma = 1.0, double intensity = 1.0, double jump = 1.0,
                                  double x0 = 0.0) {
  if (!(intensity > 0.0)) throw InvalidArgument("jump_diffusion: intensity must be positive");
  return {"jumpdiff", ProcessKind::JumpDiffusion, ConstantVol{sigma}, intensity, jump, x0, true};
}

inline std::vector<ProcessSpec> catalog() {
  return {brownian_motion(), bounded_vol_diffusion(), compensated_poisson(), counterexample_process(),
          jump_diffusion()};
}

inline ProcessSpec find_process(const std::string& name) {
  for (auto& p : catalog())
    if (p.name == name) return p;
  throw UnknownName("unknown process '" + name + "'");
}

// ---------------------------------------------------------------------------
// Payoffs

enum class PayoffKind { Identity, Call, Square, TanhRamp, PlSoftplus, Wave, Constant, Custom };

/// Terminal function g with optional shape metadata. Flags describe g as
/// increasing (`monotone`) or convex; (lip_lo, lip_hi) bound its slopes.
struct Payoff {
  std::string name;
  PayoffKind kind = PayoffKind::Custom;
  double strike = 0.0;
  double sign = 1.0;  // -1 for negated fixtures
  std::function<double(double)> g;
  std::optional<bool> monotone;
  std::optional<bool> convex;
  std::optional<double> lip_lo;
  std::optional<double> lip_hi;

  double operator()(double x) const { return g(x); }
  bool has_slopes() const { return lip_lo.has_value() && lip_hi.has_value(); }

  static Payoff identity() {
    return {"identity", PayoffKind::Identity, 0.0, 1.0, [](double x) { return x; }, true, true, 1.0, 1.0};
  }
  static Payoff call(double strike) {
    return {"call",        PayoffKind::Call, strike, 1.0,
            [strike](double x) { return x > strike ? x - strike : 0.0; },
            true,          true,             0.0,    1.0};
  }
  /// x^2. Not globally Lipschitz, so no slope metadata.
  static Payoff square() {
    return {"square", PayoffKind::Square, 0.0, 1.0, [](double x) { return x * x; }, std::nullopt, true,
            std::nullopt, std::nullopt};
  }
  /// tanh(x - center): increasing, 0 <= g' <= 1, neither convex nor concave.
  static Payoff tanh_ramp(double center = 0.0) {
    return {"tanh-ramp", PayoffKind::TanhRamp, center, 1.0,
            [center](double x) { return std::tanh(x - center); }, true, false, 0.0, 1.0};
  }
  /// Piecewise-linear softplus: max(0, (x - c + 1/2)/2, x - c), slopes 0, 1/2, 1.
  static Payoff pl_softplus(double center = 0.0) {
    return {"pl-softplus", PayoffKind::PlSoftplus, center, 1.0,
            [center](double x) {
              const double y = x - center;
              return std::max({0.0, 0.5 * (y + 0.5), y});
            },
            true, true, 0.0, 1.0};
  }
  /// x/2 + (3/2) sin x: smooth, not monotone, -1 <= g' <= 2.
  static Payoff wave() {
    return {"wave", PayoffKind::Wave, 0.0, 1.0, [](double x) { return 0.5 * x + 1.5 * std::sin(x); }, false,
            false, -1.0, 2.0};
  }
  static Payoff constant(double c) {
    return {"constant", PayoffKind::Constant, c, 1.0, [c](double) { return c; }, true, true, 0.0, 0.0};
  }

  /// -g. Used for decreasing and concave negative controls.
  Payoff negated() const {
    Payoff p = *this;
    p.name = "neg-" + name;
    p.sign = -sign;
    auto inner = g;
    p.g = [inner](double x) { return -inner(x); };
    p.monotone = (kind == PayoffKind::Constant) ? monotone : std::optional<bool>(false);
    p.convex = (kind == PayoffKind::Constant || kind == PayoffKind::Identity) ? convex
                                                                                : std::optional<bool>(false);
    if (has_slopes()) {
      p.lip_lo = -*lip_hi;
      p.lip_hi = -*lip_lo;
    }
    return p;
  }

  /// Checks k(y-x) <= g(y)-g(x) <= K(y-x) on adjacent points of the grid.
  void validate_on(const SpaceGrid& grid, double tol = 1e-9) const {
    if (lip_lo && lip_hi && *lip_lo > *lip_hi) throw InvalidArgument("Payoff " + name + ": k > K");
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      const double x = grid[j], y = grid[j + 1];
      const double d = g(y) - g(x);
      if (!std::isfinite(d)) throw InvalidArgument("Payoff " + name + ": non-finite value on grid");
      if (lip_lo && d < *lip_lo * (y - x) - tol)
        throw InvalidArgument("Payoff " + name + ": slope below declared k at x=" + std::to_string(x));
      if (lip_hi && d > *lip_hi * (y - x) + tol)
        throw InvalidArgument("Payoff " + name + ": slope above declared K at x=" + std::to_string(x));
    }
  }
};

inline std::vector<std::string> payoff_names() {
  return {"identity", "call", "square", "tanh-ramp", "pl-softplus", "wave", "constant"};
}

inline Payoff find_payoff(const std::string& name, double strike = 0.0) {
  if (name == "identity") return Payoff::identity();
  if (name == "call") return Payoff::call(strike);
  if (name == "square") return Payoff::square();
  if (name == "tanh-ramp") return Payoff::tanh_ramp(strike);
  if (name == "pl-softplus") return Payoff::pl_softplus(strike);
  if (name == "wave") return Payoff::wave();
  if (name == "constant") return Payoff::constant(strike);
  throw UnknownName("unknown payoff '" + name + "'");
}

}  // namespace mshape
