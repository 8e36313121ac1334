#pragma once

// Runners for the acceptance criteria. Each returns a verdict, a short
// summary and a serialized artifact; rerunning with the same seed must
// reproduce the artifact byte for byte.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mshape/condexp.hpp"
#include "mshape/couple.hpp"
#include "mshape/io.hpp"
#include "mshape/model.hpp"
#include "mshape/shape.hpp"
#include "mshape/simulate.hpp"
#include "mshape/support.hpp"

namespace mshape::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;
  std::string artifact;
  double seconds = 0.0;
};

inline constexpr std::uint64_t kDefaultSeed = 20240611;

inline std::uint64_t criterion_seed(std::uint64_t seed, int id, std::uint64_t k = 0) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(id) * 1000 + k));
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string yes(bool b) { return b ? "ok" : "FAIL"; }

inline void append(std::string& summary, const std::string& piece) {
  if (!summary.empty()) summary += "; ";
  summary += piece;
}

struct Surface {
  ProcessSpec spec;
  Payoff payoff;
  GridFunction f;
};

/// PDE surfaces of every catalog diffusion for the given payoffs on [0, 1].
inline std::vector<Surface> diffusion_surfaces(const std::vector<Payoff>& payoffs, std::size_t nt = 200,
                                               std::size_t nx = 400) {
  std::vector<Surface> out;
  for (const auto& spec : catalog()) {
    if (spec.kind != ProcessKind::Diffusion) continue;
    const Interval w = working_interval(spec, 1.0);
    const auto tg = TimeGrid::uniform(0.0, 1.0, nt);
    const auto xg = SpaceGrid::from_bounds(w.lo, w.hi, nx);
    for (const auto& g : payoffs) out.push_back({spec, g, solve_pde(spec, g, tg, xg)});
  }
  return out;
}

inline std::string label(const Surface& s) { return s.spec.name + "/" + s.payoff.name; }

}  // namespace detail

// ---------------------------------------------------------------------------
// 1. Counterexample reproduction

inline CriterionResult criterion1(std::uint64_t seed) {
  detail::Stopwatch clock;
  CriterionResult r{1, "counterexample reproduction", true, {}, {}, 0.0};
  const double T = 2.0;

  struct Display {
    double t, x, expected;
  };
  const Display values[] = {{1.0, 0.5, 1.25}, {0.5, 0.3, 2.0}, {0.5, 1.5, 3.25}, {1.5, 0.5, 0.75},
                            {0.0, 0.0, 2.0},  {1.0, 1.0, 2.0}, {1.0, 0.0, 1.0},  {2.0, 0.7, 0.49}};
  bool exact = counterexample_f(1.0, 0.5, T) == 1.25;
  for (const auto& v : values) exact = exact && std::abs(counterexample_f(v.t, v.x, T) - v.expected) <= 1e-14;
  detail::append(r.summary, "closed form " + detail::yes(exact));

  const auto tg = TimeGrid::uniform(0.0, T, 200);
  const auto xg = SpaceGrid::from_bounds(-3.0, 3.0, 600);
  const auto f = counterexample_surface(tg, xg);
  const auto bundle = generate_paths(counterexample_process(), tg, 10000, criterion_seed(seed, 1));
  const auto support = marginal_support(bundle, 0.01, 5);
  const std::vector<double> deltas{0.08, 0.04, 0.02, 0.01};

  const auto on = check_joint_continuity_on_support(f, support, deltas, 0.1);
  const auto full = check_joint_continuity(f, deltas, 0.1);
  const bool full_fails = !full.report.pass && std::abs(full.report.worst - 1.0) <= 0.05;
  bool at_one = !full.report.location.empty();
  for (const auto& p : full.report.location) at_one = at_one && std::abs(p.t - 1.0) <= 0.01 + 1e-12;

  detail::append(r.summary, "omega on support " + fmt(on.report.worst) + " " + detail::yes(on.report.pass));
  detail::append(r.summary, "full lattice worst " + fmt(full.report.worst) + " " + detail::yes(full_fails && at_one));

  Json reports = Json::array({to_json(on), to_json(full)});
  std::ostringstream art;
  RunHeader h{"counterexample", {}, seed};
  h.add("T", T).add("nt", std::size_t{200}).add("nx", std::size_t{600}).add("paths", std::size_t{10000});
  write_report_json(art, h, reports);
  write_support_csv(art, h, support);
  r.artifact = art.str();

  r.seconds = clock.seconds();
  const bool fast = r.seconds < 60.0;
  detail::append(r.summary, "runtime " + fmt(std::round(r.seconds * 10) / 10) + "s " + detail::yes(fast));
  r.pass = exact && on.report.pass && full_fails && at_one && fast;
  return r;
}

// ---------------------------------------------------------------------------
// 2. Oracle equivalence

struct OracleError {
  double max_error = 0.0;
  double max_error_on_coarse = 0.0;  // over lattice points shared with the half-resolution solve
};

inline OracleError bachelier_error(const GridFunction& f, const Payoff& g, double T, std::size_t coarse_stride) {
  OracleError e;
  const auto& tg = f.tgrid();
  const auto& xg = f.xgrid();
  for (std::size_t i = 0; i < tg.size(); ++i)
    for (std::size_t j = 0; j < xg.size(); ++j) {
      const double err = std::abs(f.at(i, j) - oracle_bm(g, tg[i], xg[j], T));
      e.max_error = std::max(e.max_error, err);
      if (i % coarse_stride == 0 && j % coarse_stride == 0) e.max_error_on_coarse = std::max(e.max_error_on_coarse, err);
    }
  return e;
}

inline GridFunction criterion2_surface(std::size_t n) {
  return solve_pde(brownian_motion(), Payoff::call(0.0), TimeGrid::uniform(0.0, 1.0, n),
                   SpaceGrid::from_bounds(-8.0, 8.0, n));
}

inline CriterionResult criterion2(std::uint64_t seed) {
  detail::Stopwatch clock;
  CriterionResult r{2, "Bachelier oracle equivalence", true, {}, {}, 0.0};
  const Payoff g = Payoff::call(0.0);
  const auto coarse = criterion2_surface(400);
  const auto fine = criterion2_surface(800);
  const auto ec = bachelier_error(coarse, g, 1.0, 1);
  const auto ef = bachelier_error(fine, g, 1.0, 2);
  const double ratio = ec.max_error / ef.max_error_on_coarse;
  const bool accurate = ec.max_error <= 2e-3;
  const bool converges = ratio >= 3.0;
  detail::append(r.summary, "max error " + fmt(ec.max_error) + " " + detail::yes(accurate));
  detail::append(r.summary, "refined error on shared points " + fmt(ef.max_error_on_coarse) + ", ratio " + fmt(ratio) +
                                " " + detail::yes(converges));
  detail::append(r.summary, "refined error over its own lattice " + fmt(ef.max_error));

  std::ostringstream art;
  RunHeader h{"condexp", {}, seed};
  h.add("process", "bm").add("payoff", "call").add("strike", 0.0).add("nt", std::size_t{400}).add("nx", std::size_t{400});
  write_surface_csv(art, h, coarse);
  r.artifact = art.str();

  r.seconds = clock.seconds();
  const bool fast = r.seconds < 10.0;
  detail::append(r.summary, "runtime " + fmt(std::round(r.seconds * 10) / 10) + "s " + detail::yes(fast));
  r.pass = accurate && converges && fast;
  return r;
}

// ---------------------------------------------------------------------------
// 3. PDE against Monte Carlo

inline CriterionResult criterion3(std::uint64_t seed, std::size_t n_paths = 1000000) {
  detail::Stopwatch clock;
  CriterionResult r{3, "PDE against Monte Carlo", true, {}, {}, 0.0};
  const auto f = criterion2_surface(400);
  std::vector<std::pair<double, double>> points;
  for (double t : {0.0, 0.3, 0.6})
    for (double x : {-1.0, 0.0, 1.5}) points.emplace_back(t, x);
  const auto cv = cross_validate(f, brownian_motion(), Payoff::call(0.0), points, n_paths, criterion_seed(seed, 3), 2e-3);

  Json rows = Json::array();
  double worst = 0.0;  // largest |pde - mc| / (3 se + tol); pass needs <= 1
  for (const auto& p : cv.points) {
    worst = std::max(worst, std::abs(p.pde - p.mc) / (3.0 * p.se + cv.scheme_tol));
    rows.push_back({{"t", p.t}, {"x", p.x}, {"pde", p.pde}, {"mc", p.mc}, {"se", p.se}, {"pass", p.pass}});
  }
  detail::append(r.summary, std::to_string(points.size()) + " points, n=" + std::to_string(n_paths) +
                                ", max |pde-mc|/(3se+tol) " + fmt(worst) + " " + detail::yes(cv.pass));
  std::ostringstream art;
  RunHeader h{"verify", {}, seed};
  h.add("process", "bm").add("payoff", "call").add("paths", n_paths);
  write_report_json(art, h, rows);
  r.artifact = art.str();

  r.seconds = clock.seconds();
  const bool fast = r.seconds < 120.0;
  detail::append(r.summary, "runtime " + fmt(std::round(r.seconds * 10) / 10) + "s " + detail::yes(fast));
  r.pass = cv.pass && fast;
  return r;
}

// ---------------------------------------------------------------------------
// 4-6. Shape properties of PDE surfaces

inline CriterionResult criterion4(std::uint64_t seed) {
  CriterionResult r{4, "monotone payoffs give monotone surfaces", true, {}, {}, 0.0};
  detail::Stopwatch clock;
  Json reports = Json::array();
  for (const auto& s : detail::diffusion_surfaces({Payoff::identity(), Payoff::call(0.0), Payoff::tanh_ramp(0.0)})) {
    const auto rep = check_monotone_all(s.f, 1e-6);
    r.pass = r.pass && rep.pass;
    detail::append(r.summary, detail::label(s) + " " + fmt(rep.worst));
    reports.push_back(to_json(rep));
  }
  std::ostringstream art;
  write_report_json(art, RunHeader{"verify", {{"property", "monotone"}}, seed}, reports);
  r.artifact = art.str();
  r.seconds = clock.seconds();
  return r;
}

inline CriterionResult criterion5(std::uint64_t seed) {
  CriterionResult r{5, "Lipschitz payoffs keep their slope bounds", true, {}, {}, 0.0};
  detail::Stopwatch clock;
  Json reports = Json::array();
  for (const auto& s : detail::diffusion_surfaces({Payoff::call(0.0), Payoff::tanh_ramp(0.0), Payoff::wave()})) {
    const double k = *s.payoff.lip_lo, K = *s.payoff.lip_hi;
    const auto rep = check_lipschitz_all(s.f, k, K, 1e-6);
    r.pass = r.pass && rep.pass;
    detail::append(r.summary, detail::label(s) + " (" + fmt(k) + "," + fmt(K) + ") " + fmt(rep.worst));
    reports.push_back(to_json(rep));
  }
  std::ostringstream art;
  write_report_json(art, RunHeader{"verify", {{"property", "lipschitz"}}, seed}, reports);
  r.artifact = art.str();
  r.seconds = clock.seconds();
  return r;
}

inline CriterionResult criterion6(std::uint64_t seed) {
  CriterionResult r{6, "convex payoffs give convex, time-decreasing surfaces", true, {}, {}, 0.0};
  detail::Stopwatch clock;
  Json reports = Json::array();
  for (const auto& s : detail::diffusion_surfaces({Payoff::call(0.0), Payoff::pl_softplus(0.0)})) {
    const auto cx = check_convex_all(s.f, 1e-6);
    const auto td = check_time_decreasing(s.f, 1e-6);
    r.pass = r.pass && cx.pass && td.pass;
    detail::append(r.summary, detail::label(s) + " convex " + fmt(cx.worst) + " time " + fmt(td.worst));
    reports.push_back(to_json(cx));
    reports.push_back(to_json(td));
  }

  // Closed-form counterexample surface with g = x^2.
  const auto tg = TimeGrid::uniform(0.0, 2.0, 200);
  const auto xg = SpaceGrid::from_bounds(-3.0, 3.0, 600);
  const auto ce = counterexample_surface(tg, xg);
  bool ce_ok = check_time_decreasing(ce, 1e-12).pass;
  for (double t : {0.5, 1.0, 1.5}) ce_ok = ce_ok && check_convex(ce, tg.require_index(t), 1e-12).pass;
  r.pass = r.pass && ce_ok;
  detail::append(r.summary, "counterexample " + detail::yes(ce_ok));

  // Negative controls: each must be rejected.
  const auto neg = detail::diffusion_surfaces({Payoff::call(0.0).negated()}, 100, 200);
  const auto t_fixture = GridFunction::sample(TimeGrid::uniform(0.0, 1.0, 10), SpaceGrid::from_bounds(-1.0, 1.0, 20),
                                              [](double t, double) { return t; });
  bool controls = !check_time_decreasing(t_fixture, 1e-6).pass;
  for (const auto& s : neg) controls = controls && !check_convex_all(s.f, 1e-6).pass;
  r.pass = r.pass && controls;
  detail::append(r.summary, "negative controls " + detail::yes(controls));

  std::ostringstream art;
  write_report_json(art, RunHeader{"verify", {{"property", "convex,time-decreasing"}}, seed}, reports);
  r.artifact = art.str();
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// 7. Crossings and jumps past the support

inline TimeGrid coupling_grid(const ProcessSpec& spec) {
  return spec.kind == ProcessKind::Counterexample ? TimeGrid::uniform(0.0, 2.0, 200) : TimeGrid::uniform(0.0, 1.0, 200);
}

inline CriterionResult criterion7(std::uint64_t seed, std::size_t n_pairs = 10000) {
  detail::Stopwatch clock;
  CriterionResult r{7, "coupling characterization", true, {}, {}, 0.0};
  Json reports = Json::array();
  std::size_t k = 0;
  for (const auto& spec : catalog()) {
    const auto tg = coupling_grid(spec);
    const auto y = generate_paths(spec, tg, n_pairs, criterion_seed(seed, 7, k++));
    const auto z = generate_paths(spec, tg, n_pairs, criterion_seed(seed, 7, k++));
    const auto ref = generate_paths(spec, tg, n_pairs, criterion_seed(seed, 7, k++));
    const auto scan = cross_without_touch_scan(y, z, tg.front(), tg.back());
    const auto support = marginal_support(ref, 0.05, 5);
    const auto jumps = jump_past_support_scan(y, support);
    const bool ok = spec.almost_continuous() ? (scan.violating_pairs == 0 && jumps.empty())
                                             : (scan.violating_pairs > 0 && !jumps.empty());
    r.pass = r.pass && ok;
    detail::append(r.summary, spec.name + " crossings " + std::to_string(scan.violating_pairs) + " jumps past " +
                                  std::to_string(jumps.size()) + "/" + std::to_string(y.total_jumps()) + " " +
                                  detail::yes(ok));
    Json j = to_json(scan);
    j["process"] = spec.name;
    j["jumps"] = y.total_jumps();
    j["jumps_past_support"] = jumps.size();
    reports.push_back(j);
  }
  std::ostringstream art;
  write_report_json(art, RunHeader{"couple", {{"pairs", std::to_string(n_pairs)}}, seed}, reports);
  r.artifact = art.str();
  r.seconds = clock.seconds();
  const bool fast = r.seconds < 300.0;
  detail::append(r.summary, "runtime " + fmt(std::round(r.seconds * 10) / 10) + "s " + detail::yes(fast));
  r.pass = r.pass && fast;
  return r;
}

// ---------------------------------------------------------------------------
// 8. Three-copy convexity coupling

inline GridFunction criterion8_surface(const Payoff& g) {
  const auto spec = brownian_motion();
  const Interval w = working_interval(spec, 1.0);
  return solve_pde(spec, g, TimeGrid::uniform(0.0, 1.0, 200), SpaceGrid::from_bounds(w.lo, w.hi, 400));
}

inline CriterionResult criterion8(std::uint64_t seed, std::size_t n_triples = 100000) {
  detail::Stopwatch clock;
  CriterionResult r{8, "three-copy convexity coupling", true, {}, {}, 0.0};
  ThreeCopyConfig cfg;
  cfg.n_triples = n_triples;
  cfg.seed = criterion_seed(seed, 8);
  const auto out = three_copy_convexity_coupling(brownian_motion(), criterion8_surface(Payoff::call(0.0)), cfg);
  r.pass = out.pass();
  detail::append(r.summary, "mean M " + fmt(out.mean) + " se " + fmt(out.se) + " " + detail::yes(out.mean_ok()));
  detail::append(r.summary, "touch fraction " + fmt(out.touch_fraction()) + " of " + std::to_string(out.touched) + " " +
                                detail::yes(out.touch_rule_ok()));
  std::ostringstream art;
  write_report_json(art, RunHeader{"couple", {{"experiment", "three-copy"}}, seed},
                    Json::array({to_json(out, "three-copy-convexity")}));
  r.artifact = art.str();
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// 9. Paths stay in the marginal support

struct ContainmentCheck {
  ContainmentResult out_of_sample;
  double declared_tail = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Support from bundle A, checked on an independent bundle B. The declared
/// tail mass is A's own excluded fraction; the band is 3 binomial standard
/// errors of a difference of two proportions over n_paths paths.
inline ContainmentCheck containment_check(const ProcessSpec& spec, const TimeGrid& tg, std::size_t n_paths,
                                          std::uint64_t seed_a, std::uint64_t seed_b, double binwidth,
                                          std::size_t slack) {
  const auto a = generate_paths(spec, tg, n_paths, seed_a);
  const auto b = generate_paths(spec, tg, n_paths, seed_b);
  const auto support = marginal_support(a, binwidth, 5);
  ContainmentCheck c;
  c.declared_tail = paths_in_support_check(a, support, slack).fraction();
  c.out_of_sample = paths_in_support_check(b, support, slack);
  const double n = static_cast<double>(n_paths);
  const double p = std::max(c.declared_tail, 1.0 / n);
  c.bound = c.declared_tail + 3.0 * std::sqrt(2.0 * p * (1.0 - p) / n);
  c.pass = c.out_of_sample.fraction() <= c.bound;
  return c;
}

inline CriterionResult criterion9(std::uint64_t seed, std::size_t n_paths = 10000) {
  detail::Stopwatch clock;
  CriterionResult r{9, "paths stay in the marginal support", true, {}, {}, 0.0};
  Json reports = Json::array();
  std::size_t k = 0;
  for (const auto& spec : catalog()) {
    const auto tg = coupling_grid(spec);
    const auto c = containment_check(spec, tg, n_paths, criterion_seed(seed, 9, k), criterion_seed(seed, 9, k + 1),
                                     0.05, 2);
    k += 2;
    r.pass = r.pass && c.pass;
    detail::append(r.summary, spec.name + " " + fmt(c.out_of_sample.fraction()) + " <= " + fmt(c.bound) + " " +
                                  detail::yes(c.pass));
    Json j = to_json(c.out_of_sample, c.declared_tail);
    j["process"] = spec.name;
    j["bound"] = c.bound;
    j["pass"] = c.pass;
    reports.push_back(j);
  }
  std::ostringstream art;
  write_report_json(art, RunHeader{"support", {{"paths", std::to_string(n_paths)}}, seed}, reports);
  r.artifact = art.str();
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// 10. S_{a,b} on the counterexample

inline CriterionResult criterion10(std::uint64_t seed, std::size_t n_paths = 20000) {
  detail::Stopwatch clock;
  CriterionResult r{10, "S_ab on the counterexample", true, {}, {}, 0.0};
  const auto tg = TimeGrid::uniform(0.0, 1.2, 6);
  const auto bundle = generate_paths(counterexample_process(), tg, n_paths, criterion_seed(seed, 10));
  const auto stats = s_ab_statistic(bundle, -0.5, 0.5);
  const auto set = s_ab_set(bundle, -0.5, 0.5, 0.0);
  bool has_one = false, stray = false;
  for (double t : set) {
    if (std::abs(t - 1.0) < 1e-12) has_one = true;
    else if (t > 0.0) stray = true;
  }
  r.pass = has_one && !stray;
  std::string times;
  for (double t : set) times += (times.empty() ? "" : ",") + fmt(t);
  detail::append(r.summary, "set {" + times + "} " + detail::yes(r.pass));

  Json rows = Json::array();
  for (const auto& s : stats) rows.push_back({{"t", s.t}, {"statistic", s.statistic}});
  std::ostringstream art;
  write_report_json(art, RunHeader{"support", {{"a", "-0.5"}, {"b", "0.5"}}, seed}, rows);
  r.artifact = art.str();
  r.seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// 11. Determinism

/// Reruns the given runners and compares their artifacts with `first`.
inline CriterionResult criterion11(std::uint64_t seed, const std::vector<CriterionResult>& first,
                                   const std::vector<std::function<CriterionResult(std::uint64_t)>>& rerun) {
  detail::Stopwatch clock;
  CriterionResult r{11, "determinism", true, {}, {}, 0.0};
  for (const auto& run : rerun) {
    const auto again = run(seed);
    bool same = false;
    for (const auto& f : first)
      if (f.id == again.id) same = f.artifact == again.artifact && !f.artifact.empty();
    r.pass = r.pass && same;
    detail::append(r.summary, "criterion " + std::to_string(again.id) + " " + (same ? "identical" : "DIFFERS"));
  }
  r.seconds = clock.seconds();
  return r;
}

inline std::string format_line(const CriterionResult& r) {
  return "criterion " + std::to_string(r.id) + " " + (r.pass ? "PASS" : "FAIL") + " " + r.title + ": " + r.summary;
}

/// Runs criteria 1-11 in order; `report` sees each result as it completes.
inline std::vector<CriterionResult> run_all(std::uint64_t seed, const std::function<void(const CriterionResult&)>& report) {
  std::vector<CriterionResult> results;
  auto keep = [&](CriterionResult r) {
    report(r);
    results.push_back(std::move(r));
  };
  keep(criterion1(seed));
  keep(criterion2(seed));
  keep(criterion3(seed));
  keep(criterion4(seed));
  keep(criterion5(seed));
  keep(criterion6(seed));
  keep(criterion7(seed));
  keep(criterion8(seed));
  keep(criterion9(seed));
  keep(criterion10(seed));
  keep(criterion11(seed, results,
                   {[](std::uint64_t s) { return criterion1(s); }, [](std::uint64_t s) { return criterion2(s); },
                    [](std::uint64_t s) { return criterion5(s); }, [](std::uint64_t s) { return criterion8(s); },
                    [](std::uint64_t s) { return criterion10(s); }}));
  return results;
}

}  // namespace mshape::acceptance
