#pragma once

// Batch front end. Exit codes: 0 when every requested check passes, 1 when a
// check fails, 2 on usage errors (bad flags, unknown names, unsupported runs).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mshape/acceptance.hpp"
#include "mshape/condexp.hpp"
#include "mshape/couple.hpp"
#include "mshape/io.hpp"
#include "mshape/model.hpp"
#include "mshape/shape.hpp"
#include "mshape/simulate.hpp"
#include "mshape/support.hpp"

namespace mshape::cli {

inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsage = 2;

struct RunConfig {
  std::string command;
  std::string process = "bm";
  std::string payoff = "call";
  double strike = 0.0;
  std::optional<double> k;
  std::optional<double> K;
  std::size_t nt = 200;
  std::size_t nx = 400;
  double T = 1.0;
  double xpad = 8.0;
  std::size_t paths = 10000;
  std::size_t pairs = 10000;
  std::uint64_t seed = acceptance::kDefaultSeed;
  double tol = 1e-6;
  double binwidth = 0.05;
  std::size_t min_count = 5;
  double theta = 0.5;
  std::string out = ".";
  bool events = false;

  RunHeader header() const {
    RunHeader h{command, {}, seed};
    h.add("process", process).add("payoff", payoff).add("strike", strike);
    if (k) h.add("k", *k);
    if (K) h.add("K", *K);
    h.add("nt", nt).add("nx", nx).add("T", T).add("xpad", xpad).add("paths", paths).add("pairs", pairs);
    h.add("tol", tol).add("binwidth", binwidth).add("min-count", min_count).add("theta", theta);
    return h;
  }
};

namespace detail {

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("MSHAPE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("MSHAPE_SEED is not an unsigned integer: ") + env);
    }
  }
  return acceptance::kDefaultSeed;
}

class Outputs {
 public:
  explicit Outputs(const std::string& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return f;
  }

 private:
  std::filesystem::path dir_;
};

inline TimeGrid time_grid(const RunConfig& c) { return TimeGrid::uniform(0.0, c.T, c.nt); }

inline SpaceGrid space_grid(const RunConfig& c, const ProcessSpec& spec) {
  const Interval w = working_interval(spec, c.T, c.xpad);
  return SpaceGrid::from_bounds(w.lo, w.hi, c.nx);
}

inline GridFunction surface(const RunConfig& c, const ProcessSpec& spec, const Payoff& g) {
  PdeOptions o;
  o.theta = c.theta;
  return solve_pde(spec, g, time_grid(c), space_grid(c, spec), o);
}

inline void print_reports(std::ostream& os, const Json& reports) {
  for (const auto& r : reports) {
    os << r.value("property", std::string("report")) << ": " << (r.value("pass", false) ? "pass" : "FAIL");
    if (r.contains("worst")) os << " worst=" << r["worst"].dump();
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_simulate(const RunConfig& c, std::ostream& os) {
  const auto spec = find_process(c.process);
  const auto bundle = generate_paths(spec, time_grid(c), c.paths, c.seed);
  const Outputs out(c.out);
  const auto h = c.header();
  auto paths = out.open("paths.csv");
  write_paths_csv(paths, h, bundle);
  auto jumps = out.open("jumps.csv");
  write_jumps_csv(jumps, h, bundle);
  os << "simulated " << bundle.n_paths() << " paths of " << spec.name << " with " << bundle.total_jumps()
     << " jumps\n";
  return kOk;
}

inline int cmd_condexp(const RunConfig& c, std::ostream& os) {
  const auto spec = find_process(c.process);
  const auto g = find_payoff(c.payoff, c.strike);
  const auto f = surface(c, spec, g);
  const Outputs out(c.out);
  auto file = out.open("surface.csv");
  write_surface_csv(file, c.header(), f);
  os << "surface " << f.tgrid().size() << "x" << f.xgrid().size() << " for " << spec.name << "/" << g.name << '\n';
  return kOk;
}

inline int cmd_verify(const RunConfig& c, std::ostream& os) {
  const auto spec = find_process(c.process);
  const auto g = find_payoff(c.payoff, c.strike);
  const auto f = surface(c, spec, g);
  Json reports = Json::array();
  bool pass = true;
  auto add = [&](const ShapeReport& r) {
    pass = pass && r.pass;
    reports.push_back(to_json(r));
  };
  if (g.monotone.value_or(false)) add(check_monotone_all(f, c.tol));
  const auto k = c.k ? c.k : g.lip_lo;
  const auto K = c.K ? c.K : g.lip_hi;
  if (k && K) add(check_lipschitz_all(f, *k, *K, c.tol));
  if (g.convex.value_or(false)) {
    add(check_convex_all(f, c.tol));
    add(check_time_decreasing(f, c.tol));
  }
  const Outputs out(c.out);
  auto file = out.open("report.json");
  write_report_json(file, c.header(), reports);
  auto surf = out.open("surface.csv");
  write_surface_csv(surf, c.header(), f);
  print_reports(os, reports);
  return pass ? kOk : kCheckFailed;
}

inline int cmd_support(const RunConfig& c, std::ostream& os) {
  const auto spec = find_process(c.process);
  const auto tg = time_grid(c);
  const auto ref = generate_paths(spec, tg, c.paths, derive_seed(c.seed, Stream::Paths, 0));
  const auto test = generate_paths(spec, tg, c.paths, derive_seed(c.seed, Stream::Paths, 1));
  const auto support = marginal_support(ref, c.binwidth, c.min_count);
  const double tail = paths_in_support_check(ref, support, 2).fraction();
  const auto contained = paths_in_support_check(test, support, 2);
  const double n = static_cast<double>(c.paths);
  const double p = std::max(tail, 1.0 / n);
  const double bound = tail + 3.0 * std::sqrt(2.0 * p * (1.0 - p) / n);
  const bool contain_ok = contained.fraction() <= bound;
  const auto jumps = jump_past_support_scan(test, support);
  const bool jumps_ok = jumps.empty();

  Json reports = Json::array();
  Json jc = to_json(contained, tail);
  jc["bound"] = bound;
  jc["pass"] = contain_ok;
  reports.push_back(jc);
  reports.push_back(Json{{"property", "jump-past-support"},
                         {"pass", jumps_ok},
                         {"jumps", test.total_jumps()},
                         {"violations", jumps.size()}});
  const Outputs out(c.out);
  const auto h = c.header();
  auto sfile = out.open("support.csv");
  write_support_csv(sfile, h, support);
  auto rfile = out.open("report.json");
  write_report_json(rfile, h, reports);
  print_reports(os, reports);
  return contain_ok && jumps_ok ? kOk : kCheckFailed;
}

inline int cmd_couple(const RunConfig& c, std::ostream& os) {
  const auto spec = find_process(c.process);
  const auto g = find_payoff(c.payoff, c.strike);
  const auto tg = time_grid(c);
  const auto y = generate_paths(spec, tg, c.pairs, derive_seed(c.seed, Stream::CopyA, 0));
  const auto z = generate_paths(spec, tg, c.pairs, derive_seed(c.seed, Stream::CopyB, 0));
  const auto scan = cross_without_touch_scan(y, z, tg.front(), tg.back());
  Json reports = Json::array({to_json(scan)});
  bool pass = scan.violating_pairs == 0;

  if (g.monotone.value_or(false)) {
    TwoCopyConfig cfg;
    cfg.T = c.T;
    cfg.x_low = spec.x0;
    cfg.x_high = spec.x0 + 0.5;
    cfg.n_pairs = c.pairs;
    cfg.seed = c.seed;
    cfg.steps = c.nt;
    const auto two = two_copy_monotone_coupling(spec, g, cfg);
    pass = pass && two.pass();
    reports.push_back(to_json(two, "two-copy-monotone"));
  }

  const Outputs out(c.out);
  const auto h = c.header();
  if (c.events) {
    auto efile = out.open("events.csv");
    write_events_csv(efile, h, scan);
  }
  auto rfile = out.open("report.json");
  write_report_json(rfile, h, reports);
  os << "crossings without touching: " << scan.violating_pairs << " of " << scan.pairs << " pairs\n";
  print_reports(os, reports);
  return pass ? kOk : kCheckFailed;
}

inline int cmd_counterexample(const RunConfig& c, std::ostream& os) {
  const double T = c.T > 1.0 ? c.T : 2.0;
  const auto tg = TimeGrid::uniform(0.0, T, c.nt);
  const auto xg = SpaceGrid::from_bounds(-3.0, 3.0, c.nx);
  const auto f = counterexample_surface(tg, xg);
  const auto bundle = generate_paths(counterexample_process(), tg, c.paths, c.seed);
  const auto support = marginal_support(bundle, c.binwidth, c.min_count);
  const double mesh = std::max(xg.h(), T / static_cast<double>(c.nt));
  const std::vector<double> deltas{8 * mesh, 4 * mesh, 2 * mesh, mesh};
  const double tol = 10.0 * mesh;
  const auto on = check_joint_continuity_on_support(f, support, deltas, tol);
  const auto full = check_joint_continuity(f, deltas, tol);
  const bool demonstrated = !full.report.pass && std::abs(full.report.worst - 1.0) <= 0.05;

  Json reports = Json::array({to_json(on), to_json(full)});
  const Outputs out(c.out);
  RunConfig hc = c;
  hc.T = T;
  const auto h = hc.header();
  auto sfile = out.open("surface.csv");
  write_surface_csv(sfile, h, f);
  auto pfile = out.open("support.csv");
  write_support_csv(pfile, h, support);
  auto rfile = out.open("report.json");
  write_report_json(rfile, h, reports);
  os << "f(1, 0.5) = " << fmt(counterexample_f(1.0, 0.5, T)) << '\n';
  os << "continuity on support: " << (on.report.pass ? "pass" : "FAIL") << " omega=" << fmt(on.report.worst) << '\n';
  os << "full lattice: worst=" << fmt(full.report.worst) << (demonstrated ? " (discontinuous at t=1 as expected)" : " (UNEXPECTED)")
     << '\n';
  return on.report.pass && demonstrated ? kOk : kCheckFailed;
}

inline int cmd_all(const RunConfig& c, std::ostream& os) {
  const Outputs out(c.out);
  auto file = out.open("acceptance.txt");
  file << c.header().line() << '\n';
  bool pass = true;
  acceptance::run_all(c.seed, [&](const acceptance::CriterionResult& r) {
    const auto line = acceptance::format_line(r);
    os << line << std::endl;
    file << line << '\n';
    pass = pass && r.pass;
  });
  return pass ? kOk : kCheckFailed;
}

}  // namespace detail

/// Parses argv and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Shape properties of conditional expectations of martingale diffusions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; flags on the command line take precedence");
  app.allow_config_extras(false);

  RunConfig c;
  try {
    c.seed = detail::default_seed();
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  double k = 0.0, K = 0.0;
  app.add_option("--process", c.process, "catalog process")->capture_default_str();
  app.add_option("--payoff", c.payoff, "payoff name")->capture_default_str();
  app.add_option("--strike", c.strike, "payoff strike or center")->capture_default_str();
  auto* k_opt = app.add_option("--k", k, "lower slope bound");
  auto* K_opt = app.add_option("--K", K, "upper slope bound");
  app.add_option("--nt", c.nt, "time steps")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--nx", c.nx, "space intervals")->check(CLI::Range(2, 1 << 24))->capture_default_str();
  app.add_option("--T", c.T, "horizon")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--xpad", c.xpad, "working interval half-width in volatility units")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--paths", c.paths, "paths per bundle")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--pairs", c.pairs, "coupled pairs")->check(CLI::Range(2, 1 << 30))->capture_default_str();
  app.add_option("--seed", c.seed, "seed (default $MSHAPE_SEED)")->capture_default_str();
  app.add_option("--tol", c.tol, "check tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--binwidth", c.binwidth, "support histogram bin width")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--min-count", c.min_count, "samples a bin needs to count as supported")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--theta", c.theta, "time-stepping weight")->check(CLI::Range(0.5, 1.0))->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_flag("--events", c.events, "also write crossing events (couple)");

  for (const char* name : {"simulate", "condexp", "verify", "support", "couple", "counterexample", "all"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("simulate")->description("simulate a path bundle");
  app.get_subcommand("condexp")->description("solve for the conditional expectation surface");
  app.get_subcommand("verify")->description("check monotonicity, slope bounds, convexity and time decrease");
  app.get_subcommand("support")->description("estimate the marginal support and test containment");
  app.get_subcommand("couple")->description("coupling experiments on independent copies");
  app.get_subcommand("counterexample")->description("reproduce the discontinuous counterexample");
  app.get_subcommand("all")->description("run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    os << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }
  if (*k_opt) c.k = k;
  if (*K_opt) c.K = K;
  if (c.k && c.K && *c.k > *c.K) {
    err << "--k must not exceed --K\n";
    return kUsage;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    if (c.command == "simulate") return detail::cmd_simulate(c, os);
    if (c.command == "condexp") return detail::cmd_condexp(c, os);
    if (c.command == "verify") return detail::cmd_verify(c, os);
    if (c.command == "support") return detail::cmd_support(c, os);
    if (c.command == "couple") return detail::cmd_couple(c, os);
    if (c.command == "counterexample") return detail::cmd_counterexample(c, os);
    return detail::cmd_all(c, os);
  } catch (const UnknownName& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedProcess& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace mshape::cli
