#pragma once

// CSV and JSON writers. Every output starts with (CSV) or carries (JSON) the
// line "# mshape <command> key=value ... seed=N".

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mshape/condexp.hpp"
#include "mshape/couple.hpp"
#include "mshape/shape.hpp"
#include "mshape/simulate.hpp"
#include "mshape/support.hpp"

namespace mshape {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" otherwise.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Non-finite numbers become strings so the JSON stays valid.
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

struct RunHeader {
  std::string command;
  std::vector<std::pair<std::string, std::string>> items;
  std::uint64_t seed = 0;

  RunHeader& add(std::string key, std::string value) {
    items.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  RunHeader& add(std::string key, double value) { return add(std::move(key), fmt(value)); }
  RunHeader& add(std::string key, std::size_t value) { return add(std::move(key), std::to_string(value)); }

  std::string line() const {
    std::string s = "# mshape " + command;
    for (const auto& [k, v] : items) s += " " + k + "=" + v;
    s += " seed=" + std::to_string(seed);
    return s;
  }
};

// ---------------------------------------------------------------------------
// CSV

inline void write_paths_csv(std::ostream& os, const RunHeader& header, const PathBundle& bundle) {
  os << header.line() << "\npath_id,t,x\n";
  const auto& g = bundle.grid();
  for (std::size_t p = 0; p < bundle.n_paths(); ++p)
    for (std::size_t i = 0; i < g.size(); ++i) os << p << ',' << fmt(g[i]) << ',' << fmt(bundle.value(p, i)) << '\n';
}

inline void write_jumps_csv(std::ostream& os, const RunHeader& header, const PathBundle& bundle) {
  os << header.line() << "\npath_id,t,left,right\n";
  for (std::size_t p = 0; p < bundle.n_paths(); ++p)
    for (const auto& e : bundle.jumps(p))
      os << p << ',' << fmt(e.time) << ',' << fmt(e.left) << ',' << fmt(e.right) << '\n';
}

inline void write_surface_csv(std::ostream& os, const RunHeader& header, const GridFunction& f) {
  os << header.line() << "\nt,x,f\n";
  const auto& tg = f.tgrid();
  const auto& xg = f.xgrid();
  for (std::size_t i = 0; i < tg.size(); ++i)
    for (std::size_t j = 0; j < xg.size(); ++j) os << fmt(tg[i]) << ',' << fmt(xg[j]) << ',' << fmt(f.at(i, j)) << '\n';
}

inline void write_support_csv(std::ostream& os, const RunHeader& header, const SupportEstimate& s) {
  os << header.line() << "\nt,interval_lo,interval_hi\n";
  for (std::size_t i = 0; i < s.tgrid().size(); ++i)
    for (const auto& iv : s.slice(i)) os << fmt(s.tgrid()[i]) << ',' << fmt(iv.lo) << ',' << fmt(iv.hi) << '\n';
}

inline void write_events_csv(std::ostream& os, const RunHeader& header, const CrossScan& scan) {
  os << header.line() << "\npath_id,t,pre_gap,post_gap\n";
  for (const auto& e : scan.events)
    os << e.path << ',' << fmt(e.time) << ',' << fmt(e.pre_gap) << ',' << fmt(e.post_gap) << '\n';
}

inline void write_coupling_csv(std::ostream& os, const RunHeader& header, const CouplingOutcome& out) {
  os << header.line() << "\ntrial,tau,at_tau,terminal\n";
  for (std::size_t k = 0; k < out.records.size(); ++k) {
    const auto& r = out.records[k];
    os << k << ',' << fmt(r.tau) << ',' << fmt(r.at_tau) << ',' << fmt(r.terminal) << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const ShapeReport& r) {
  Json loc = Json::array();
  for (const auto& p : r.location) loc.push_back({json_number(p.t), json_number(p.x)});
  return Json{{"property", r.property},
              {"pass", r.pass},
              {"worst", json_number(r.worst)},
              {"location", loc},
              {"tol", json_number(r.tol)}};
}

inline Json to_json(const ContinuityReport& r) {
  Json j = to_json(r.report);
  Json omega = Json::array();
  for (std::size_t d = 0; d < r.deltas.size(); ++d) omega.push_back({json_number(r.deltas[d]), json_number(r.omega[d])});
  j["omega"] = omega;
  return j;
}

inline Json to_json(const CrossScan& s) {
  return Json{{"property", "cross-without-touch"},
              {"pass", s.violating_pairs == 0},
              {"pairs", s.pairs},
              {"violating_pairs", s.violating_pairs},
              {"touching_pairs", s.touching_pairs},
              {"events", s.events.size()}};
}

inline Json to_json(const CouplingOutcome& o, const std::string& property) {
  return Json{{"property", property},
              {"pass", o.pass()},
              {"trials", o.trials},
              {"conditioned", o.conditioned},
              {"mean", json_number(o.mean)},
              {"se", json_number(o.se)},
              {"touched", o.touched},
              {"touch_ok", o.touch_ok},
              {"touch_fraction", json_number(o.touch_fraction())},
              {"touch_tol", json_number(o.touch_tol)}};
}

inline Json to_json(const ContainmentResult& c, double declared_tail) {
  return Json{{"property", "paths-in-support"},
              {"samples", c.samples},
              {"violations", c.violations},
              {"left_limit_samples", c.left_limit_samples},
              {"left_limit_violations", c.left_limit_violations},
              {"fraction", json_number(c.fraction())},
              {"declared_tail", json_number(declared_tail)}};
}

/// {"header": ..., "reports": [...]} as one indented document.
inline void write_report_json(std::ostream& os, const RunHeader& header, const Json& reports) {
  Json doc{{"header", header.line()}, {"reports", reports}};
  os << doc.dump(2) << '\n';
}

}  // namespace mshape
