#ifndef COSTLAM_REPORT_HPP
#define COSTLAM_REPORT_HPP

// Machine-readable reports. Every emitted document parses back into the
// structure it came from; nothing scheduling-dependent (timings, job counts)
// is written, so equal runs give byte-identical output.

#include <string>
#include <vector>

#include <json.hpp>

#include "costlam/harness.hpp"
#include "costlam/lattice.hpp"
#include "costlam/model.hpp"

namespace costlam {

using json = nlohmann::ordered_json;

inline std::string mode_name(Mode m) { return m == Mode::Paper ? "paper" : "sound"; }

inline Mode mode_from_name(const std::string& s) {
  if (s == "paper") return Mode::Paper;
  if (s == "sound") return Mode::Sound;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

namespace detail {

inline json observed_json(const Observed& obs) {
  json out = json::array();
  for (auto& [k, v] : obs) out.push_back(json::array({k, v}));
  return out;
}

inline Observed observed_from(const json& j) {
  Observed out;
  for (auto& p : j) out.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  return out;
}

}  // namespace detail

// ---- property reports ------------------------------------------------------

inline json to_json(const PropertyReport& r) {
  json fs = json::array();
  for (auto& f : r.failures)
    fs.push_back({{"trial", f.trial},
                  {"term", f.term},
                  {"relation", f.relation},
                  {"observed", detail::observed_json(f.observed)},
                  {"minimized", f.minimized},
                  {"minimized_observed", detail::observed_json(f.minimized_observed)}});
  json stats = json::object();
  for (auto& [k, v] : r.stats) stats[k] = v;
  return {{"property", r.property},
          {"lattice", r.lattice},
          {"mode", mode_name(r.mode)},
          {"seed", r.seed},
          {"max_depth", r.max_depth},
          {"allow_fn_var_reuse", r.allow_fn_var_reuse},
          {"trials", r.trials},
          {"failure_count", r.failure_count},
          {"expected_clean", r.expected_clean},
          {"ok", r.ok()},
          {"stats", stats},
          {"failures", fs}};
}

inline PropertyReport property_report_from_json(const json& j) {
  PropertyReport r;
  r.property = j.at("property").get<std::string>();
  r.lattice = j.at("lattice").get<std::string>();
  r.mode = mode_from_name(j.at("mode").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.max_depth = j.at("max_depth").get<std::size_t>();
  r.allow_fn_var_reuse = j.at("allow_fn_var_reuse").get<bool>();
  r.trials = j.at("trials").get<std::size_t>();
  r.failure_count = j.at("failure_count").get<std::size_t>();
  r.expected_clean = j.at("expected_clean").get<bool>();
  for (auto& [k, v] : j.at("stats").items()) r.stats[k] = v.get<std::size_t>();
  for (auto& f : j.at("failures")) {
    PropertyFailure pf;
    pf.trial = f.at("trial").get<std::size_t>();
    pf.term = f.at("term").get<std::string>();
    pf.relation = f.at("relation").get<std::string>();
    pf.observed = detail::observed_from(f.at("observed"));
    pf.minimized = f.at("minimized").get<std::string>();
    pf.minimized_observed = detail::observed_from(f.at("minimized_observed"));
    r.failures.push_back(std::move(pf));
  }
  return r;
}

// ---- lattice laws ----------------------------------------------------------

inline json to_json(const LawReport& r, const Lattice& lat) {
  json laws = json::array();
  for (auto& l : r.laws) {
    json w = json::array();
    for (auto& e : l.witness) w.push_back(lat.format(e));
    laws.push_back({{"law", l.law}, {"passed", l.passed}, {"checked", l.checked}, {"witness", w}});
  }
  return {{"lattice", r.lattice}, {"sample_size", r.sample_size}, {"passed", r.passed()}, {"laws", laws}};
}

inline LawReport law_report_from_json(const json& j, const Lattice& lat) {
  LawReport r;
  r.lattice = j.at("lattice").get<std::string>();
  r.sample_size = j.at("sample_size").get<std::size_t>();
  for (auto& l : j.at("laws")) {
    LawResult lr;
    lr.law = l.at("law").get<std::string>();
    lr.passed = l.at("passed").get<bool>();
    lr.checked = l.at("checked").get<std::size_t>();
    for (auto& w : l.at("witness")) lr.witness.push_back(lat.parse_literal(w.get<std::string>()));
    r.laws.push_back(std::move(lr));
  }
  return r;
}

// ---- model checks ----------------------------------------------------------

inline json to_json(const CheckReport& r) {
  json u = json::object();
  for (auto& [k, v] : r.universe) u[k] = v;
  return {{"check", r.check},         {"lattice", r.lattice},   {"subject", r.subject},
          {"passed", r.passed},       {"exhaustive", r.exhaustive}, {"checked", r.checked},
          {"counterexample", r.counterexample}, {"universe", u}};
}

inline CheckReport check_report_from_json(const json& j) {
  CheckReport r;
  r.check = j.at("check").get<std::string>();
  r.lattice = j.at("lattice").get<std::string>();
  r.subject = j.at("subject").get<std::string>();
  r.passed = j.at("passed").get<bool>();
  r.exhaustive = j.at("exhaustive").get<bool>();
  r.checked = j.at("checked").get<std::size_t>();
  r.counterexample = j.at("counterexample").get<std::string>();
  for (auto& [k, v] : j.at("universe").items()) r.universe[k] = v.get<std::size_t>();
  return r;
}

inline json to_json(const PreservationReport& r) {
  json fs = json::array();
  for (auto& c : r.failures)
    fs.push_back({{"term", c.term},
                  {"bound", c.bound},
                  {"model_cost", c.model_cost},
                  {"eval_cost", c.eval_cost},
                  {"value_agrees", c.value_agrees},
                  {"cost_within", c.cost_within},
                  {"cost_exact", c.cost_exact},
                  {"error", c.error}});
  return {{"lattice", r.lattice}, {"mode", mode_name(r.mode)}, {"terms", r.terms}, {"passed", r.passed},
          {"exact", r.exact},     {"ok", r.ok()},              {"failures", fs}};
}

inline PreservationReport preservation_report_from_json(const json& j) {
  PreservationReport r;
  r.lattice = j.at("lattice").get<std::string>();
  r.mode = mode_from_name(j.at("mode").get<std::string>());
  r.terms = j.at("terms").get<std::size_t>();
  r.passed = j.at("passed").get<std::size_t>();
  r.exact = j.at("exact").get<std::size_t>();
  for (auto& c : j.at("failures")) {
    PreservationCase pc;
    pc.term = c.at("term").get<std::string>();
    pc.bound = c.at("bound").get<std::string>();
    pc.model_cost = c.at("model_cost").get<std::string>();
    pc.eval_cost = c.at("eval_cost").get<std::string>();
    pc.value_agrees = c.at("value_agrees").get<bool>();
    pc.cost_within = c.at("cost_within").get<bool>();
    pc.cost_exact = c.at("cost_exact").get<bool>();
    pc.error = c.at("error").get<std::string>();
    r.failures.push_back(std::move(pc));
  }
  return r;
}

}  // namespace costlam

#endif  // COSTLAM_REPORT_HPP
