#ifndef COSTLAM_CLI_HPP
#define COSTLAM_CLI_HPP

// The costlam command line: check, eval, fuzz, model and laws over one
// session (lattice, deltas, mode, budget, fuel, output format).
//
// Exit codes: 0 success, 1 budget or property violation, 2 input error.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "costlam/eval.hpp"
#include "costlam/harness.hpp"
#include "costlam/lattice.hpp"
#include "costlam/model.hpp"
#include "costlam/parse.hpp"
#include "costlam/report.hpp"
#include "costlam/typing.hpp"

namespace costlam {

enum class OutputFormat { Text, Json };

/// Raised for anything that should exit with 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SessionConfig {
  std::string lattice = "nat";
  std::string lattice_file;  // wins over `lattice` when set
  std::map<std::string, std::string> deltas;  // app, if, unbox, proj
  Mode mode = Mode::Sound;
  std::string budget;  // empty: the lattice's large element
  std::uint64_t fuel = default_fuel;
  OutputFormat format = OutputFormat::Text;
};

/// Resolved session: literals parsed against the selected lattice.
struct Session {
  SessionConfig config;
  Lattice lat;
  DeltaProfile deltas;
  Element budget;

  static Session open(const SessionConfig& cfg) {
    try {
      Lattice lat = cfg.lattice_file.empty() ? parse_lattice_spec(cfg.lattice) : load_lattice_file(cfg.lattice_file);
      auto d = DeltaProfile::defaults(lat);
      for (auto& [k, v] : cfg.deltas) {
        auto e = lat.parse_literal(v);
        if (k == "app") d.app = e;
        else if (k == "if") d.iff = e;
        else if (k == "unbox") d.unbox = e;
        else if (k == "proj") d.proj = e;
        else if (k == "all") d = DeltaProfile::uniform(e);
        else throw InputError("unknown delta '" + k + "' (expected app, if, unbox, proj or all)");
      }
      auto budget = cfg.budget.empty() ? lat.large() : lat.parse_literal(cfg.budget);
      return {cfg, lat, d, budget};
    } catch (const LatticeError& e) {
      throw InputError(e.what());
    }
  }
};

/// `key = value` lines; `#` starts a comment. Keys: lattice, lattice-file,
/// mode, budget, fuel, format, delta.app, delta.if, delta.unbox, delta.proj.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(path + ":" + std::to_string(n) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

namespace detail {

inline std::string read_program(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void print_derivation(std::ostream& out, const Derivation& d, const Lattice& lat, int depth = 0) {
  out << std::string(2 * depth, ' ') << "(" << d.rule << ") " << format(d.subject, lat) << " : " << format(d.type, lat)
      << " ; " << lat.format(d.bound) << "\n";
  for (auto& p : d.premises) print_derivation(out, p, lat, depth + 1);
}

inline json derivation_json(const Derivation& d, const Lattice& lat) {
  json ps = json::array();
  for (auto& p : d.premises) ps.push_back(derivation_json(p, lat));
  return {{"rule", d.rule},
          {"subject", format(d.subject, lat)},
          {"type", format(d.type, lat)},
          {"bound", lat.format(d.bound)},
          {"premises", ps}};
}

inline void print_eval_trace(std::ostream& out, const EvalTrace& t, const Lattice& lat, int depth = 0) {
  out << std::string(2 * depth, ' ') << "(" << t.rule << ") " << format(t.subject, lat) << " +"
      << lat.format(t.contribution) << "\n";
  for (auto& c : t.children) print_eval_trace(out, c, lat, depth + 1);
}

inline json eval_trace_json(const EvalTrace& t, const Lattice& lat) {
  json cs = json::array();
  for (auto& c : t.children) cs.push_back(eval_trace_json(c, lat));
  return {{"rule", t.rule}, {"subject", format(t.subject, lat)}, {"contribution", lat.format(t.contribution)},
          {"children", cs}};
}

inline std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  auto dots = s.find("..");
  try {
    if (dots == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    auto lo = std::stoull(s.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument(s);
    auto rest = s.substr(dots + 2);
    auto hi = std::stoull(rest, &used);
    if (used != rest.size() || lo > hi) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw InputError("bad range '" + s + "' (expected lo..hi)");
  }
}

inline void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << "\n"; }

}  // namespace detail

// ---- commands --------------------------------------------------------------

inline int cmd_check(const std::string& file, const Session& s, bool trace, std::ostream& out) {
  const auto& lat = s.lat;
  auto term = parse(detail::read_program(file), lat);
  Typechecker tc(lat, s.config.mode, s.deltas, trace);
  auto j = tc.synthesize(term, s.budget);
  if (s.config.format == OutputFormat::Json) {
    json doc = {{"command", "check"},        {"mode", mode_name(s.config.mode)}, {"lattice", lat.name()},
                {"type", format(j.type, lat)}, {"bound", lat.format(j.bound)},   {"budget", lat.format(s.budget)},
                {"within_budget", j.within_budget}};
    if (trace) doc["trace"] = detail::derivation_json(j.trace, lat);
    detail::emit(out, doc);
  } else {
    out << format(j.type, lat) << ", bound " << lat.format(j.bound) << ", budget " << lat.format(s.budget) << ", "
        << (j.within_budget ? "OK" : "EXCEEDED") << "\n";
    if (!j.within_budget) out << "bound " << lat.format(j.bound) << " exceeds budget " << lat.format(s.budget) << "\n";
    if (trace) detail::print_derivation(out, j.trace, lat);
  }
  return j.within_budget ? 0 : 1;
}

inline int cmd_eval(const std::string& file, const Session& s, bool unsafe, bool trace, std::ostream& out) {
  const auto& lat = s.lat;
  auto term = parse(detail::read_program(file), lat);
  std::optional<Judgment> j;
  if (!unsafe || is_closed(term)) {
    try {
      j = Typechecker(lat, s.config.mode, s.deltas, false).synthesize(term, s.budget);
    } catch (const TypeError&) {
      if (!unsafe) throw;
    }
  }
  Evaluator ev(lat, s.deltas, s.config.fuel);
  CostedResult r;
  EvalTrace tr;
  try {
    if (trace) std::tie(r, tr) = ev.eval_trace(term);
    else r = ev.eval(term);
  } catch (const Stuck& e) {
    throw InputError(std::string("internal invariant failure: evaluation stuck: ") + e.what());
  } catch (const FuelExhausted& e) {
    throw InputError(e.what());
  }
  const bool violation = j && !lat.leq(r.cost, j->bound);
  if (s.config.format == OutputFormat::Json) {
    json doc = {{"command", "eval"},
                {"mode", mode_name(s.config.mode)},
                {"lattice", lat.name()},
                {"value", format(r.value, lat)},
                {"cost", lat.format(r.cost)},
                {"typed", j.has_value()}};
    if (j) {
      doc["type"] = format(j->type, lat);
      doc["bound"] = lat.format(j->bound);
      doc["soundness_violation"] = violation;
    }
    if (trace) doc["trace"] = detail::eval_trace_json(tr, lat);
    detail::emit(out, doc);
  } else {
    out << "value " << format(r.value, lat) << ", cost " << lat.format(r.cost);
    if (j) out << (violation ? " ⋠" : " ⪯") << " bound " << lat.format(j->bound);
    else out << " (untyped)";
    out << "\n";
    if (violation) out << "SOUNDNESS-VIOLATION k=" << lat.format(r.cost) << " b=" << lat.format(j->bound) << "\n";
    if (trace) detail::print_eval_trace(out, tr, lat);
  }
  return violation ? 1 : 0;
}

struct FuzzOptions {
  std::size_t count = 10000;
  std::uint64_t seed = 42;
  std::size_t max_depth = 6;
  unsigned jobs = 1;
  std::string property = "all";
  bool reuse = true;
  bool hunter = false;  // paper_hunter_config generator settings
  std::size_t max_kept = 25;
};

inline int cmd_fuzz(const FuzzOptions& o, const Session& s, std::ostream& out) {
  SuiteConfig cfg;
  cfg.gen = o.hunter ? paper_hunter_config(o.seed, o.reuse) : GenConfig{};
  cfg.gen.seed = o.seed;
  cfg.gen.count = o.count;
  cfg.gen.mode = s.config.mode;
  cfg.gen.allow_fn_var_reuse = o.reuse;
  if (!o.hunter) cfg.gen.max_depth = o.max_depth;
  cfg.lattice = s.lat;
  cfg.deltas = s.deltas;
  cfg.jobs = o.jobs;
  cfg.max_kept = o.max_kept;
  std::vector<std::string> names;
  if (o.property == "all") names = property_names();
  else names = {o.property};
  std::vector<PropertyReport> reps;
  for (auto& n : names) {
    try {
      reps.push_back(run_named_property(n, cfg));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  bool ok = std::all_of(reps.begin(), reps.end(), [](auto& r) { return r.ok(); });
  if (s.config.format == OutputFormat::Json) {
    json arr = json::array();
    for (auto& r : reps) arr.push_back(to_json(r));
    detail::emit(out, {{"command", "fuzz"}, {"ok", ok}, {"reports", arr}});
  } else {
    for (auto& r : reps) {
      out << r.property << ": " << r.failure_count << "/" << r.trials << " failures"
          << (r.expected_clean ? "" : " (violations expected)") << (r.ok() ? "" : " FAIL") << "\n";
      for (auto& f : r.failures) {
        out << "  trial " << f.trial << ": " << f.relation;
        for (auto& [k, v] : f.observed) out << " " << k << "=" << v;
        out << "\n    term      " << f.term << "\n";
        if (!f.minimized.empty()) {
          out << "    minimized " << f.minimized;
          for (auto& [k, v] : f.minimized_observed) out << " " << k << "=" << v;
          out << "\n";
        }
      }
    }
  }
  return ok ? 0 : 1;
}

struct ModelOptions {
  std::vector<Mode> modes = {Mode::Sound, Mode::Paper};
  EnumBudget budget;
  std::size_t terms = 0;  // cost-preservation corpus size, 0 to skip
  std::uint64_t seed = 42;
  std::size_t max_depth = 4;
};

inline int cmd_model(const ModelOptions& o, const Session& s, std::ostream& out) {
  const auto& lat = s.lat;
  if (!lat.is_finite()) throw InputError("model checks need a finite lattice, got " + lat.name());
  std::vector<CheckReport> checks;
  std::vector<PreservationReport> pres;
  for (auto m : o.modes) {
    auto b = o.budget;
    b.mode = m;
    b.deltas = s.deltas;
    auto rs = run_model_checks(lat, b);
    checks.insert(checks.end(), rs.begin(), rs.end());
    if (o.terms > 0 && m == Mode::Sound) {
      GenConfig g;
      g.seed = o.seed;
      g.count = o.terms;
      g.max_depth = o.max_depth;
      g.mode = m;
      pres.push_back(check_cost_preservation(generate_corpus(g, lat, s.deltas), DenModel(lat, s.deltas, s.config.fuel),
                                             s.deltas, m));
    }
  }
  auto finding = check_internal_naturality_detailed(lat).literal_combine;
  bool ok = std::all_of(checks.begin(), checks.end(), [](auto& c) { return c.passed; }) &&
            std::all_of(pres.begin(), pres.end(), [](auto& p) { return p.ok(); });
  if (s.config.format == OutputFormat::Json) {
    json cs = json::array(), ps = json::array();
    for (auto& c : checks) cs.push_back(to_json(c));
    for (auto& p : pres) ps.push_back(to_json(p));
    detail::emit(out, {{"command", "model"},
                       {"lattice", lat.name()},
                       {"ok", ok},
                       {"checks", cs},
                       {"preservation", ps},
                       {"findings", json::array({to_json(finding)})}});
  } else {
    for (auto& c : checks) {
      out << (c.passed ? "pass " : "FAIL ") << c.check << " " << c.subject << " (" << c.checked << " checked"
          << (c.exhaustive ? "" : ", truncated") << ")";
      if (!c.passed) out << ": " << c.counterexample;
      out << "\n";
    }
    for (auto& p : pres)
      out << (p.ok() ? "pass " : "FAIL ") << "cost-preservation " << p.passed << "/" << p.terms << " (" << p.exact
          << " exact) [" << mode_name(p.mode) << "]\n";
    out << "finding " << finding.check << ": " << (finding.passed ? "holds" : "fails " + finding.counterexample) << "\n";
  }
  return ok ? 0 : 1;
}

inline int cmd_laws(const std::optional<std::pair<std::uint64_t, std::uint64_t>>& range, const Session& s,
                    std::ostream& out) {
  const auto& lat = s.lat;
  std::vector<Element> sample;
  if (range) sample = sample_range(lat, range->first, range->second);
  else if (!lat.is_finite()) sample = sample_range(lat, 0, 20);
  auto r = check_laws(lat, sample);
  if (s.config.format == OutputFormat::Json) {
    auto doc = to_json(r, lat);
    doc["command"] = "laws";
    detail::emit(out, doc);
  } else {
    for (auto& l : r.laws) {
      out << (l.passed ? "pass " : "FAIL ") << l.law << " (" << l.checked << " checked)";
      if (!l.passed) {
        out << ": ";
        for (std::size_t i = 0; i < l.witness.size(); ++i) out << (i ? ", " : "") << lat.format(l.witness[i]);
      }
      out << "\n";
    }
  }
  return r.passed() ? 0 : 1;
}

// ---- entry point -----------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"costlam: resource-bounded lambda calculus toolchain"};
  app.require_subcommand(1);
  app.fallthrough();  // session options may follow the subcommand
  SessionConfig sc;
  std::string mode = "sound", format = "text", config_file;
  std::vector<std::string> delta_flags;
  auto* o_lat = app.add_option("--lattice", sc.lattice, "nat, gas, triple, chain2, sat(N), prod(A,B,...)");
  auto* o_file = app.add_option("--lattice-file", sc.lattice_file, "finite lattice table file");
  auto* o_delta = app.add_option("--delta", delta_flags, "rule cost, e.g. app=1 (app, if, unbox, proj, all)");
  auto* o_mode = app.add_option("--mode", mode, "sound or paper")->check(CLI::IsMember({"sound", "paper"}));
  auto* o_budget = app.add_option("--budget", sc.budget, "budget literal (default: the large element)");
  auto* o_fuel = app.add_option("--fuel", sc.fuel, "evaluation step limit");
  auto* o_format = app.add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--config", config_file, "key = value file; flags override it");

  bool trace = false, unsafe = false, json_flag = false;
  std::string file;
  auto* check = app.add_subcommand("check", "typecheck and compare the bound with the budget");
  check->add_option("file", file)->required();
  check->add_flag("--trace", trace, "print the typing derivation");
  auto* eval = app.add_subcommand("eval", "typecheck, then evaluate and compare cost with bound");
  eval->add_option("file", file)->required();
  eval->add_flag("--trace", trace, "print the evaluation derivation");
  eval->add_flag("--unsafe-eval", unsafe, "evaluate even if the term does not typecheck");

  FuzzOptions fo;
  std::string reuse = "on";
  auto* fuzz = app.add_subcommand("fuzz", "run the property suites on generated terms");
  fuzz->add_option("--count", fo.count, "trials per property");
  fuzz->add_option("--seed", fo.seed);
  fuzz->add_option("--depth", fo.max_depth, "maximum term depth");
  fuzz->add_option("--jobs", fo.jobs, "worker threads");
  fuzz->add_option("--property", fo.property, "property name or all");
  fuzz->add_option("--reuse", reuse, "function-variable reuse: on or off")->check(CLI::IsMember({"on", "off"}));
  fuzz->add_flag("--hunter", fo.hunter, "generator settings for hunting paper-mode violations");
  fuzz->add_option("--max-kept", fo.max_kept, "failures reported and minimized in full");
  fuzz->add_flag("--json", json_flag, "same as --format json");

  ModelOptions mo;
  std::string model_mode = "both";
  auto* model = app.add_subcommand("model", "finite presheaf model checks");
  model->add_option("--max-nat", mo.budget.max_nat);
  model->add_option("--corpus", mo.budget.corpus_size, "lambda corpus size bound");
  model->add_option("--terms", mo.terms, "cost-preservation corpus size (0 skips)");
  model->add_option("--model-mode", model_mode)->check(CLI::IsMember({"sound", "paper", "both"}));
  model->add_flag("--json", json_flag, "same as --format json");

  std::string sample;
  auto* laws = app.add_subcommand("laws", "check the lattice laws");
  laws->add_option("--sample", sample, "lo..hi sample for infinite lattices");
  laws->add_flag("--json", json_flag, "same as --format json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (!config_file.empty()) {
      for (auto& [k, v] : read_config_file(config_file)) {
        if (k == "lattice") { if (!o_lat->count()) sc.lattice = v; }
        else if (k == "lattice-file") { if (!o_file->count() && !o_lat->count()) sc.lattice_file = v; }
        else if (k == "mode") { if (!o_mode->count()) mode = v; }
        else if (k == "budget") { if (!o_budget->count()) sc.budget = v; }
        else if (k == "format") { if (!o_format->count()) format = v; }
        else if (k == "fuel") { if (!o_fuel->count()) sc.fuel = std::stoull(v); }
        else if (k.rfind("delta.", 0) == 0) { if (!o_delta->count()) sc.deltas[k.substr(6)] = v; }
        else throw InputError("unknown config key '" + k + "'");
      }
    }
    if (o_lat->count()) sc.lattice_file.clear();
    for (auto& d : delta_flags) {
      auto eq = d.find('=');
      if (eq == std::string::npos) throw InputError("bad --delta '" + d + "' (expected rule=literal)");
      sc.deltas[d.substr(0, eq)] = d.substr(eq + 1);
    }
    auto m = parse_mode(mode);
    if (!m) throw InputError("unknown mode '" + mode + "'");
    sc.mode = *m;
    if (format != "text" && format != "json") throw InputError("unknown format '" + format + "'");
    sc.format = format == "json" || json_flag ? OutputFormat::Json : OutputFormat::Text;
    auto s = Session::open(sc);

    if (*check) return cmd_check(file, s, trace, out);
    if (*eval) return cmd_eval(file, s, unsafe, trace, out);
    if (*fuzz) {
      fo.reuse = reuse == "on";
      return cmd_fuzz(fo, s, out);
    }
    if (*model) {
      if (model_mode == "sound") mo.modes = {Mode::Sound};
      else if (model_mode == "paper") mo.modes = {Mode::Paper};
      return cmd_model(mo, s, out);
    }
    if (*laws) {
      std::optional<std::pair<std::uint64_t, std::uint64_t>> range;
      if (!sample.empty()) range = detail::parse_range(sample);
      return cmd_laws(range, s, out);
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const TypeError& e) {
    err << "type error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const LatticeError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace costlam

#endif  // COSTLAM_CLI_HPP
