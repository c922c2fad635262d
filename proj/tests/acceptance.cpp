// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runtime limits are part of each criterion.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "costlam/cli.hpp"

using namespace costlam;

namespace {

const std::string data = COSTLAM_TEST_DATA;

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Verdict {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, std::string what) {
    if (!cond) {
      ok = false;
      notes.push_back("failed: " + std::move(what));
    }
  }
  void note(std::string s) { notes.push_back(std::move(s)); }
};

bool criterion(int n, const std::string& title, double limit_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.ok = false;
    v.notes.push_back(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool in_time = limit_s <= 0 || secs < limit_s;
  if (!in_time) v.notes.push_back("over the time limit");
  bool ok = v.ok && in_time;
  std::ostringstream t;
  t.setf(std::ios::fixed);
  t.precision(2);
  t << secs << " s";
  if (limit_s > 0) t << " / " << limit_s << " s";
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << n << ": " << title << " (" << t.str() << ")\n";
  for (auto& s : v.notes) std::cout << "        " << s << "\n";
  std::cout.flush();
  return ok;
}

SuiteConfig suite(const Lattice& lat, Mode mode, std::size_t count) {
  SuiteConfig cfg;
  cfg.lattice = lat;
  cfg.deltas = DeltaProfile::defaults(lat);
  cfg.gen.mode = mode;
  cfg.gen.count = count;
  cfg.jobs = jobs();
  return cfg;
}

std::string summary(const PropertyReport& r) {
  std::string s = r.property + " [" + r.lattice + ", " + mode_name(r.mode) + "]: " + std::to_string(r.failure_count) +
                  "/" + std::to_string(r.trials) + " failures";
  if (!r.failures.empty()) s += "; first: " + r.failures[0].term + " (" + r.failures[0].relation + ")";
  return s;
}

std::string cli_output(std::vector<std::string> args) {
  args.insert(args.begin(), "costlam");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code == 2) throw std::runtime_error("cli input error: " + err.str());
  return out.str();
}

std::vector<std::string> lattice_files() {
  std::vector<std::string> out;
  for (auto& e : std::filesystem::directory_iterator(data))
    if (e.path().extension() == ".lat") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int main() {
  bool all = true;
  const auto nat = Lattice::nat();
  const auto triple = Lattice::triple();

  all &= criterion(1, "lattice laws", 10, [&](Verdict& v) {
    auto check = [&](const Lattice& lat, std::vector<Element> sample) {
      auto r = check_laws(lat, std::move(sample));
      std::string failed;
      for (auto& l : r.laws)
        if (!l.passed) failed += " " + l.law;
      v.require(r.passed(), r.lattice + " laws:" + failed);
      return r.sample_size;
    };
    check(chain2(), {});
    for (std::uint64_t cap = 2; cap <= 12; ++cap) check(Lattice::saturating(cap), {});
    auto n = check(triple, sample_range(triple, 0, 6));
    auto prod = Lattice::product({nat, nat});
    std::vector<Element> ps;
    for (std::uint64_t i = 0; i <= 6; ++i)
      for (std::uint64_t j = 0; j <= 6; ++j) ps.push_back(prod.tuple(std::vector<Element>{nat.natural(i), nat.natural(j)}));
    auto m = check(prod, ps);
    v.note("chain2, sat(2..12) exhaustive; triple " + std::to_string(n) + " points of {0..6}^3; prod(nat,nat) " +
           std::to_string(m) + " points");
    for (auto name : {"nonassoc", "nonmonotone"}) {
      auto lat = load_lattice_file(data + "/bad/" + name + ".lat");
      auto r = check_laws(lat);
      bool witnessed = false;
      for (auto& l : r.laws) witnessed |= !l.passed && !l.witness.empty();
      v.require(!r.passed() && witnessed, std::string("corrupted table ") + name + " flagged with a witness");
    }
    auto assoc = check_laws(load_lattice_file(data + "/bad/nonassoc.lat")).find("combine-associative");
    v.require(assoc && !assoc->passed && assoc->witness.size() == 3, "associativity witness triple");
  });

  all &= criterion(2, "cost soundness, sound mode", 60, [&](Verdict& v) {
    auto a = suite(nat, Mode::Sound, 10000);
    a.gen.max_depth = 6;
    auto ra = prop_cost_soundness(a);
    auto b = suite(triple, Mode::Sound, 10000);
    b.gen.max_depth = 6;
    v.require(b.deltas == DeltaProfile::uniform(triple.triple_of(1, 0, 0)), "triple deltas are (1,0,0)");
    auto rb = prop_cost_soundness(b);
    for (auto* r : {&ra, &rb}) {
      v.require(r->failure_count == 0 && r->trials == 10000, summary(*r));
      v.note(summary(*r));
    }
  });

  all &= criterion(3, "paper-mode boundary", 0, [&](Verdict& v) {
    SuiteConfig off;
    off.gen = paper_hunter_config(42, false);
    off.gen.count = 10000;
    off.jobs = jobs();
    auto r_off = prop_cost_soundness(off);
    v.require(r_off.failure_count == 0, "reuse disabled: " + summary(r_off));
    v.note("reuse disabled, hunter generator: " + summary(r_off));
    auto plain = suite(nat, Mode::Paper, 10000);
    plain.gen.allow_fn_var_reuse = false;
    auto r_plain = prop_cost_soundness(plain);
    v.require(r_plain.failure_count == 0, "reuse disabled: " + summary(r_plain));
    v.note("reuse disabled, default generator: " + summary(r_plain));

    SuiteConfig on = off;
    on.gen = paper_hunter_config(42, true);
    on.gen.count = 100000;
    on.max_kept = on.gen.count;
    auto r_on = prop_cost_soundness(on);
    v.require(r_on.failure_count > 0, "reuse enabled finds violations");
    const auto canonical =
        parse("(lam f : Bool -> Bool . (f tt, f tt)) (lam x : Bool . if x then ff else tt)", nat);
    std::size_t hits = 0;
    for (auto& f : r_on.failures) {
      if (!alpha_eq(parse(f.minimized, nat), canonical)) continue;
      Observed want = {{"type", "Bool * Bool"}, {"k", "5"}, {"b", "4"}};
      if (f.minimized_observed != want) continue;
      ++hits;
      v.note("trial " + std::to_string(f.trial) + ": " + f.term + "  =>  " + f.minimized);
    }
    v.require(hits > 0, "a violation minimizes to the canonical witness with k=5, b=4");
    v.note("reuse enabled, hunter generator: " + std::to_string(r_on.failure_count) + "/" +
           std::to_string(r_on.trials) + " violations, " + std::to_string(hits) + " minimize to the canonical witness");
  });

  all &= criterion(4, "metatheory suites, sound mode", 120, [&](Verdict& v) {
    auto cfg = suite(nat, Mode::Sound, 10000);
    for (auto& name : {"determinism", "preservation", "budget_weakening", "box_laws", "substitution"}) {
      auto r = run_named_property(name, cfg);
      v.require(r.failure_count == 0 && r.trials == 10000, summary(r));
      v.note(summary(r));
    }
  });

  all &= criterion(5, "finite model checks", 120, [&](Verdict& v) {
    std::vector<Lattice> lats = {chain2(), Lattice::saturating(2), Lattice::saturating(3)};
    for (auto& f : lattice_files()) lats.push_back(load_lattice_file(f));
    std::size_t checks = 0, truncated = 0;
    for (auto& lat : lats) {
      if (lat.elements().size() > 8) continue;
      for (auto mode : {Mode::Sound, Mode::Paper}) {
        EnumBudget b;
        b.mode = mode;
        for (auto& c : run_model_checks(lat, b)) {
          ++checks;
          if (!c.exhaustive) ++truncated;
          v.require(c.passed, c.check + " " + c.subject + " on " + lat.name() + ": " + c.counterexample);
        }
      }
    }
    v.require(truncated == 0, std::to_string(truncated) + " checks ran on truncated universes");
    v.note(std::to_string(lats.size()) + " lattices, both modes, " + std::to_string(checks) + " checks");
  });

  all &= criterion(6, "interpretation functor cost preservation", 30, [&](Verdict& v) {
    GenConfig g;
    g.count = 500;
    g.max_depth = 4;
    auto d = DeltaProfile::defaults(nat);
    auto r = check_cost_preservation(generate_corpus(g, nat, d), DenModel(nat, d), d, Mode::Sound);
    v.require(r.terms == 500 && r.ok(), std::to_string(r.passed) + "/" + std::to_string(r.terms) + " terms agree");
    if (!r.failures.empty()) v.note("first: " + r.failures[0].term + " " + r.failures[0].error);
    v.note(std::to_string(r.passed) + "/500 agree, " + std::to_string(r.exact) + " with model cost = eval cost");
  });

  all &= criterion(7, "worked-arithmetic goldens", 0, [&](Verdict& v) {
    auto d = DeltaProfile::defaults(nat);
    auto budget = nat.natural(100);
    auto eval_golden = [&](const char* src, const char* value, std::uint64_t cost) {
      auto r = Evaluator(nat, d).eval(parse(src, nat));
      v.require(format(r.value, nat) == value && r.cost == nat.natural(cost),
                std::string(src) + " => " + format(r.value, nat) + " @ " + nat.format(r.cost));
    };
    eval_golden("tt", "tt", 0);
    eval_golden("if tt then ff else tt", "ff", 1);
    eval_golden("(lam x : Bool . if x then ff else tt) tt", "ff", 2);
    eval_golden("unbox (box[5] tt)", "tt", 1);
    eval_golden("fst (tt, ff)", "tt", 1);
    auto type_golden = [&](const char* src, Mode mode, const char* type, std::uint64_t bound) {
      auto j = Typechecker(nat, mode, d).synthesize(parse(src, nat), budget);
      v.require(format(j.type, nat) == type && j.bound == nat.natural(bound),
                std::string(src) + " : " + format(j.type, nat) + " ; " + nat.format(j.bound));
    };
    const char* twice = "(lam f : Bool -> Bool . (f tt, f tt)) (lam x : Bool . if x then ff else tt)";
    type_golden("if tt then ff else tt", Mode::Paper, "Bool", 1);
    type_golden("lam x : Bool . x", Mode::Paper, "Bool -> Bool", 0);
    type_golden(twice, Mode::Paper, "Bool * Bool", 4);
    type_golden(twice, Mode::Sound, "Bool * Bool", 5);
    try {
      Typechecker(nat, Mode::Paper, d).synthesize(parse("box[0] (if tt then ff else tt)", nat), budget);
      v.require(false, "box[0] (if tt then ff else tt) rejected");
    } catch (const GradeExceeded& e) {
      v.require(e.bound() == nat.natural(1) && e.grade() == nat.natural(0), "GradeExceeded(b=1, s=0)");
    }
    v.note("5 evaluation and 3 typing examples (plus the sound-mode bound and GradeExceeded)");
  });

  all &= criterion(8, "reproducible fuzz reports", 0, [&](Verdict& v) {
    const std::vector<std::string> base = {"fuzz", "--seed", "42", "--json"};
    auto with = [&](std::vector<std::string> extra) {
      auto args = base;
      args.insert(args.end(), extra.begin(), extra.end());
      return cli_output(args);
    };
    auto a = with({"--jobs", "1"});
    auto b = with({"--jobs", "1"});
    auto c = with({"--jobs", std::to_string(std::max(2u, jobs()))});
    v.require(!a.empty() && a == b, "two runs at --jobs 1 are byte-identical");
    v.require(a == c, "--jobs 1 and --jobs " + std::to_string(std::max(2u, jobs())) + " are byte-identical");
    auto p1 = with({"--mode", "paper", "--hunter", "--count", "20000", "--property", "cost_soundness", "--jobs", "1"});
    auto p2 = with({"--mode", "paper", "--hunter", "--count", "20000", "--property", "cost_soundness", "--jobs",
                    std::to_string(std::max(2u, jobs()))});
    v.require(p1 == p2, "paper-mode hunter reports (with minimized witnesses) are byte-identical across jobs");
    v.note("sound report " + std::to_string(a.size()) + " bytes, paper hunter report " + std::to_string(p1.size()) +
           " bytes");
  });

  std::cout << (all ? "all acceptance criteria pass" : "some acceptance criteria FAIL") << "\n";
  return all ? 0 : 1;
}
