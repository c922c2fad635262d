#ifndef COSTLAM_HARNESS_HPP
#define COSTLAM_HARNESS_HPP

// Random well-typed term generation, the metatheory property suites, and a
// greedy minimizer for failing terms.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "costlam/eval.hpp"
#include "costlam/lattice.hpp"
#include "costlam/syntax.hpp"
#include "costlam/typing.hpp"

namespace costlam {

struct GenConfig {
  std::uint64_t seed = 42;
  std::size_t max_depth = 6;
  std::size_t count = 10000;
  Mode mode = Mode::Sound;
  std::map<std::string, double> type_weights = {{"Bool", 4}, {"Nat", 1}, {"Prod", 2}, {"Arrow", 2}, {"Box", 2}};
  bool allow_fn_var_reuse = true;
  // relative weights of the rules tried for a goal: Var, Intro, If, App (a
  // fresh function for a generated argument), AppVar (a function variable from
  // scope), Proj, Unbox
  std::map<std::string, double> rule_weights = {{"Var", 2},    {"Intro", 3},  {"If", 1.5},   {"App", 2},
                                                {"AppVar", 3}, {"Proj", 0.6}, {"Unbox", 0.6}};
  // Redex: every trial term is an application of a lambda over a function
  // parameter to a generated lambda, the shape where reuse matters
  enum class Root { Any, Redex } root = Root::Any;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Engine for one trial; depends only on (seed, trial).
inline std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(trial)));
}

/// Draws lattice elements for grades, latents and budgets.
inline Element sample_element(const Lattice& lat, std::mt19937_64& rng) {
  auto below = [&](std::uint64_t n) { return rng() % n; };
  switch (lat.kind()) {
    case Lattice::Kind::Nat:
    case Lattice::Kind::Gas:
      return lat.natural(below(5));
    case Lattice::Kind::Saturating:
      return lat.natural(below(lat.cap() + 1));
    case Lattice::Kind::Triple:
      return lat.triple_of(below(3), below(3), below(3));
    case Lattice::Kind::Finite: {
      auto all = lat.elements();
      return all[below(all.size())];
    }
    case Lattice::Kind::Product: {
      std::vector<Element> parts;
      for (auto& p : lat.components()) parts.push_back(sample_element(p, rng));
      return lat.tuple(parts);
    }
  }
  return lat.bottom();
}

/// Canonical smallest closed inhabitant of a type.
inline Term minimal_inhabitant(const Type& a) {
  switch (a.kind()) {
    case Type::Kind::Bool:
      return Term::tt();
    case Type::Kind::Nat:
      return Term::natural(0);
    case Type::Kind::Prod:
      return Term::pair(minimal_inhabitant(a.left()), minimal_inhabitant(a.right()));
    case Type::Kind::Box:
      return Term::box(a.grade(), minimal_inhabitant(a.body()));
    case Type::Kind::Arrow:
      return Term::lam("m", a.dom(), minimal_inhabitant(a.cod()));
  }
  return Term::tt();
}

/// Type-directed generator. In paper mode every term it returns synthesizes
/// exactly to its goal; in sound mode up to covariant grades and latents,
/// with argument positions exact.
class TermGenerator {
 public:
  TermGenerator(const Typechecker& tc, const GenConfig& cfg, std::mt19937_64& rng)
      : tc_(tc), lat_(tc.lattice()), cfg_(cfg), rng_(rng) {}

  Type random_type(std::size_t depth) {
    std::vector<std::pair<std::string, double>> opts;
    for (auto& [k, w] : cfg_.type_weights)
      if (w > 0 && (depth > 0 || k == "Bool" || k == "Nat")) opts.emplace_back(k, w);
    if (opts.empty()) return Type::boolean();
    auto pick = choose(opts);
    if (pick == "Nat") return Type::nat();
    if (pick == "Prod") return Type::prod(random_type(depth - 1), random_type(depth - 1));
    if (pick == "Box") return Type::box(sample(), random_type(depth - 1));
    if (pick == "Arrow") {
      auto dom = random_type(depth - 1);
      auto cod = random_type(depth - 1);
      return Type::arrow(dom, cod, cfg_.mode == Mode::Sound ? std::optional<Element>(sample()) : std::nullopt);
    }
    return Type::boolean();
  }

  Element sample() { return sample_element(lat_, rng_); }
  std::uint64_t below(std::uint64_t n) { return rng_() % n; }

  /// `(lam f : A . body) arg` for a random function type A, where the body
  /// has the goal type and arg is a generated lambda.
  Term redex(const Type& goal, std::size_t depth) {
    scope_.clear();
    uses_.clear();
    counter_ = 0;
    Type fn_type;
    do fn_type = random_type(1);
    while (!fn_type.is(Type::Kind::Arrow));
    auto arg = lambda(fn_type, depth > 1 ? depth - 1 : 0);
    auto dom = synth(arg).type;
    auto f = fresh(dom);
    scope_.emplace_back(f, dom);
    auto body = gen(goal, depth > 1 ? depth - 1 : 0);
    scope_.clear();
    return Term::app(Term::lam(f, dom, body), arg);
  }

  /// Term of the goal type over the given free variables.
  Term generate(const std::vector<std::pair<std::string, Type>>& free, const Type& goal, std::size_t depth) {
    scope_ = free;
    uses_.clear();
    counter_ = 0;
    return gen(goal, depth);
  }

 private:
  template <class T>
  T choose(const std::vector<std::pair<T, double>>& opts) {
    double total = 0;
    for (auto& o : opts) total += o.second;
    // integer draw keeps sequences stable across standard libraries
    double x = static_cast<double>(rng_() % 1'000'000) / 1'000'000.0 * total;
    for (auto& o : opts) {
      if (x < o.second) return o.first;
      x -= o.second;
    }
    return opts.back().first;
  }

  Context context() const {
    Context c;
    for (auto& [n, t] : scope_) c = c.extend(n, t);
    return c;
  }

  Judgment synth(const Term& t) const { return tc_.synthesize(context(), t, lat_.large()); }

  // Paper mode: exact, since arrows are invariant there. Sound mode: a
  // subtype with exact domains, so that If branches always join.
  bool fits(const Type& have, const Type& goal) const {
    if (cfg_.mode == Mode::Paper) return have == goal;
    if (have.kind() != goal.kind()) return false;
    switch (have.kind()) {
      case Type::Kind::Bool:
      case Type::Kind::Nat:
        return true;
      case Type::Kind::Prod:
        return fits(have.left(), goal.left()) && fits(have.right(), goal.right());
      case Type::Kind::Box:
        return lat_.leq(have.grade(), goal.grade()) && fits(have.body(), goal.body());
      case Type::Kind::Arrow:
        return have.dom() == goal.dom() && fits(have.cod(), goal.cod()) &&
               lat_.leq(latent_of(have), latent_of(goal));
    }
    return false;
  }

  Element latent_of(const Type& a) const { return a.latent().value_or(lat_.bottom()); }

  std::vector<std::string> fitting_vars(const Type& goal) const {
    std::vector<std::string> out;
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      const auto& [name, ty] = *it;
      bool shadowed = false;
      for (auto jt = scope_.rbegin(); jt != it; ++jt)
        if (jt->first == name) shadowed = true;
      if (shadowed || !fits(ty, goal)) continue;
      if (!cfg_.allow_fn_var_reuse && ty.contains_arrow()) {
        auto u = uses_.find(name);
        if (u != uses_.end() && u->second > 0) continue;
      }
      out.push_back(name);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Function variables whose codomain fits the goal, with their domains.
  std::vector<std::pair<std::string, Type>> applicable_vars(const Type& goal) const {
    std::vector<std::pair<std::string, Type>> out;
    std::set<std::string> seen;
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      const auto& [name, ty] = *it;
      if (!seen.insert(name).second) continue;
      if (!ty.is(Type::Kind::Arrow) || !fits(ty.cod(), goal)) continue;
      if (!cfg_.allow_fn_var_reuse) {
        auto u = uses_.find(name);
        if (u != uses_.end() && u->second > 0) continue;
      }
      out.emplace_back(name, ty.dom());
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.first < b.first; });
    return out;
  }

  // An argument for a fixed domain must be a subtype of it.
  Term argument(const Type& dom, std::size_t depth) {
    auto saved = uses_;
    auto arg = gen(dom, depth);
    if (tc_.is_subtype(synth(arg).type, dom)) return arg;
    uses_ = std::move(saved);
    return leaf_value(dom);
  }

  // Closed leaf with bound bottom and the exact type.
  Term leaf_value(const Type& goal) {
    switch (goal.kind()) {
      case Type::Kind::Bool:
        return below(2) ? Term::tt() : Term::ff();
      case Type::Kind::Nat:
        return Term::natural(below(4));
      case Type::Kind::Prod: {
        auto l = leaf_value(goal.left());
        return Term::pair(l, leaf_value(goal.right()));
      }
      case Type::Kind::Box:
        return Term::box(goal.grade(), leaf_value(goal.body()));
      case Type::Kind::Arrow: {
        auto x = fresh(goal.dom());
        return Term::lam(x, goal.dom(), leaf_value(goal.cod()));
      }
    }
    return Term::tt();
  }

  Term use_var(const std::string& name) {
    ++uses_[name];
    return Term::var(name);
  }

  std::string fresh(const Type& t) {
    const char* stem = t.is(Type::Kind::Arrow) ? "f" : t.is(Type::Kind::Box) ? "b" : t.is(Type::Kind::Prod) ? "p" : "x";
    return stem + std::to_string(counter_++);
  }

  Term leaf(const Type& goal) {
    auto vars = fitting_vars(goal);
    if (!vars.empty() && below(2) == 0) return use_var(vars[below(vars.size())]);
    switch (goal.kind()) {
      case Type::Kind::Bool:
        return below(2) ? Term::tt() : Term::ff();
      case Type::Kind::Nat:
        return Term::natural(below(4));
      case Type::Kind::Prod: {
        auto l = leaf(goal.left());
        return Term::pair(l, leaf(goal.right()));
      }
      case Type::Kind::Box:
        return Term::box(goal.grade(), leaf(goal.body()));
      case Type::Kind::Arrow:
        return lambda(goal, 0);
    }
    return Term::tt();
  }

  Term lambda(const Type& goal, std::size_t depth) {
    auto x = fresh(goal.dom());
    scope_.emplace_back(x, goal.dom());
    auto saved = uses_;
    auto body = depth == 0 ? leaf(goal.cod()) : gen(goal.cod(), depth);
    // in sound mode the body bound becomes the latent, which must fit
    if (cfg_.mode == Mode::Sound && !lat_.leq(synth(body).bound, latent_of(goal))) {
      uses_ = std::move(saved);
      body = leaf(goal.cod());
    }
    scope_.pop_back();
    return Term::lam(x, goal.dom(), body);
  }

  Term intro(const Type& goal, std::size_t depth) {
    switch (goal.kind()) {
      case Type::Kind::Bool:
      case Type::Kind::Nat:
        return leaf(goal);
      case Type::Kind::Prod: {
        auto l = gen(goal.left(), depth - 1);
        return Term::pair(l, gen(goal.right(), depth - 1));
      }
      case Type::Kind::Arrow:
        return lambda(goal, depth - 1);
      case Type::Kind::Box: {
        // the (Box) side condition is validated against the synthesized bound
        for (int attempt = 0; attempt < 3; ++attempt) {
          auto saved = uses_;
          auto body = gen(goal.body(), depth - 1);
          if (lat_.leq(synth(body).bound, goal.grade())) return Term::box(goal.grade(), body);
          uses_ = std::move(saved);
        }
        return Term::box(goal.grade(), leaf(goal.body()));
      }
    }
    return leaf(goal);
  }

  Term gen(const Type& goal, std::size_t depth) {
    if (depth == 0 || below(5) == 0) return leaf(goal);
    enum Rule { Var, Intro, If, App, AppVar, Proj, Unbox };
    auto weight = [&](const char* r) {
      auto it = cfg_.rule_weights.find(r);
      return it == cfg_.rule_weights.end() ? 0.0 : it->second;
    };
    std::vector<std::pair<Rule, double>> rules;
    auto offer = [&](Rule r, const char* name) {
      if (weight(name) > 0) rules.emplace_back(r, weight(name));
    };
    offer(Intro, "Intro");
    offer(If, "If");
    offer(App, "App");
    offer(Proj, "Proj");
    offer(Unbox, "Unbox");
    auto vars = fitting_vars(goal);
    if (!vars.empty()) offer(Var, "Var");
    auto fns = applicable_vars(goal);
    if (!fns.empty()) offer(AppVar, "AppVar");
    if (rules.empty()) return leaf(goal);
    switch (choose(rules)) {
      case Var:
        return use_var(vars[below(vars.size())]);
      case AppVar: {
        const auto& [name, dom] = fns[below(fns.size())];
        auto fn = use_var(name);
        return Term::app(fn, argument(dom, depth - 1));
      }
      case Intro:
        return intro(goal, depth);
      case If: {
        auto c = gen(Type::boolean(), depth - 1);
        auto t = gen(goal, depth - 1);
        return Term::ite(c, t, gen(goal, depth - 1));
      }
      case App: {
        auto arg = gen(random_type(1), depth - 1);
        auto dom = synth(arg).type;
        auto fn = gen(Type::arrow(dom, goal, cfg_.mode == Mode::Sound ? std::optional(lat_.large()) : std::nullopt),
                      depth - 1);
        return Term::app(fn, arg);
      }
      case Proj: {
        auto other = random_type(1);
        bool first = below(2) == 0;
        auto p = gen(first ? Type::prod(goal, other) : Type::prod(other, goal), depth - 1);
        return first ? Term::fst(p) : Term::snd(p);
      }
      case Unbox:
        return Term::unbox(gen(Type::box(sample(), goal), depth - 1));
    }
    return leaf(goal);
  }

  const Typechecker& tc_;
  Lattice lat_;
  const GenConfig& cfg_;
  std::mt19937_64& rng_;
  std::vector<std::pair<std::string, Type>> scope_;
  std::map<std::string, int> uses_;
  std::size_t counter_ = 0;
};

/// Generates one term for `goal` under `ctx`, drawing from the given engine.
inline Term gen_typed_term(const GenConfig& cfg, const Typechecker& tc, const Context& ctx, const Type& goal,
                           std::mt19937_64& rng, std::optional<std::size_t> depth = std::nullopt) {
  TermGenerator g(tc, cfg, rng);
  return g.generate(ctx.bindings(), goal, depth.value_or(cfg.max_depth));
}

/// Closed term of trial `i`: a random goal type and a depth in 1..max_depth.
inline Term trial_term(const GenConfig& cfg, const Typechecker& tc, std::mt19937_64& rng) {
  TermGenerator g(tc, cfg, rng);
  const bool redex = cfg.root == GenConfig::Root::Redex;
  auto goal = g.random_type(redex ? 1 : 2);
  auto depth = 1 + static_cast<std::size_t>(g.below(std::max<std::size_t>(cfg.max_depth, 1)));
  if (redex) return g.redex(goal, depth);
  return g.generate({}, goal, depth);
}

/// Generator settings for hunting paper-mode violations: boolean and
/// higher-order types, redex-rooted terms, no projections or boxes.
inline GenConfig paper_hunter_config(std::uint64_t seed = 42, bool allow_fn_var_reuse = true) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.mode = Mode::Paper;
  cfg.allow_fn_var_reuse = allow_fn_var_reuse;
  cfg.root = GenConfig::Root::Redex;
  cfg.max_depth = 4;
  cfg.type_weights = {{"Bool", 4}, {"Nat", 0}, {"Prod", 3}, {"Arrow", 2}, {"Box", 0}};
  cfg.rule_weights = {{"Var", 2}, {"Intro", 3}, {"If", 3}, {"App", 0.5}, {"AppVar", 3}, {"Proj", 0}, {"Unbox", 0}};
  return cfg;
}

inline std::vector<Term> generate_corpus(const GenConfig& cfg, const Lattice& lat, const DeltaProfile& deltas) {
  Typechecker tc(lat, cfg.mode, deltas, false);
  std::vector<Term> out;
  for (std::size_t i = 0; i < cfg.count; ++i) {
    auto rng = trial_engine(cfg.seed, i);
    out.push_back(trial_term(cfg, tc, rng));
  }
  return out;
}

// ---- minimizer -------------------------------------------------------------

namespace detail {

inline void preorder(const Term& t, std::vector<Term>& out) {
  out.push_back(t);
  for (auto& c : t.children()) preorder(c, out);
}

// Rebuilds `t` with the node at pre-order position `target` replaced.
inline Term replace_at(const Term& t, std::size_t& pos, std::size_t target, const Term& with) {
  if (pos++ == target) return with;
  auto kids = t.children();
  if (kids.empty()) return t;
  for (auto& k : kids) k = replace_at(k, pos, target, with);
  return t.with_children(std::move(kids));
}

inline void types_preorder(const Derivation& d, std::vector<Type>& out) {
  out.push_back(d.type);
  for (auto& p : d.premises) types_preorder(p, out);
}

}  // namespace detail

/// Greedy shrinking: repeatedly take the first strictly smaller candidate that
/// still fails. Candidates are closed subterms, a node replaced by one of its
/// children, and a node replaced by the minimal inhabitant of its type.
inline Term minimize(const Term& term, const std::function<bool(const Term&)>& fails, const Typechecker& tc) {
  Term cur = term;
  for (;;) {
    bool improved = false;
    std::vector<Term> nodes;
    detail::preorder(cur, nodes);
    std::vector<Type> types;
    try {
      detail::types_preorder(tc.synthesize(cur, tc.lattice().large()).trace, types);
    } catch (const std::exception&) {
    }
    auto accept = [&](const Term& cand) {
      if (cand.size() >= cur.size() || !fails(cand)) return false;
      cur = cand;
      return true;
    };
    for (std::size_t i = 1; i < nodes.size() && !improved; ++i)
      if (is_closed(nodes[i])) improved = accept(nodes[i]);
    for (std::size_t i = 0; i < nodes.size() && !improved; ++i) {
      for (auto& child : nodes[i].children()) {
        std::size_t pos = 0;
        if ((improved = accept(detail::replace_at(cur, pos, i, child)))) break;
      }
      // (lam y : A . u) v with y unused in u
      const auto& n = nodes[i];
      if (!improved && n.is(Term::Kind::App) && n.children()[0].is(Term::Kind::Lam)) {
        const auto& lam = n.children()[0];
        if (!free_vars(lam.children()[0]).count(lam.name())) {
          std::size_t pos = 0;
          improved = accept(detail::replace_at(cur, pos, i, lam.children()[0]));
        }
      }
      if (!improved && types.size() == nodes.size()) {
        std::size_t pos = 0;
        improved = accept(detail::replace_at(cur, pos, i, minimal_inhabitant(types[i])));
      }
    }
    if (!improved) return cur;
  }
}

// ---- property suites -------------------------------------------------------

using Observed = std::vector<std::pair<std::string, std::string>>;

struct PropertyFailure {
  std::size_t trial = 0;
  std::string term;
  std::string relation;
  Observed observed;
  std::string minimized;
  Observed minimized_observed;
};

struct PropertyReport {
  std::string property;
  std::string lattice;
  Mode mode = Mode::Sound;
  std::uint64_t seed = 0;
  std::size_t max_depth = 0;
  bool allow_fn_var_reuse = true;
  std::size_t trials = 0;
  std::size_t failure_count = 0;
  bool expected_clean = true;
  std::vector<PropertyFailure> failures;
  std::map<std::string, std::size_t> stats;

  bool passed() const { return failure_count == 0; }
  bool ok() const { return !expected_clean || passed(); }
};

struct SuiteConfig {
  GenConfig gen;
  Lattice lattice = Lattice::nat();
  DeltaProfile deltas = DeltaProfile::defaults(Lattice::nat());
  unsigned jobs = 1;
  std::size_t max_kept = 25;  // failures recorded (and minimized) in full
  bool minimize = true;
};

/// A trial's verdict. `recheck`, when set, re-runs the property on a
/// replacement term and reports what it observed if it still fails.
struct TrialOutcome {
  std::optional<PropertyFailure> failure;
  std::function<std::optional<Observed>(const Term&)> recheck;
  Term subject;
  std::map<std::string, std::size_t> stats;
};

struct TrialEnv {
  const SuiteConfig& cfg;
  const Typechecker& tc;
  const Evaluator& ev;
  std::mt19937_64 rng;
  std::size_t index;
  std::optional<Term> subject;  // latest generated term, reported on exceptions

  std::string show(const Term& t) const { return format(t, cfg.lattice); }
  std::string show(const Type& t) const { return format(t, cfg.lattice); }
  std::string show(const Element& e) const { return cfg.lattice.format(e); }
};

using TrialFn = std::function<TrialOutcome(TrialEnv&)>;

/// Runs `count` independent trials on `jobs` threads. Results are assembled
/// by trial index, so the report does not depend on scheduling.
inline PropertyReport run_property(const std::string& name, const SuiteConfig& cfg, const TrialFn& trial,
                                   bool expected_clean = true) {
  const auto& lat = cfg.lattice;
  Typechecker tc(lat, cfg.gen.mode, cfg.deltas, false);
  Typechecker traced(lat, cfg.gen.mode, cfg.deltas, true);
  Evaluator ev(lat, cfg.deltas);
  const std::size_t n = cfg.gen.count;
  std::vector<TrialOutcome> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      TrialEnv env{cfg, tc, ev, trial_engine(cfg.gen.seed, i), i};
      try {
        results[i] = trial(env);
      } catch (const std::exception& e) {
        PropertyFailure f;
        f.trial = i;
        if (env.subject) f.term = env.show(*env.subject);
        f.relation = "trial completes";
        f.observed = {{"exception", e.what()}};
        results[i].failure = std::move(f);
      }
      if (results[i].failure) results[i].failure->trial = i;
    }
  };
  unsigned jobs = std::max(1u, cfg.jobs);
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  PropertyReport rep;
  rep.property = name;
  rep.lattice = lat.name();
  rep.mode = cfg.gen.mode;
  rep.seed = cfg.gen.seed;
  rep.max_depth = cfg.gen.max_depth;
  rep.allow_fn_var_reuse = cfg.gen.allow_fn_var_reuse;
  rep.trials = n;
  rep.expected_clean = expected_clean;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& [k, v] : results[i].stats) rep.stats[k] += v;
    if (!results[i].failure) continue;
    ++rep.failure_count;
    if (kept.size() < cfg.max_kept) kept.push_back(i);
  }

  // minimization is per failure and pure, so it parallelizes the same way
  std::vector<PropertyFailure> out(kept.size());
  std::atomic<std::size_t> next_kept{0};
  auto shrink = [&] {
    for (std::size_t k; (k = next_kept.fetch_add(1)) < kept.size();) {
      auto& res = results[kept[k]];
      auto f = *res.failure;
      if (cfg.minimize && res.recheck) {
        auto fails = [&](const Term& t) { return res.recheck(t).has_value(); };
        auto m = minimize(res.subject, fails, traced);
        f.minimized = format(m, lat);
        if (auto obs = res.recheck(m)) f.minimized_observed = *obs;
      }
      out[k] = std::move(f);
    }
  };
  pool.clear();
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(shrink);
  shrink();
  for (auto& t : pool) t.join();
  rep.failures = std::move(out);
  return rep;
}

namespace detail {

inline PropertyFailure failure(const TrialEnv& env, const Term& t, std::string relation, Observed obs) {
  return {env.index, env.show(t), std::move(relation), std::move(obs), {}, {}};
}

}  // namespace detail

/// k <= b <= r for closed generated terms; typing and evaluation must also
/// succeed (generator soundness and progress).
inline PropertyReport prop_cost_soundness(const SuiteConfig& cfg) {
  const bool clean = cfg.gen.mode == Mode::Sound || !cfg.gen.allow_fn_var_reuse;
  return run_property("cost_soundness", cfg, [](TrialEnv& env) {
    TrialOutcome out;
    const auto& lat = env.cfg.lattice;
    const auto r = lat.large();
    auto t = trial_term(env.cfg.gen, env.tc, env.rng);
    env.subject = out.subject = t;
    Judgment j;
    try {
      j = env.tc.synthesize(t, r);
    } catch (const TypeError& e) {
      out.failure = detail::failure(env, t, "generated term typechecks", {{"error", e.what()}});
      return out;
    }
    CostedResult res;
    try {
      res = env.ev.eval(t);
    } catch (const EvalError& e) {
      out.failure = detail::failure(env, t, "typed term evaluates", {{"error", e.what()}});
      return out;
    }
    Observed obs = {{"type", env.show(j.type)}, {"k", env.show(res.cost)}, {"b", env.show(j.bound)}, {"r", env.show(r)}};
    if (!lat.leq(res.cost, j.bound)) {
      out.failure = detail::failure(env, t, "k <= b", obs);
      const Typechecker& tc = env.tc;
      const Evaluator& ev = env.ev;
      out.recheck = [&tc, &ev, lat](const Term& c) -> std::optional<Observed> {
        try {
          auto jc = tc.synthesize(c, lat.large());
          auto rc = ev.eval(c);
          if (lat.leq(rc.cost, jc.bound)) return std::nullopt;
          return Observed{{"type", format(jc.type, lat)}, {"k", lat.format(rc.cost)}, {"b", lat.format(jc.bound)}};
        } catch (const std::exception&) {
          return std::nullopt;
        }
      };
    } else if (!lat.leq(j.bound, r)) {
      out.failure = detail::failure(env, t, "b <= r", obs);
    }
    return out;
  }, clean);
}

/// Evaluation is deterministic and invariant under renaming of binders.
inline PropertyReport prop_determinism(const SuiteConfig& cfg) {
  return run_property("determinism", cfg, [](TrialEnv& env) {
    TrialOutcome out;
    auto t = trial_term(env.cfg.gen, env.tc, env.rng);
    env.subject = t;
    std::size_t counter = 0;
    auto renamed = rename_binders(t, counter, "q");
    auto a = env.ev.eval(t);
    auto b = env.ev.eval(t);
    auto c = env.ev.eval(renamed);
    if (!alpha_eq(a.value.term(), b.value.term()) || a.cost != b.cost || !alpha_eq(a.value.term(), c.value.term()) ||
        a.cost != c.cost)
      out.failure = detail::failure(env, t, "v1 = v2 and k1 = k2",
                                    {{"v1", env.show(a.value.term())}, {"k1", env.show(a.cost)},
                                     {"v2", env.show(c.value.term())}, {"k2", env.show(c.cost)}});
    return out;
  });
}

/// The value of a typed term retypes at a subtype with a bound below b.
inline PropertyReport prop_preservation(const SuiteConfig& cfg) {
  return run_property("preservation", cfg, [](TrialEnv& env) {
    TrialOutcome out;
    const auto& lat = env.cfg.lattice;
    auto t = trial_term(env.cfg.gen, env.tc, env.rng);
    env.subject = t;
    auto j = env.tc.synthesize(t, lat.large());
    auto res = env.ev.eval(t);
    auto jv = env.tc.retype_value(res.value, lat.large());
    if (!env.tc.is_subtype(jv.type, j.type) || !lat.leq(jv.bound, j.bound))
      out.failure = detail::failure(env, t, "v : A' <: A with b' <= b",
                                    {{"A", env.show(j.type)}, {"b", env.show(j.bound)},
                                     {"v", env.show(res.value.term())}, {"A'", env.show(jv.type)},
                                     {"b'", env.show(jv.bound)}});
    if (is_value(t)) out.stats["value_subjects"] = 1;
    return out;
  }, cfg.gen.mode == Mode::Sound);
}

/// Bounds do not depend on the budget; acceptance is monotone in it.
inline PropertyReport prop_budget_weakening(const SuiteConfig& cfg) {
  return run_property("budget_weakening", cfg, [](TrialEnv& env) {
    TrialOutcome out;
    const auto& lat = env.cfg.lattice;
    auto t = trial_term(env.cfg.gen, env.tc, env.rng);
    env.subject = t;
    auto r1 = sample_element(lat, env.rng);
    auto r2 = lat.join(r1, sample_element(lat, env.rng));
    auto j1 = env.tc.synthesize(t, r1);
    auto j2 = env.tc.synthesize(t, r2);
    if (j1.bound != j2.bound || !(j1.type == j2.type) || (j1.within_budget && !j2.within_budget))
      out.failure = detail::failure(env, t, "same bound; within r1 implies within r2",
                                    {{"r1", env.show(r1)}, {"r2", env.show(r2)}, {"b1", env.show(j1.bound)},
                                     {"b2", env.show(j2.bound)}});
    if (r1 == r2) out.stats["equal_budgets"] = 1;
    if (j1.within_budget) out.stats["within_r1"] = 1;
    return out;
  });
}

/// Counit arithmetic, monotone acceptance of grades, the grade bound on the
/// boxed computation, and rejection of promotion above the grade.
inline PropertyReport prop_box_laws(const SuiteConfig& cfg) {
  return run_property("box_laws", cfg, [](TrialEnv& env) {
    TrialOutcome out;
    const auto& lat = env.cfg.lattice;
    const auto& tc = env.tc;
    const auto r = lat.large();
    TermGenerator g(tc, env.cfg.gen, env.rng);
    auto depth = 1 + static_cast<std::size_t>(g.below(std::max<std::size_t>(env.cfg.gen.max_depth, 1)));
    auto body_type = g.random_type(1);

    // (a) counit
    auto t = g.generate({}, Type::box(g.sample(), body_type), depth);
    env.subject = t;
    auto jt = tc.synthesize(t, r);
    auto ju = tc.synthesize(Term::unbox(t), r);
    if (!(ju.type == jt.type.body()) || ju.bound != lat.combine(jt.bound, env.cfg.deltas.unbox)) {
      out.failure = detail::failure(env, t, "unbox t : A with bound b (+) d_unbox",
                                    {{"type", env.show(ju.type)}, {"b", env.show(jt.bound)}, {"bound", env.show(ju.bound)}});
      return out;
    }

    // (b) grade monotonicity on the boxed value
    auto v = env.ev.eval(t).value;
    auto jv = tc.retype_value(v, r);
    auto s2 = lat.join(jv.type.grade(), g.sample());
    auto wider = Type::box(s2, jv.type.body());
    auto coerce = Term::app(Term::lam("y", wider, Term::var("y")), v.term());
    try {
      auto jc = tc.synthesize(coerce, r);
      if (!(jc.type == wider)) throw TypeError(TypeErrorKind::ArgumentMismatch, "type " + env.show(jc.type));
    } catch (const TypeError& e) {
      out.failure = detail::failure(env, coerce, "Box[s1] A accepted at Box[s2] A for s1 <= s2", {{"error", e.what()}});
      return out;
    }
    if (jv.type.grade() == s2) out.stats["equal_grades"] = 1;

    // (c) the boxed computation runs within its grade
    auto u = g.generate({}, body_type, depth);
    env.subject = u;
    auto bu = tc.synthesize(u, r).bound;
    auto s = lat.join(bu, g.sample());
    auto boxed = Term::box(s, u);
    auto jb = tc.synthesize(boxed, r);
    auto ku = env.ev.eval(u).cost;
    if (!(jb.type == Type::box(s, tc.synthesize(u, r).type)) || !lat.leq(ku, s)) {
      out.failure = detail::failure(env, boxed, "box[s] u typechecks and eval(u) has k <= s",
                                    {{"k", env.show(ku)}, {"s", env.show(s)}});
      return out;
    }

    // (d) no promotion above the grade
    if (bu != lat.bottom()) {
      auto low = g.sample();
      if (lat.leq(bu, low)) low = lat.bottom();
      out.stats["promotion_checks"] = 1;
      try {
        tc.synthesize(Term::box(low, u), r);
        out.failure = detail::failure(env, Term::box(low, u), "box[s] rejected when b is not <= s",
                                      {{"b", env.show(bu)}, {"s", env.show(low)}});
      } catch (const GradeExceeded& e) {
        if (e.bound() != bu || e.grade() != low)
          out.failure = detail::failure(env, Term::box(low, u), "GradeExceeded carries (b, s)",
                                        {{"b", env.show(e.bound())}, {"s", env.show(e.grade())}});
      }
    }
    return out;
  }, cfg.gen.mode == Mode::Sound);
}

namespace detail {

// A supertype: covariant grades and latents raised by random amounts.
inline Type widen(const Type& a, TermGenerator& g, const Lattice& lat) {
  switch (a.kind()) {
    case Type::Kind::Prod:
      return Type::prod(widen(a.left(), g, lat), widen(a.right(), g, lat));
    case Type::Kind::Box:
      return Type::box(lat.join(a.grade(), g.sample()), widen(a.body(), g, lat));
    case Type::Kind::Arrow: {
      auto latent = a.latent() ? std::optional(lat.join(*a.latent(), g.sample())) : std::nullopt;
      return Type::arrow(a.dom(), widen(a.cod(), g, lat), latent);
    }
    default:
      return a;
  }
}

}  // namespace detail

/// Substituting a closed value for a variable keeps the type and does not
/// raise the bound (exactly the same when the value has the variable's type),
/// and the result still evaluates within the bound.
inline PropertyReport prop_substitution(const SuiteConfig& cfg) {
  return run_property("substitution", cfg, [](TrialEnv& env) {
    TrialOutcome out;
    const auto& lat = env.cfg.lattice;
    const auto& tc = env.tc;
    const auto r = lat.large();
    TermGenerator g(tc, env.cfg.gen, env.rng);
    auto depth = 1 + static_cast<std::size_t>(g.below(std::max<std::size_t>(env.cfg.gen.max_depth, 1)));
    auto tv = g.generate({}, g.random_type(1), std::min<std::size_t>(depth, 3));
    env.subject = tv;
    auto v = env.ev.eval(tv).value;
    auto jvx = tc.retype_value(v, r);
    // the variable's type is the value's own type or a supertype of it
    auto a = g.below(2) ? jvx.type : detail::widen(jvx.type, g, lat);
    auto goal = g.random_type(2);
    const std::string x = "v";
    auto t = g.generate({{x, a}}, goal, depth);
    env.subject = t;
    auto j1 = tc.synthesize(Context{}.extend(x, a), t, r);
    auto sub = substitute(t, x, v);
    auto j2 = tc.synthesize(sub, r);
    const bool exact = tc.equivalent(jvx.type, a);
    bool ok = tc.is_subtype(j2.type, j1.type) && lat.leq(j2.bound, j1.bound);
    if (exact) ok = ok && tc.equivalent(j2.type, j1.type) && j2.bound == j1.bound;
    auto k = env.ev.eval(sub).cost;
    if (env.cfg.gen.mode == Mode::Sound) ok = ok && lat.leq(k, j2.bound);
    if (!ok)
      out.failure = detail::failure(env, t, exact ? "t[x:=v] keeps type and bound" : "t[x:=v] keeps type, bound <= b",
                                    {{"x", x + " : " + env.show(a)}, {"v", env.show(v.term())},
                                     {"type", env.show(j1.type)}, {"b", env.show(j1.bound)},
                                     {"type'", env.show(j2.type)}, {"b'", env.show(j2.bound)}, {"k", env.show(k)}});
    if (exact) out.stats["exact_value_type"] = 1;
    if (free_vars(t).count(x)) out.stats["variable_used"] = 1;
    return out;
  }, cfg.gen.mode == Mode::Sound);
}

inline const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names = {"cost_soundness", "determinism",  "preservation",
                                                 "budget_weakening", "box_laws", "substitution"};
  return names;
}

inline PropertyReport run_named_property(const std::string& name, const SuiteConfig& cfg) {
  if (name == "cost_soundness") return prop_cost_soundness(cfg);
  if (name == "determinism") return prop_determinism(cfg);
  if (name == "preservation") return prop_preservation(cfg);
  if (name == "budget_weakening") return prop_budget_weakening(cfg);
  if (name == "box_laws") return prop_box_laws(cfg);
  if (name == "substitution") return prop_substitution(cfg);
  throw std::invalid_argument("unknown property '" + name + "'");
}

}  // namespace costlam

#endif  // COSTLAM_HARNESS_HPP
