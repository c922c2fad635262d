#ifndef COSTLAM_MODEL_HPP
#define COSTLAM_MODEL_HPP

// Finite checks of the presheaf semantics: the downset presheaf, the internal
// lattice operations, type interpretations as presheaves of (value, bound)
// sections, cost naturality, reification, and a closure-based denotational
// model used to test cost preservation.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "costlam/eval.hpp"
#include "costlam/lattice.hpp"
#include "costlam/syntax.hpp"
#include "costlam/typing.hpp"

namespace costlam {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome of one exhaustive check.
struct CheckReport {
  std::string check;
  std::string lattice;
  std::string subject;
  bool passed = true;
  bool exhaustive = true;
  std::size_t checked = 0;
  std::string counterexample;
  std::map<std::string, std::size_t> universe;

  void fail(std::string witness) {
    if (passed) counterexample = std::move(witness);
    passed = false;
  }
};

// ---- downset presheaf ------------------------------------------------------

struct DownsetRep {
  Lattice lattice;
  std::vector<Element> elements;
  std::vector<std::vector<std::size_t>> down;  // indices into elements

  std::size_t index_of(const Element& e) const {
    auto it = std::find(elements.begin(), elements.end(), e);
    if (it == elements.end()) throw ModelError("element not in downset rep");
    return static_cast<std::size_t>(it - elements.begin());
  }
  std::vector<Element> at(const Element& r) const {
    std::vector<Element> out;
    for (auto i : down[index_of(r)]) out.push_back(elements[i]);
    return out;
  }
};

inline DownsetRep build_downset(const Lattice& lat) {
  DownsetRep rep{lat, lat.elements(), {}};
  const auto n = rep.elements.size();
  rep.down.resize(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < n; ++a)
      if (lat.leq(rep.elements[a], rep.elements[r])) rep.down[r].push_back(a);
  return rep;
}

inline CheckReport check_downset(const DownsetRep& rep) {
  const auto& lat = rep.lattice;
  CheckReport out{"downset", lat.name(), "L"};
  out.universe["elements"] = rep.elements.size();
  const auto n = rep.elements.size();
  auto has = [&](std::size_t r, std::size_t a) {
    return std::find(rep.down[r].begin(), rep.down[r].end(), a) != rep.down[r].end();
  };
  const auto bot = rep.index_of(lat.bottom());
  if (rep.down[bot] != std::vector<std::size_t>{bot}) out.fail("downset(bottom) is not {bottom}");
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rs = lat.format(rep.elements[r]);
    if (!has(r, bot)) out.fail("downset(" + rs + ") misses bottom");
    if (!has(r, r)) out.fail("downset(" + rs + ") misses " + rs);
    for (std::size_t a = 0; a < n; ++a) {
      ++out.checked;
      if (has(r, a) != lat.leq(rep.elements[a], rep.elements[r]))
        out.fail("membership of " + lat.format(rep.elements[a]) + " in downset(" + rs + ") disagrees with leq");
    }
    for (std::size_t r2 = 0; r2 < n; ++r2) {
      if (!lat.leq(rep.elements[r], rep.elements[r2])) continue;
      for (auto a : rep.down[r])
        if (!has(r2, a))
          out.fail("inclusion downset(" + rs + ") -> downset(" + lat.format(rep.elements[r2]) + ") drops " +
                   lat.format(rep.elements[a]));
    }
  }
  return out;
}

/// Internal lattice operations as natural transformations on the downset
/// presheaf. Join and bottom must preserve every downset. Combine is checked
/// on the pairs with a (+) b <= r, the sub-presheaf of L x L that the product
/// interpretation actually uses; the unrestricted closure is reported in
/// `literal_combine` and is expected to fail on additive lattices.
struct NaturalityReport {
  CheckReport main;
  CheckReport literal_combine;
};

inline NaturalityReport check_internal_naturality_detailed(const Lattice& lat) {
  auto rep = build_downset(lat);
  const auto& el = rep.elements;
  const auto n = el.size();
  NaturalityReport out{{"internal-naturality", lat.name(), "L"}, {"combine-closure-unrestricted", lat.name(), "L"}};
  out.main.universe["elements"] = n;
  auto in_down = [&](const Element& a, const Element& r) { return lat.leq(a, r); };
  auto witness = [&](const char* op, std::size_t r1, std::size_t r2, std::size_t a, std::size_t b) {
    return std::string(op) + ": r1=" + lat.format(el[r1]) + " r2=" + lat.format(el[r2]) + " a=" + lat.format(el[a]) +
           " b=" + lat.format(el[b]);
  };

  // combine must be monotone for the restricted domain to be a sub-presheaf
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t a2 = 0; a2 < n; ++a2) {
      if (!lat.leq(el[a], el[a2])) continue;
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t b2 = 0; b2 < n; ++b2) {
          if (!lat.leq(el[b], el[b2])) continue;
          ++out.main.checked;
          if (!lat.leq(lat.combine(el[a], el[b]), lat.combine(el[a2], el[b2])))
            out.main.fail("combine not monotone: " + lat.format(el[a]) + "<=" + lat.format(el[a2]) + ", " +
                          lat.format(el[b]) + "<=" + lat.format(el[b2]));
        }
    }

  for (std::size_t r1 = 0; r1 < n; ++r1) {
    if (!in_down(lat.bottom(), el[r1])) out.main.fail("bottom: bottom not below " + lat.format(el[r1]));
    for (std::size_t r2 = 0; r2 < n; ++r2) {
      if (!lat.leq(el[r1], el[r2])) continue;
      for (auto a : rep.down[r1])
        for (auto b : rep.down[r1]) {
          ++out.main.checked;
          // the component at r1 followed by inclusion, against inclusion
          // followed by the component at r2
          auto j = lat.join(el[a], el[b]);
          if (!in_down(j, el[r1]) || !in_down(j, el[r2])) out.main.fail(witness("join", r1, r2, a, b));
          auto c = lat.combine(el[a], el[b]);
          if (in_down(c, el[r1]) && !in_down(c, el[r2])) out.main.fail(witness("combine", r1, r2, a, b));
          if (r1 == r2) {
            ++out.literal_combine.checked;
            if (!in_down(c, el[r1])) out.literal_combine.fail(witness("combine", r1, r2, a, b));
          }
        }
    }
  }
  return out;
}

inline CheckReport check_internal_naturality(const Lattice& lat) { return check_internal_naturality_detailed(lat).main; }

// ---- type interpretations ---------------------------------------------------

struct EnumBudget {
  std::uint64_t max_nat = 3;
  std::size_t corpus_size = 7;  // lambda corpus: terms of at most this many nodes
  std::size_t max_values = 20000;
  Mode mode = Mode::Sound;
  std::optional<DeltaProfile> deltas;
};

struct Section {
  Value value;
  Element bound;
};

struct PresheafRep {
  Lattice lattice;
  Type type;
  Mode mode = Mode::Sound;
  std::vector<Element> index;
  std::vector<std::vector<Section>> sections;
  // transitions[{i, j}] for index[i] <= index[j]: image of each section of
  // sections[i], in order
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Section>> transitions;
  bool exhaustive = true;
  std::size_t candidates = 0;
  std::size_t corpus = 0;

  std::size_t index_of(const Element& r) const {
    auto it = std::find(index.begin(), index.end(), r);
    if (it == index.end()) throw ModelError("element not indexed");
    return static_cast<std::size_t>(it - index.begin());
  }
  const std::vector<Section>& at(const Element& r) const { return sections[index_of(r)]; }
};

namespace detail {

inline std::string section_key(const Lattice& lat, const Section& s) {
  return format(s.value, lat) + " @ " + lat.format(s.bound);
}

inline std::string describe(const Lattice& lat, const Section& s) {
  return "(" + format(s.value, lat) + ", " + lat.format(s.bound) + ")";
}

inline void collect_elim_types(const Type& t, std::vector<Type>& out) {
  if (std::find(out.begin(), out.end(), t) != out.end()) return;
  out.push_back(t);
  if (t.is(Type::Kind::Prod)) {
    collect_elim_types(t.left(), out);
    collect_elim_types(t.right(), out);
  } else if (t.is(Type::Kind::Box)) {
    collect_elim_types(t.body(), out);
  }
}

// Enumerates well-typed lambda bodies over one parameter, by exact size.
class BodyEnumerator {
 public:
  BodyEnumerator(const Typechecker& tc, std::string param, Type param_type, std::uint64_t max_nat)
      : tc_(tc), param_(std::move(param)), param_type_(std::move(param_type)), max_nat_(max_nat) {
    ctx_ = Context{}.extend(param_, param_type_);
    collect_elim_types(param_type_, elim_);
  }

  const std::vector<Term>& of(const Type& goal, std::size_t n) {
    auto key = std::pair{format(goal, tc_.lattice()), n};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Term> raw;
    build(goal, n, raw);
    std::vector<Term> typed;
    for (auto& t : raw) {
      try {
        auto j = tc_.synthesize(ctx_, t, tc_.lattice().bottom());
        if (j.type == goal || (tc_.mode() == Mode::Sound && tc_.is_subtype(j.type, goal) && tc_.is_subtype(goal, j.type)))
          typed.push_back(t);
      } catch (const TypeError&) {
      }
    }
    return memo_.emplace(key, std::move(typed)).first->second;
  }

 private:
  void build(const Type& goal, std::size_t n, std::vector<Term>& out) {
    if (n == 0) return;
    if (n == 1) {
      if (goal.is(Type::Kind::Bool)) {
        out.push_back(Term::tt());
        out.push_back(Term::ff());
      }
      if (goal.is(Type::Kind::Nat))
        for (std::uint64_t k = 0; k <= max_nat_; ++k) out.push_back(Term::natural(k));
      if (goal == param_type_) out.push_back(Term::var(param_));
      return;
    }
    if (goal.is(Type::Kind::Prod))
      for (std::size_t i = 1; i + 1 < n; ++i)
        for (auto& l : of(goal.left(), i))
          for (auto& r : of(goal.right(), n - 1 - i)) out.push_back(Term::pair(l, r));
    if (goal.is(Type::Kind::Box))
      for (auto& b : of(goal.body(), n - 1)) out.push_back(Term::box(goal.grade(), b));
    for (auto& e : elim_) {
      if (e.is(Type::Kind::Prod) && e.left() == goal)
        for (auto& p : of(e, n - 1)) out.push_back(Term::fst(p));
      if (e.is(Type::Kind::Prod) && e.right() == goal)
        for (auto& p : of(e, n - 1)) out.push_back(Term::snd(p));
      if (e.is(Type::Kind::Box) && e.body() == goal)
        for (auto& p : of(e, n - 1)) out.push_back(Term::unbox(p));
    }
    for (std::size_t i = 1; i + 2 < n; ++i)
      for (std::size_t j = 1; i + j + 1 < n; ++j) {
        std::size_t k = n - 1 - i - j;
        const auto& cs = of(Type::boolean(), i);
        if (cs.empty()) continue;
        const auto& ts = of(goal, j);
        if (ts.empty()) continue;
        const auto& es = of(goal, k);
        for (auto& c : cs)
          for (auto& t : ts)
            for (auto& e : es) out.push_back(Term::ite(c, t, e));
      }
  }

  const Typechecker& tc_;
  std::string param_;
  Type param_type_;
  std::uint64_t max_nat_;
  Context ctx_;
  std::vector<Type> elim_;
  std::map<std::pair<std::string, std::size_t>, std::vector<Term>> memo_;
};

}  // namespace detail

/// Builds the presheaf of sections of a type over a finite lattice.
class Interpreter {
 public:
  Interpreter(Lattice lat, EnumBudget budget)
      : lat_(std::move(lat)),
        budget_(std::move(budget)),
        deltas_(budget_.deltas.value_or(DeltaProfile::defaults(lat_))),
        tc_(lat_, budget_.mode, deltas_, false),
        ev_(lat_, deltas_) {
    if (!lat_.is_finite()) throw LatticeError("model checks need a finite lattice, got " + lat_.name());
    elements_ = lat_.elements();
  }

  const Lattice& lattice() const { return lat_; }
  const Typechecker& typechecker() const { return tc_; }
  const Evaluator& evaluator() const { return ev_; }
  const DeltaProfile& deltas() const { return deltas_; }

  /// Closed values of type A (up to subsumption), within the budget.
  std::vector<Value> values(const Type& a, bool& exhaustive, std::size_t& corpus) {
    std::vector<Value> out;
    enumerate(a, out, exhaustive, corpus);
    return out;
  }

  PresheafRep interpret(const Type& a) {
    PresheafRep rep{lat_, a, budget_.mode, elements_, {}, {}, true, 0, 0};
    auto vals = values(a, rep.exhaustive, rep.corpus);
    rep.candidates = vals.size();
    rep.sections.resize(elements_.size());
    for (auto& v : vals) {
      auto j = retype(v);
      if (!j || !tc_.is_subtype(j->type, a)) continue;
      for (std::size_t i = 0; i < elements_.size(); ++i)
        if (admit(a, v, elements_[i])) rep.sections[i].push_back({v, j->bound});
    }
    for (std::size_t i = 0; i < elements_.size(); ++i)
      for (std::size_t k = 0; k < elements_.size(); ++k)
        if (lat_.leq(elements_[i], elements_[k])) rep.transitions[{i, k}] = rep.sections[i];
    return rep;
  }

  /// Typing of a closed candidate value; nullopt when it is ill-typed (a box
  /// whose content exceeds its grade).
  std::optional<Judgment> retype(const Value& v) const {
    try {
      return tc_.retype_value(v, lat_.bottom());
    } catch (const TypeError&) {
      return std::nullopt;
    }
  }

  /// Section membership of (v, bound of v) at r, clause by clause.
  bool admit(const Type& a, const Value& v, const Element& r) {
    auto j = retype(v);
    if (!j || !lat_.leq(j->bound, r)) return false;
    const Term& t = v.term();
    switch (a.kind()) {
      case Type::Kind::Bool:
        return t.is(Term::Kind::True) || t.is(Term::Kind::False);
      case Type::Kind::Nat:
        return t.is(Term::Kind::NatLit);
      case Type::Kind::Prod: {
        if (!t.is(Term::Kind::Pair)) return false;
        auto l = *Value::from_term(t.first());
        auto rr = *Value::from_term(t.second());
        if (!admit(a.left(), l, r) || !admit(a.right(), rr, r)) return false;
        return lat_.leq(lat_.combine(retype(l)->bound, retype(rr)->bound), r);
      }
      case Type::Kind::Box: {
        if (!t.is(Term::Kind::Box) || t.grade() != a.grade()) return false;
        auto inner = *Value::from_term(t.operand());
        return admit(a.body(), inner, r) && lat_.leq(retype(inner)->bound, a.grade());
      }
      case Type::Kind::Arrow:
        return t.is(Term::Kind::Lam) && arrow_admits(a, t, r);
    }
    return false;
  }

 private:
  struct ArrowInfo {
    bool well_behaved = true;  // every application obeys k <= b_b and the result fits b_b
    Element need;              // join of b_a (+) b_b (+) d_app over all arguments
  };

  bool arrow_admits(const Type& a, const Term& lam, const Element& r) {
    auto key = format(a, lat_) + " | " + format(lam, lat_);
    auto it = arrow_cache_.find(key);
    if (it == arrow_cache_.end()) it = arrow_cache_.emplace(key, analyse_arrow(a, lam)).first;
    return it->second.well_behaved && lat_.leq(it->second.need, r);
  }

  ArrowInfo analyse_arrow(const Type& a, const Term& lam) {
    ArrowInfo info{true, lat_.bottom()};
    bool ex = true;
    std::size_t corpus = 0;
    for (auto& arg : values(a.dom(), ex, corpus)) {
      auto ja = tc_.retype_value(arg, lat_.bottom());
      if (!tc_.is_subtype(ja.type, a.dom())) continue;
      auto body = substitute(lam.body(), lam.name(), arg);
      auto jb = tc_.synthesize(body, lat_.bottom());
      auto res = ev_.eval(body);
      auto jw = tc_.retype_value(res.value, lat_.bottom());
      if (!lat_.leq(res.cost, jb.bound) || !lat_.leq(jw.bound, jb.bound) || !tc_.is_subtype(jw.type, a.cod()))
        info.well_behaved = false;
      info.need = lat_.join(info.need, lat_.combine(lat_.combine(ja.bound, jb.bound), deltas_.app));
    }
    return info;
  }

  void enumerate(const Type& a, std::vector<Value>& out, bool& exhaustive, std::size_t& corpus) {
    auto cap = [&] {
      if (out.size() > budget_.max_values) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(budget_.max_values), out.end());
        exhaustive = false;
      }
    };
    switch (a.kind()) {
      case Type::Kind::Bool:
        out = {Value::tt(), Value::ff()};
        return;
      case Type::Kind::Nat:
        for (std::uint64_t k = 0; k <= budget_.max_nat; ++k) out.push_back(Value::natural(k));
        return;
      case Type::Kind::Prod: {
        std::vector<Value> ls, rs;
        enumerate(a.left(), ls, exhaustive, corpus);
        enumerate(a.right(), rs, exhaustive, corpus);
        for (auto& l : ls)
          for (auto& r : rs) {
            out.push_back(Value::pair(l, r));
            if (out.size() > budget_.max_values) return cap();
          }
        return;
      }
      case Type::Kind::Box: {
        std::vector<Value> inner;
        enumerate(a.body(), inner, exhaustive, corpus);
        for (auto& v : inner) out.push_back(Value::box(a.grade(), v));
        return;
      }
      case Type::Kind::Arrow: {
        detail::BodyEnumerator bodies(tc_, "x", a.dom(), budget_.max_nat);
        for (std::size_t n = 1; n < budget_.corpus_size; ++n)
          for (auto& b : bodies.of(a.cod(), n)) {
            auto lam = Term::lam("x", a.dom(), b);
            auto j = tc_.synthesize(lam, lat_.bottom());
            if (!tc_.is_subtype(j.type, a)) continue;
            out.push_back(*Value::from_term(lam));
            ++corpus;
            if (out.size() > budget_.max_values) return cap();
          }
        return;
      }
    }
  }

  Lattice lat_;
  EnumBudget budget_;
  DeltaProfile deltas_;
  Typechecker tc_;
  Evaluator ev_;
  std::vector<Element> elements_;
  std::map<std::string, ArrowInfo> arrow_cache_;
};

inline PresheafRep interpret_type(const Type& a, const Lattice& lat, const EnumBudget& budget = {}) {
  return Interpreter(lat, budget).interpret(a);
}

namespace detail {

inline CheckReport start_report(const char* check, const PresheafRep& rep) {
  CheckReport out{check, rep.lattice.name(), format(rep.type, rep.lattice)};
  out.exhaustive = rep.exhaustive;
  std::size_t total = 0;
  for (auto& s : rep.sections) total += s.size();
  out.universe["elements"] = rep.index.size();
  out.universe["values"] = rep.candidates;
  out.universe["sections"] = total;
  if (rep.corpus) out.universe["lambda_corpus"] = rep.corpus;
  return out;
}

inline std::optional<std::size_t> find_section(const PresheafRep& rep, std::size_t at, const Section& s) {
  const auto key = section_key(rep.lattice, s);
  for (std::size_t k = 0; k < rep.sections[at].size(); ++k)
    if (section_key(rep.lattice, rep.sections[at][k]) == key) return k;
  return std::nullopt;
}

}  // namespace detail

/// Presheaf invariants: bounds below the index, transitions are inclusions,
/// identities and composites behave.
inline CheckReport check_presheaf(const PresheafRep& rep) {
  const auto& lat = rep.lattice;
  auto out = detail::start_report("presheaf", rep);
  const auto n = rep.index.size();
  for (std::size_t i = 0; i < n; ++i)
    for (auto& s : rep.sections[i]) {
      ++out.checked;
      if (!lat.leq(s.bound, rep.index[i]))
        out.fail("bound exceeds index: r=" + lat.format(rep.index[i]) + " " + detail::describe(lat, s));
    }

  // images as section indices, so composites can be compared
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::optional<std::size_t>>> image;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!lat.leq(rep.index[i], rep.index[j])) continue;
      auto it = rep.transitions.find({i, j});
      auto where = "r1=" + lat.format(rep.index[i]) + " r2=" + lat.format(rep.index[j]);
      if (it == rep.transitions.end() || it->second.size() != rep.sections[i].size()) {
        out.fail("missing transition " + where);
        continue;
      }
      auto& img = image[{i, j}];
      for (std::size_t k = 0; k < it->second.size(); ++k) {
        ++out.checked;
        const auto& src = rep.sections[i][k];
        const auto& dst = it->second[k];
        auto pos = detail::find_section(rep, j, dst);
        img.push_back(pos);
        if (!pos) out.fail("transition leaves the sections: " + where + " " + detail::describe(lat, src));
        else if (detail::section_key(lat, src) != detail::section_key(lat, dst))
          out.fail("transition is not an inclusion: " + where + " " + detail::describe(lat, src));
        if (i == j && pos && *pos != k) out.fail("identity transition moves " + detail::describe(lat, src));
      }
    }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!lat.leq(rep.index[i], rep.index[j])) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (!lat.leq(rep.index[j], rep.index[k])) continue;
        auto& ij = image[{i, j}];
        auto& jk = image[{j, k}];
        auto& ik = image[{i, k}];
        for (std::size_t s = 0; s < ij.size() && s < ik.size(); ++s) {
          ++out.checked;
          std::optional<std::size_t> via;
          if (ij[s] && *ij[s] < jk.size()) via = jk[*ij[s]];
          if (via != ik[s])
            out.fail("composite differs: r1=" + lat.format(rep.index[i]) + " r2=" + lat.format(rep.index[j]) +
                     " r3=" + lat.format(rep.index[k]) + " " + detail::describe(lat, rep.sections[i][s]));
        }
      }
    }
  return out;
}

/// cost_r(v, b) = b commutes with every transition.
inline CheckReport check_cost_naturality(const PresheafRep& rep) {
  const auto& lat = rep.lattice;
  auto out = detail::start_report("cost-naturality", rep);
  for (auto& [key, imgs] : rep.transitions) {
    auto [i, j] = key;
    for (std::size_t k = 0; k < imgs.size() && k < rep.sections[i].size(); ++k) {
      ++out.checked;
      const auto& src = rep.sections[i][k];
      // right-then-down: cost at r1, then downset inclusion
      const Element right_down = src.bound;
      // down-then-right: transition, then cost at r2
      const Element down_right = imgs[k].bound;
      if (right_down != down_right || !lat.leq(down_right, rep.index[j]))
        out.fail("square fails: r1=" + lat.format(rep.index[i]) + " r2=" + lat.format(rep.index[j]) + " " +
                 detail::describe(lat, src) + " maps to bound " + lat.format(down_right));
    }
  }
  return out;
}

/// Values are their own reifications: they retype within their section bound,
/// reify to themselves, and evaluate to themselves at cost bottom.
inline CheckReport reify_and_check(const PresheafRep& rep, const Typechecker& tc, const Evaluator& ev) {
  const auto& lat = rep.lattice;
  auto out = detail::start_report("reification", rep);
  for (std::size_t i = 0; i < rep.index.size(); ++i)
    for (auto& s : rep.sections[i]) {
      ++out.checked;
      const auto& r = rep.index[i];
      auto where = "r=" + lat.format(r) + " " + detail::describe(lat, s);
      auto j = tc.retype_value(s.value, r);
      if (!tc.is_subtype(j.type, rep.type) || !lat.leq(j.bound, s.bound) || !j.within_budget)
        out.fail("clause 1: retyped at " + format(j.type, lat) + " bound " + lat.format(j.bound) + ", " + where);
      Term reified = s.value.term();
      if (!alpha_eq(reified, s.value.term()) || !is_value(reified)) out.fail("clause 2: " + where);
      auto res = ev.eval(reified);
      if (!alpha_eq(res.value.term(), s.value.term()) || res.cost != lat.bottom())
        out.fail("clause 3: evaluates at cost " + lat.format(res.cost) + ", " + where);
    }
  return out;
}

/// Sections of Box[s] A are exactly the sections of A with bound <= s, boxed.
inline CheckReport check_box_subpresheaf(const PresheafRep& boxed, const PresheafRep& inner) {
  const auto& lat = boxed.lattice;
  auto out = detail::start_report("box-subpresheaf", boxed);
  if (!boxed.type.is(Type::Kind::Box)) {
    out.fail("not a box type");
    return out;
  }
  const auto& s = boxed.type.grade();
  for (std::size_t i = 0; i < boxed.index.size(); ++i) {
    const auto where = "r=" + lat.format(boxed.index[i]);
    const auto& isecs = inner.sections[inner.index_of(boxed.index[i])];
    std::set<std::string> inner_keys;
    for (auto& sec : isecs) inner_keys.insert(detail::section_key(lat, sec));
    std::set<std::string> stripped;
    for (auto& sec : boxed.sections[i]) {
      ++out.checked;
      const Term& t = sec.value.term();
      if (!t.is(Term::Kind::Box)) {
        out.fail("non-box section " + detail::describe(lat, sec));
        continue;
      }
      Section under{*Value::from_term(t.operand()), sec.bound};
      auto key = detail::section_key(lat, under);
      stripped.insert(key);
      if (!inner_keys.count(key)) out.fail("stripped section missing from inner: " + where + " " + detail::describe(lat, sec));
      if (!lat.leq(sec.bound, s)) out.fail("bound exceeds grade: " + where + " " + detail::describe(lat, sec));
    }
    for (auto& sec : isecs) {
      ++out.checked;
      if (lat.leq(sec.bound, s) && !stripped.count(detail::section_key(lat, sec)))
        out.fail("inner section with bound <= grade not boxed: " + where + " " + detail::describe(lat, sec));
    }
  }
  return out;
}

// ---- denotational model ----------------------------------------------------

struct SemValue;
using SemPtr = std::shared_ptr<const SemValue>;
using SemEnv = std::vector<std::pair<std::string, SemPtr>>;

/// Semantic values: booleans, naturals, pairs, closures (curried lambdas with
/// their environment) and graded boxes.
struct SemValue {
  enum class Kind { Bool, Nat, Pair, Fun, Box };
  Kind kind = Kind::Bool;
  bool truth = false;
  std::uint64_t nat = 0;
  SemPtr left, right;  // Pair; Box uses left
  Element grade;
  Term lambda;
  SemEnv env;
};

struct Denotation {
  SemPtr value;
  Element cost;
};

/// Cost-annotated sets with closures for arrows. Costs live in the session
/// lattice, which doubles as the internal lattice.
class DenModel {
 public:
  DenModel(Lattice lat, DeltaProfile deltas, std::uint64_t fuel = default_fuel)
      : lat_(std::move(lat)), deltas_(std::move(deltas)), fuel_(fuel) {}

  const Lattice& lattice() const { return lat_; }

  Denotation denote(const Term& t, const SemEnv& env = {}) const {
    std::uint64_t used = 0;
    return run(t, env, used);
  }

  /// Reads a semantic value back as a syntactic value.
  Term reify(const SemValue& v) const {
    switch (v.kind) {
      case SemValue::Kind::Bool:
        return v.truth ? Term::tt() : Term::ff();
      case SemValue::Kind::Nat:
        return Term::natural(v.nat);
      case SemValue::Kind::Pair:
        return Term::pair(reify(*v.left), reify(*v.right));
      case SemValue::Kind::Box:
        return Term::box(v.grade, reify(*v.left));
      case SemValue::Kind::Fun: {
        Term out = v.lambda;
        auto fv = free_vars(out);
        for (auto it = v.env.rbegin(); it != v.env.rend(); ++it)
          if (fv.erase(it->first)) out = substitute(out, it->first, reify(*it->second));
        return out;
      }
    }
    return Term::tt();
  }

  /// Carrier membership of a semantic value at a type.
  bool inhabits(const SemValue& v, const Type& a) const {
    switch (a.kind()) {
      case Type::Kind::Bool:
        return v.kind == SemValue::Kind::Bool;
      case Type::Kind::Nat:
        return v.kind == SemValue::Kind::Nat;
      case Type::Kind::Prod:
        return v.kind == SemValue::Kind::Pair && inhabits(*v.left, a.left()) && inhabits(*v.right, a.right());
      case Type::Kind::Box:
        return v.kind == SemValue::Kind::Box && lat_.leq(v.grade, a.grade()) && inhabits(*v.left, a.body());
      case Type::Kind::Arrow:
        return v.kind == SemValue::Kind::Fun;
    }
    return false;
  }

 private:
  static SemPtr make(SemValue v) { return std::make_shared<const SemValue>(std::move(v)); }

  Denotation run(const Term& t, const SemEnv& env, std::uint64_t& used) const {
    if (++used > fuel_) throw ModelError("model fuel exhausted");
    const auto bot = lat_.bottom();
    switch (t.kind()) {
      case Term::Kind::Var:
        for (auto it = env.rbegin(); it != env.rend(); ++it)
          if (it->first == t.name()) return {it->second, bot};
        throw ModelError("unbound variable '" + t.name() + "' in model");
      case Term::Kind::True:
      case Term::Kind::False: {
        SemValue v;
        v.truth = t.is(Term::Kind::True);
        return {make(std::move(v)), bot};
      }
      case Term::Kind::NatLit: {
        SemValue v;
        v.kind = SemValue::Kind::Nat;
        v.nat = t.nat_value();
        return {make(std::move(v)), bot};
      }
      case Term::Kind::Lam: {
        SemValue v;
        v.kind = SemValue::Kind::Fun;
        v.lambda = t;
        v.env = env;
        return {make(std::move(v)), bot};
      }
      case Term::Kind::App: {
        auto f = run(t.fn(), env, used);
        auto a = run(t.arg(), env, used);
        if (f.value->kind != SemValue::Kind::Fun) throw ModelError("application of a non-closure");
        auto inner = f.value->env;
        inner.emplace_back(f.value->lambda.name(), a.value);
        auto r = run(f.value->lambda.body(), inner, used);
        return {r.value, lat_.combine(lat_.combine(lat_.combine(f.cost, a.cost), deltas_.app), r.cost)};
      }
      case Term::Kind::Pair: {
        auto l = run(t.first(), env, used);
        auto r = run(t.second(), env, used);
        SemValue v;
        v.kind = SemValue::Kind::Pair;
        v.left = l.value;
        v.right = r.value;
        return {make(std::move(v)), lat_.combine(l.cost, r.cost)};
      }
      case Term::Kind::Fst:
      case Term::Kind::Snd: {
        auto p = run(t.operand(), env, used);
        if (p.value->kind != SemValue::Kind::Pair) throw ModelError("projection from a non-pair");
        return {t.is(Term::Kind::Fst) ? p.value->left : p.value->right, lat_.combine(p.cost, deltas_.proj)};
      }
      case Term::Kind::If: {
        auto c = run(t.cond(), env, used);
        if (c.value->kind != SemValue::Kind::Bool) throw ModelError("condition is not a boolean");
        auto r = run(c.value->truth ? t.then_branch() : t.else_branch(), env, used);
        return {r.value, lat_.combine(lat_.combine(c.cost, r.cost), deltas_.iff)};
      }
      case Term::Kind::Box: {
        auto inner = run(t.operand(), env, used);
        // subobject inclusion needs the computed cost below the grade
        if (!lat_.leq(inner.cost, t.grade()))
          throw ModelError("box inclusion fails: cost " + lat_.format(inner.cost) + " above grade " +
                           lat_.format(t.grade()));
        SemValue v;
        v.kind = SemValue::Kind::Box;
        v.grade = t.grade();
        v.left = inner.value;
        return {make(std::move(v)), inner.cost};
      }
      case Term::Kind::Unbox: {
        auto inner = run(t.operand(), env, used);
        if (inner.value->kind != SemValue::Kind::Box) throw ModelError("counit on a non-box");
        return {inner.value->left, lat_.combine(inner.cost, deltas_.unbox)};
      }
    }
    throw ModelError("unknown term");
  }

  Lattice lat_;
  DeltaProfile deltas_;
  std::uint64_t fuel_;
};

inline Denotation interpret_term(const Term& t, const Judgment& j, const DenModel& m) {
  if (!alpha_eq(t, j.subject)) throw ModelError("judgment does not belong to the term");
  if (!is_closed(t)) throw ModelError("interpret_term needs a closed term");
  auto d = m.denote(t);
  if (!m.inhabits(*d.value, j.type)) throw ModelError("denotation outside the carrier of " + format(j.type, m.lattice()));
  return d;
}

struct PreservationCase {
  std::string term;
  std::string bound;
  std::string model_cost;
  std::string eval_cost;
  bool value_agrees = false;
  bool cost_within = false;
  bool cost_exact = false;
  std::string error;
};

struct PreservationReport {
  std::string lattice;
  Mode mode = Mode::Sound;
  std::size_t terms = 0;
  std::size_t passed = 0;
  std::size_t exact = 0;
  std::vector<PreservationCase> failures;

  bool ok() const { return passed == terms; }
};

/// Runs typing, evaluation and the model side by side over a corpus.
inline PreservationReport check_cost_preservation(const std::vector<Term>& corpus, const DenModel& m,
                                                  const DeltaProfile& deltas, Mode mode = Mode::Sound) {
  const auto& lat = m.lattice();
  Typechecker tc(lat, mode, deltas, false);
  Evaluator ev(lat, deltas);
  PreservationReport out{lat.name(), mode, corpus.size(), 0, 0, {}};
  for (auto& t : corpus) {
    PreservationCase c;
    c.term = format(t, lat);
    try {
      auto j = tc.synthesize(t, lat.large());
      auto op = ev.eval(t);
      auto d = interpret_term(t, j, m);
      c.bound = lat.format(j.bound);
      c.model_cost = lat.format(d.cost);
      c.eval_cost = lat.format(op.cost);
      c.value_agrees = alpha_eq(m.reify(*d.value), op.value.term());
      c.cost_within = lat.leq(d.cost, j.bound);
      c.cost_exact = d.cost == op.cost;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
    if (c.cost_exact) ++out.exact;
    if (c.value_agrees && c.cost_within && c.error.empty()) ++out.passed;
    else out.failures.push_back(std::move(c));
  }
  return out;
}

// ---- suite -----------------------------------------------------------------

/// The type family checked for a lattice: base types, products, boxes at
/// every grade, and first-order arrows from the lambda corpus.
inline std::vector<Type> model_types(const Lattice& lat, Mode mode) {
  const auto B = Type::boolean();
  const auto N = Type::nat();
  const auto bot = lat.bottom();
  const auto one = lat.unit_step();
  const auto top = lat.large();
  auto arrow = [&](Type a, Type b, std::optional<Element> latent) {
    return Type::arrow(std::move(a), std::move(b), mode == Mode::Sound ? latent : std::nullopt);
  };
  std::vector<Type> out = {B, N, Type::prod(B, B), Type::prod(N, B)};
  for (auto& s : lat.elements()) {
    out.push_back(Type::box(s, B));
    out.push_back(Type::box(s, Type::prod(B, B)));
  }
  out.push_back(arrow(B, B, top));
  out.push_back(arrow(N, B, top));
  out.push_back(arrow(Type::prod(B, B), B, top));
  out.push_back(arrow(Type::box(top, B), B, top));
  out.push_back(arrow(B, Type::prod(B, B), top));
  out.push_back(arrow(B, Type::box(one, B), top));
  if (mode == Mode::Sound) {
    out.push_back(arrow(B, B, bot));
    out.push_back(arrow(B, B, one));
  }
  out.push_back(Type::box(bot, arrow(B, B, top)));
  out.push_back(Type::box(top, arrow(B, B, top)));
  out.push_back(Type::prod(B, arrow(B, B, top)));
  // dedupe (bot == one on lattices without atoms, etc.)
  std::vector<Type> uniq;
  for (auto& t : out)
    if (std::find(uniq.begin(), uniq.end(), t) == uniq.end()) uniq.push_back(t);
  return uniq;
}

/// Every check for one lattice and mode, in a fixed order.
inline std::vector<CheckReport> run_model_checks(const Lattice& lat, EnumBudget budget) {
  std::vector<CheckReport> out;
  auto down = build_downset(lat);
  out.push_back(check_downset(down));
  auto nat = check_internal_naturality_detailed(lat);
  out.push_back(nat.main);

  Interpreter in(lat, budget);
  std::map<std::string, PresheafRep> reps;
  auto rep_of = [&](const Type& t) -> const PresheafRep& {
    auto key = format(t, lat);
    auto it = reps.find(key);
    if (it == reps.end()) it = reps.emplace(key, in.interpret(t)).first;
    return it->second;
  };
  for (auto& t : model_types(lat, budget.mode)) {
    const auto& rep = rep_of(t);
    out.push_back(check_presheaf(rep));
    out.push_back(check_cost_naturality(rep));
    out.push_back(reify_and_check(rep, in.typechecker(), in.evaluator()));
    if (t.is(Type::Kind::Box)) out.push_back(check_box_subpresheaf(rep, rep_of(t.body())));
  }
  for (auto& r : out) r.subject += std::string(" [") + to_string(budget.mode) + "]";
  return out;
}

}  // namespace costlam

#endif  // COSTLAM_MODEL_HPP
