#ifndef COSTLAM_EVAL_HPP
#define COSTLAM_EVAL_HPP

// Big-step call-by-value evaluation with cost accounting. Application is by
// substitution, t[x := v], exactly as in the (App) rule; no environments.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "costlam/lattice.hpp"
#include "costlam/syntax.hpp"
#include "costlam/typing.hpp"

namespace costlam {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No evaluation rule applies (only possible for ill-typed input).
class Stuck : public EvalError {
 public:
  using EvalError::EvalError;
};

class FuelExhausted : public EvalError {
 public:
  using EvalError::EvalError;
};

struct CostedResult {
  Value value;
  Element cost;
};

/// Evaluation derivation; `contribution` is the cost the rule adds on top of
/// its premises, so folding contributions with combine gives the total.
struct EvalTrace {
  std::string rule;
  Term subject;
  Element contribution;
  std::vector<EvalTrace> children;
};

inline constexpr std::uint64_t default_fuel = 1'000'000;

class Evaluator {
 public:
  Evaluator(Lattice lat, DeltaProfile deltas, std::uint64_t fuel = default_fuel)
      : lat_(std::move(lat)), deltas_(std::move(deltas)), fuel_(fuel) {}

  CostedResult eval(const Term& t) const {
    std::uint64_t used = 0;
    return run(t, used, nullptr);
  }

  std::pair<CostedResult, EvalTrace> eval_trace(const Term& t) const {
    std::uint64_t used = 0;
    EvalTrace trace;
    auto r = run(t, used, &trace);
    return {std::move(r), std::move(trace)};
  }

  const Lattice& lattice() const { return lat_; }
  const DeltaProfile& deltas() const { return deltas_; }

 private:
  CostedResult run(const Term& t, std::uint64_t& used, EvalTrace* trace) const {
    if (++used > fuel_) throw FuelExhausted("evaluation exceeded " + std::to_string(fuel_) + " derivation nodes");

    auto child = [&](const Term& sub) -> CostedResult {
      if (!trace) return run(sub, used, nullptr);
      trace->children.emplace_back();
      return run(sub, used, &trace->children.back());
    };
    auto record = [&](const char* rule, const Element& contribution) {
      if (trace) {
        trace->rule = rule;
        trace->subject = t;
        trace->contribution = contribution;
      }
    };
    const Element bot = lat_.bottom();

    switch (t.kind()) {
      case Term::Kind::Lam:
      case Term::Kind::True:
      case Term::Kind::False:
      case Term::Kind::NatLit:
        record("Val", bot);
        return {*Value::from_term(t), bot};
      case Term::Kind::Var:
        throw Stuck("free variable '" + t.name() + "' during evaluation");
      case Term::Kind::Pair: {
        // Pairs of values take this path too; the cost is then bottom, as (Val) gives.
        record("Pair", bot);
        auto l = child(t.first());
        auto r = child(t.second());
        return {Value::pair(l.value, r.value), lat_.combine(l.cost, r.cost)};
      }
      case Term::Kind::Fst:
      case Term::Kind::Snd: {
        bool first = t.is(Term::Kind::Fst);
        record(first ? "Fst" : "Snd", deltas_.proj);
        auto p = child(t.operand());
        if (!p.value.term().is(Term::Kind::Pair)) throw Stuck("projection from a non-pair value");
        const Term& part = first ? p.value.term().first() : p.value.term().second();
        return {*Value::from_term(part), lat_.combine(p.cost, deltas_.proj)};
      }
      case Term::Kind::If: {
        auto c = child(t.cond());
        bool yes = c.value.term().is(Term::Kind::True);
        if (!yes && !c.value.term().is(Term::Kind::False)) throw Stuck("condition is not a boolean");
        record(yes ? "IfT" : "IfF", deltas_.iff);
        auto b = child(yes ? t.then_branch() : t.else_branch());
        return {b.value, lat_.combine(lat_.combine(c.cost, b.cost), deltas_.iff)};
      }
      case Term::Kind::App: {
        record("App", deltas_.app);
        auto f = child(t.fn());
        if (!f.value.term().is(Term::Kind::Lam)) throw Stuck("applying a non-function value");
        auto a = child(t.arg());
        const Term& lam = f.value.term();
        auto body = child(substitute(lam.body(), lam.name(), a.value));
        auto k = lat_.combine(lat_.combine(lat_.combine(f.cost, a.cost), deltas_.app), body.cost);
        return {body.value, std::move(k)};
      }
      case Term::Kind::Box: {
        record("Box", bot);
        auto inner = child(t.operand());
        return {Value::box(t.grade(), inner.value), inner.cost};
      }
      case Term::Kind::Unbox: {
        record("Unbox", deltas_.unbox);
        auto inner = child(t.operand());
        if (!inner.value.term().is(Term::Kind::Box)) throw Stuck("unbox of a non-box value");
        return {*Value::from_term(inner.value.term().operand()), lat_.combine(inner.cost, deltas_.unbox)};
      }
    }
    throw Stuck("unknown term");
  }

  Lattice lat_;
  DeltaProfile deltas_;
  std::uint64_t fuel_;
};

inline CostedResult eval(const Lattice& lat, const Term& t, const DeltaProfile& deltas,
                         std::uint64_t fuel = default_fuel) {
  return Evaluator(lat, deltas, fuel).eval(t);
}

inline std::pair<CostedResult, EvalTrace> eval_trace(const Lattice& lat, const Term& t, const DeltaProfile& deltas,
                                                     std::uint64_t fuel = default_fuel) {
  return Evaluator(lat, deltas, fuel).eval_trace(t);
}

/// Folds every contribution in a trace with combine.
inline Element fold_contributions(const Lattice& lat, const EvalTrace& tr) {
  Element acc = tr.contribution;
  for (auto& c : tr.children) acc = lat.combine(acc, fold_contributions(lat, c));
  return acc;
}

}  // namespace costlam

#endif  // COSTLAM_EVAL_HPP
