#ifndef COSTLAM_TYPING_HPP
#define COSTLAM_TYPING_HPP

// Bound-synthesizing typechecker.
//
// A judgment ctx |- t : A carries a synthesized bound b and is checked
// against a budget r (b <= r). Two rule sets are offered:
//
//   Mode::Paper  lambdas carry their body bound as their own bound, arrows
//                are unannotated, and application charges b_f + b_a + d_app.
//   Mode::Sound  lambdas have bound bottom and move the body bound onto the
//                arrow as a latent cost, which every application pays again.
//
// Grade subsumption Box[s1] A <= Box[s2] A (s1 <= s2) is applied at argument
// positions and when unifying the branches of a conditional.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "costlam/lattice.hpp"
#include "costlam/syntax.hpp"

namespace costlam {

enum class Mode { Paper, Sound };

inline const char* to_string(Mode m) { return m == Mode::Paper ? "paper" : "sound"; }

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "paper") return Mode::Paper;
  if (s == "sound") return Mode::Sound;
  return std::nullopt;
}

/// Per-operation costs.
struct DeltaProfile {
  Element app;
  Element iff;
  Element unbox;
  Element proj;

  static DeltaProfile uniform(const Element& d) { return {d, d, d, d}; }
  static DeltaProfile defaults(const Lattice& lat) { return uniform(lat.unit_step()); }

  friend bool operator==(const DeltaProfile&, const DeltaProfile&) = default;
};

/// Ordered bindings; lookup finds the rightmost binding of a name.
class Context {
 public:
  Context() = default;

  Context extend(std::string name, Type type) const {
    Context c = *this;
    c.bindings_.emplace_back(std::move(name), std::move(type));
    return c;
  }

  const Type* lookup(const std::string& name) const {
    for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  const std::vector<std::pair<std::string, Type>>& bindings() const { return bindings_; }
  bool empty() const { return bindings_.empty(); }

 private:
  std::vector<std::pair<std::string, Type>> bindings_;
};

/// One node of a typing derivation.
struct Derivation {
  std::string rule;
  Term subject;
  Type type;
  Element bound;
  std::vector<Derivation> premises;
};

struct Judgment {
  Term subject;
  Type type;
  Element bound;
  Element budget;
  bool within_budget = false;
  Derivation trace;
};

struct BudgetVerdict {
  bool accepted = false;
  Element bound;
  Element budget;
};

inline BudgetVerdict check_against_budget(const Judgment& j) { return {j.within_budget, j.bound, j.budget}; }

enum class TypeErrorKind {
  UnboundVariable,
  NotAFunction,
  ArgumentMismatch,
  ConditionNotBool,
  BranchMismatch,
  NotAPair,
  UnboxNonBox,
  GradeExceeded,
  LatentInPaperMode,
  ForeignLiteral,
};

inline const char* to_string(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::UnboundVariable: return "UnboundVariable";
    case TypeErrorKind::NotAFunction: return "NotAFunction";
    case TypeErrorKind::ArgumentMismatch: return "ArgumentMismatch";
    case TypeErrorKind::ConditionNotBool: return "ConditionNotBool";
    case TypeErrorKind::BranchMismatch: return "BranchMismatch";
    case TypeErrorKind::NotAPair: return "NotAPair";
    case TypeErrorKind::UnboxNonBox: return "UnboxNonBox";
    case TypeErrorKind::GradeExceeded: return "GradeExceeded";
    case TypeErrorKind::LatentInPaperMode: return "LatentInPaperMode";
    case TypeErrorKind::ForeignLiteral: return "ForeignLiteral";
  }
  return "TypeError";
}

class TypeError : public std::runtime_error {
 public:
  TypeError(TypeErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  TypeErrorKind kind() const { return kind_; }

 private:
  TypeErrorKind kind_;
};

/// box[s] t where the bound b of t is not below s.
class GradeExceeded : public TypeError {
 public:
  GradeExceeded(Element bound, Element grade, const std::string& msg)
      : TypeError(TypeErrorKind::GradeExceeded, msg), bound_(std::move(bound)), grade_(std::move(grade)) {}
  const Element& bound() const { return bound_; }
  const Element& grade() const { return grade_; }

 private:
  Element bound_;
  Element grade_;
};

class Typechecker {
 public:
  Typechecker(Lattice lat, Mode mode, DeltaProfile deltas, bool record_trace = true)
      : lat_(std::move(lat)), mode_(mode), deltas_(std::move(deltas)), record_trace_(record_trace) {
    for (auto* d : {&deltas_.app, &deltas_.iff, &deltas_.unbox, &deltas_.proj}) lat_.require(*d);
  }

  const Lattice& lattice() const { return lat_; }
  Mode mode() const { return mode_; }
  const DeltaProfile& deltas() const { return deltas_; }

  /// Synthesizes type and bound. The budget only decides within_budget.
  Judgment synthesize(const Context& ctx, const Term& t, const Element& budget) const {
    lat_.require(budget);
    Derivation d = synth(ctx, t);
    Judgment j{t, d.type, d.bound, budget, lat_.leq(d.bound, budget), {}};
    j.trace = std::move(d);
    return j;
  }

  Judgment synthesize(const Term& t, const Element& budget) const { return synthesize(Context{}, t, budget); }

  Judgment retype_value(const Value& v, const Element& budget) const { return synthesize(v.term(), budget); }

  /// Latent of an arrow, reading an absent annotation as bottom.
  Element latent_of(const Type& arrow) const { return arrow.latent().value_or(lat_.bottom()); }

  /// Algorithmic subtyping. Box grades are covariant; arrows are invariant in
  /// paper mode and contra/covariant (latent covariant) in sound mode.
  bool is_subtype(const Type& a, const Type& b) const {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Type::Kind::Bool:
      case Type::Kind::Nat:
        return true;
      case Type::Kind::Prod:
        return is_subtype(a.left(), b.left()) && is_subtype(a.right(), b.right());
      case Type::Kind::Box:
        return lat_.leq(a.grade(), b.grade()) && is_subtype(a.body(), b.body());
      case Type::Kind::Arrow:
        if (mode_ == Mode::Paper) return equivalent(a, b) && a.latent() == b.latent();
        return is_subtype(b.dom(), a.dom()) && is_subtype(a.cod(), b.cod()) &&
               lat_.leq(latent_of(a), latent_of(b));
    }
    return false;
  }

  bool equivalent(const Type& a, const Type& b) const {
    if (mode_ == Mode::Paper) return a == b;
    return is_subtype(a, b) && is_subtype(b, a);
  }

  /// Least common supertype used for conditional branches.
  std::optional<Type> join_types(const Type& a, const Type& b) const {
    if (a.kind() != b.kind()) return std::nullopt;
    switch (a.kind()) {
      case Type::Kind::Bool:
      case Type::Kind::Nat:
        return a;
      case Type::Kind::Prod: {
        auto l = join_types(a.left(), b.left());
        auto r = join_types(a.right(), b.right());
        if (!l || !r) return std::nullopt;
        return Type::prod(*l, *r);
      }
      case Type::Kind::Box: {
        auto body = join_types(a.body(), b.body());
        if (!body) return std::nullopt;
        return Type::box(lat_.join(a.grade(), b.grade()), *body);
      }
      case Type::Kind::Arrow: {
        if (mode_ == Mode::Paper) {
          if (a == b) return a;
          return std::nullopt;
        }
        if (!equivalent(a.dom(), b.dom())) return std::nullopt;
        auto cod = join_types(a.cod(), b.cod());
        if (!cod) return std::nullopt;
        return Type::arrow(a.dom(), *cod, lat_.join(latent_of(a), latent_of(b)));
      }
    }
    return std::nullopt;
  }

 private:
  std::string show(const Type& t) const { return format(t, lat_); }
  std::string show(const Term& t) const { return format(t, lat_); }

  Derivation node(const char* rule, const Term& t, Type type, Element bound, std::vector<Derivation> premises) const {
    Derivation d{rule, t, std::move(type), std::move(bound), {}};
    if (record_trace_) d.premises = std::move(premises);
    return d;
  }

  void check_type_literals(const Type& a) const {
    switch (a.kind()) {
      case Type::Kind::Box:
        if (!lat_.contains(a.grade()))
          throw TypeError(TypeErrorKind::ForeignLiteral, "grade does not belong to lattice " + lat_.name());
        check_type_literals(a.body());
        return;
      case Type::Kind::Arrow:
        if (a.latent() && !lat_.contains(*a.latent()))
          throw TypeError(TypeErrorKind::ForeignLiteral, "latent does not belong to lattice " + lat_.name());
        check_type_literals(a.dom());
        check_type_literals(a.cod());
        return;
      case Type::Kind::Prod:
        check_type_literals(a.left());
        check_type_literals(a.right());
        return;
      default:
        return;
    }
  }

  void check_annotation(const Type& a) const {
    check_type_literals(a);
    if (mode_ == Mode::Paper && a.has_latent())
      throw TypeError(TypeErrorKind::LatentInPaperMode,
                      "latent arrow annotation in paper mode: " + show(a));
  }

  // Fills unannotated arrow latents of `annot` from the corresponding
  // positions of `actual`. Used for sound-mode beta-redexes.
  Type refine(const Type& annot, const Type& actual) const {
    if (annot.kind() != actual.kind()) return annot;
    switch (annot.kind()) {
      case Type::Kind::Prod:
        return Type::prod(refine(annot.left(), actual.left()), refine(annot.right(), actual.right()));
      case Type::Kind::Box:
        return Type::box(annot.grade(), refine(annot.body(), actual.body()));
      case Type::Kind::Arrow:
        return Type::arrow(refine(annot.dom(), actual.dom()), refine(annot.cod(), actual.cod()),
                           annot.latent() ? annot.latent() : actual.latent());
      default:
        return annot;
    }
  }

  Derivation synth_lam(const Context& ctx, const Term& t, const Type& annot) const {
    check_annotation(annot);
    auto body = synth(ctx.extend(t.name(), annot), t.body());
    if (mode_ == Mode::Paper) {
      auto ty = Type::arrow(annot, body.type);
      auto b = body.bound;
      return node("Lam", t, std::move(ty), std::move(b), {std::move(body)});
    }
    auto ty = Type::arrow(annot, body.type, body.bound);
    return node("Lam", t, std::move(ty), lat_.bottom(), {std::move(body)});
  }

  Derivation synth(const Context& ctx, const Term& t) const {
    switch (t.kind()) {
      case Term::Kind::Var: {
        const Type* ty = ctx.lookup(t.name());
        if (!ty) throw TypeError(TypeErrorKind::UnboundVariable, "unbound variable '" + t.name() + "'");
        return node("Var", t, *ty, lat_.bottom(), {});
      }
      case Term::Kind::True:
      case Term::Kind::False:
        return node("Bool", t, Type::boolean(), lat_.bottom(), {});
      case Term::Kind::NatLit:
        return node("Nat", t, Type::nat(), lat_.bottom(), {});
      case Term::Kind::Lam:
        return synth_lam(ctx, t, t.annotation());
      case Term::Kind::App: {
        Derivation f, a;
        if (mode_ == Mode::Sound && t.fn().is(Term::Kind::Lam) && t.fn().annotation().has_unannotated_arrow()) {
          a = synth(ctx, t.arg());
          f = synth_lam(ctx, t.fn(), refine(t.fn().annotation(), a.type));
        } else {
          f = synth(ctx, t.fn());
          a = synth(ctx, t.arg());
        }
        if (!f.type.is(Type::Kind::Arrow))
          throw TypeError(TypeErrorKind::NotAFunction,
                          "applying a non-function of type " + show(f.type) + " in " + show(t));
        if (!is_subtype(a.type, f.type.dom()))
          throw TypeError(TypeErrorKind::ArgumentMismatch, "argument of type " + show(a.type) +
                                                               " where " + show(f.type.dom()) +
                                                               " is expected in " + show(t));
        auto b = lat_.combine(lat_.combine(f.bound, a.bound), deltas_.app);
        if (mode_ == Mode::Sound) b = lat_.combine(b, latent_of(f.type));
        auto ty = f.type.cod();
        return node("App", t, std::move(ty), std::move(b), {std::move(f), std::move(a)});
      }
      case Term::Kind::Pair: {
        auto l = synth(ctx, t.first());
        auto r = synth(ctx, t.second());
        auto ty = Type::prod(l.type, r.type);
        auto b = lat_.combine(l.bound, r.bound);
        return node("Pair", t, std::move(ty), std::move(b), {std::move(l), std::move(r)});
      }
      case Term::Kind::Fst:
      case Term::Kind::Snd: {
        auto p = synth(ctx, t.operand());
        if (!p.type.is(Type::Kind::Prod))
          throw TypeError(TypeErrorKind::NotAPair, "projection from non-pair type " + show(p.type));
        auto ty = t.is(Term::Kind::Fst) ? p.type.left() : p.type.right();
        auto b = lat_.combine(p.bound, deltas_.proj);
        return node(t.is(Term::Kind::Fst) ? "Fst" : "Snd", t, std::move(ty), std::move(b), {std::move(p)});
      }
      case Term::Kind::If: {
        auto c = synth(ctx, t.cond());
        if (!c.type.is(Type::Kind::Bool))
          throw TypeError(TypeErrorKind::ConditionNotBool, "condition has type " + show(c.type));
        auto th = synth(ctx, t.then_branch());
        auto el = synth(ctx, t.else_branch());
        auto ty = join_types(th.type, el.type);
        if (!ty)
          throw TypeError(TypeErrorKind::BranchMismatch,
                          "branches have incompatible types " + show(th.type) + " and " + show(el.type));
        auto b = lat_.combine(lat_.combine(c.bound, lat_.join(th.bound, el.bound)), deltas_.iff);
        return node("If", t, std::move(*ty), std::move(b), {std::move(c), std::move(th), std::move(el)});
      }
      case Term::Kind::Box: {
        if (!lat_.contains(t.grade()))
          throw TypeError(TypeErrorKind::ForeignLiteral, "grade does not belong to lattice " + lat_.name());
        auto inner = synth(ctx, t.operand());
        if (!lat_.leq(inner.bound, t.grade()))
          throw GradeExceeded(inner.bound, t.grade(),
                              "bound " + lat_.format(inner.bound) + " exceeds grade " + lat_.format(t.grade()) +
                                  " in " + show(t));
        auto ty = Type::box(t.grade(), inner.type);
        auto b = inner.bound;
        return node("Box", t, std::move(ty), std::move(b), {std::move(inner)});
      }
      case Term::Kind::Unbox: {
        auto inner = synth(ctx, t.operand());
        if (!inner.type.is(Type::Kind::Box))
          throw TypeError(TypeErrorKind::UnboxNonBox, "unbox of non-box type " + show(inner.type));
        auto ty = inner.type.body();
        auto b = lat_.combine(inner.bound, deltas_.unbox);
        return node("Unbox", t, std::move(ty), std::move(b), {std::move(inner)});
      }
    }
    throw TypeError(TypeErrorKind::NotAFunction, "unknown term");
  }

  Lattice lat_;
  Mode mode_;
  DeltaProfile deltas_;
  bool record_trace_;
};

inline Judgment synthesize(const Lattice& lat, const Context& ctx, const Term& t, const Element& budget, Mode mode,
                           const DeltaProfile& deltas) {
  return Typechecker(lat, mode, deltas).synthesize(ctx, t, budget);
}

inline Judgment retype_value(const Lattice& lat, const Value& v, const Element& budget, Mode mode,
                             const DeltaProfile& deltas) {
  return Typechecker(lat, mode, deltas).retype_value(v, budget);
}

}  // namespace costlam

#endif  // COSTLAM_TYPING_HPP
