#ifndef COSTLAM_SYNTAX_HPP
#define COSTLAM_SYNTAX_HPP

// Types, terms and values of the resource-bounded lambda calculus, together
// with free variables, alpha-equivalence, capture-avoiding substitution and
// a printer whose output the parser reads back.

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "costlam/lattice.hpp"

namespace costlam {

// ---- types -----------------------------------------------------------------

class Type {
 public:
  enum class Kind { Bool, Nat, Prod, Arrow, Box };

  Type() : Type(boolean()) {}

  static Type boolean() {
    static const Type t(std::make_shared<Node>(Node{Kind::Bool}));
    return t;
  }
  static Type nat() {
    static const Type t(std::make_shared<Node>(Node{Kind::Nat}));
    return t;
  }
  static Type prod(Type left, Type right) {
    auto n = std::make_shared<Node>(Node{Kind::Prod});
    n->left = std::move(left).node_;
    n->right = std::move(right).node_;
    return Type(std::move(n));
  }
  /// `latent` is the per-application cost carried by the arrow; it is only
  /// meaningful in sound mode.
  static Type arrow(Type dom, Type cod, std::optional<Element> latent = std::nullopt) {
    auto n = std::make_shared<Node>(Node{Kind::Arrow});
    n->left = std::move(dom).node_;
    n->right = std::move(cod).node_;
    n->latent = std::move(latent);
    return Type(std::move(n));
  }
  static Type box(Element grade, Type body) {
    auto n = std::make_shared<Node>(Node{Kind::Box});
    n->grade = std::move(grade);
    n->left = std::move(body).node_;
    return Type(std::move(n));
  }

  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return kind() == k; }

  // Prod: left/right. Arrow: dom/cod. Box: body.
  Type left() const { return Type(node_->left); }
  Type right() const { return Type(node_->right); }
  Type dom() const { return left(); }
  Type cod() const { return right(); }
  Type body() const { return left(); }
  const std::optional<Element>& latent() const { return node_->latent; }
  const Element& grade() const { return node_->grade; }

  /// Structural equality; an absent latent differs from an explicit bottom.
  friend bool operator==(const Type& a, const Type& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Bool:
      case Kind::Nat:
        return true;
      case Kind::Prod:
        return a.left() == b.left() && a.right() == b.right();
      case Kind::Arrow:
        return a.latent() == b.latent() && a.dom() == b.dom() && a.cod() == b.cod();
      case Kind::Box:
        return a.grade() == b.grade() && a.body() == b.body();
    }
    return false;
  }

  /// True when some arrow inside carries a latent annotation.
  bool has_latent() const {
    switch (kind()) {
      case Kind::Bool:
      case Kind::Nat:
        return false;
      case Kind::Arrow:
        return latent().has_value() || dom().has_latent() || cod().has_latent();
      case Kind::Box:
        return body().has_latent();
      case Kind::Prod:
        return left().has_latent() || right().has_latent();
    }
    return false;
  }

  /// True when some arrow inside has no latent annotation.
  bool has_unannotated_arrow() const {
    switch (kind()) {
      case Kind::Bool:
      case Kind::Nat:
        return false;
      case Kind::Arrow:
        return !latent().has_value() || dom().has_unannotated_arrow() || cod().has_unannotated_arrow();
      case Kind::Box:
        return body().has_unannotated_arrow();
      case Kind::Prod:
        return left().has_unannotated_arrow() || right().has_unannotated_arrow();
    }
    return false;
  }

  bool contains_arrow() const {
    switch (kind()) {
      case Kind::Arrow:
        return true;
      case Kind::Box:
        return body().contains_arrow();
      case Kind::Prod:
        return left().contains_arrow() || right().contains_arrow();
      default:
        return false;
    }
  }

  std::size_t size() const {
    switch (kind()) {
      case Kind::Bool:
      case Kind::Nat:
        return 1;
      case Kind::Box:
        return 1 + body().size();
      default:
        return 1 + left().size() + right().size();
    }
  }

 private:
  struct Node {
    Kind kind;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
    std::optional<Element> latent;
    Element grade;
  };
  explicit Type(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// ---- terms -----------------------------------------------------------------

class Term {
 public:
  enum class Kind { Var, Lam, App, Pair, Fst, Snd, If, True, False, NatLit, Box, Unbox };

  Term() : Term(tt()) {}

  static Term var(std::string name) {
    auto n = node(Kind::Var);
    n->name = std::move(name);
    return Term(std::move(n));
  }
  static Term lam(std::string name, Type annot, Term body) {
    auto n = node(Kind::Lam);
    n->name = std::move(name);
    n->annot = std::move(annot);
    n->kids = {std::move(body)};
    return Term(std::move(n));
  }
  static Term app(Term fn, Term arg) { return with_kids(Kind::App, {std::move(fn), std::move(arg)}); }
  static Term pair(Term a, Term b) { return with_kids(Kind::Pair, {std::move(a), std::move(b)}); }
  static Term fst(Term t) { return with_kids(Kind::Fst, {std::move(t)}); }
  static Term snd(Term t) { return with_kids(Kind::Snd, {std::move(t)}); }
  static Term ite(Term c, Term t, Term e) { return with_kids(Kind::If, {std::move(c), std::move(t), std::move(e)}); }
  static Term tt() {
    static const Term t(node(Kind::True));
    return t;
  }
  static Term ff() {
    static const Term t(node(Kind::False));
    return t;
  }
  static Term natural(std::uint64_t v) {
    auto n = node(Kind::NatLit);
    n->nat = v;
    return Term(std::move(n));
  }
  static Term box(Element grade, Term t) {
    auto n = node(Kind::Box);
    n->grade = std::move(grade);
    n->kids = {std::move(t)};
    return Term(std::move(n));
  }
  static Term unbox(Term t) { return with_kids(Kind::Unbox, {std::move(t)}); }

  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return kind() == k; }

  const std::string& name() const { return node_->name; }
  const Type& annotation() const { return node_->annot; }
  const Element& grade() const { return node_->grade; }
  std::uint64_t nat_value() const { return node_->nat; }

  const std::vector<Term>& children() const { return node_->kids; }
  const Term& child(std::size_t i) const { return node_->kids.at(i); }
  // Named views of the children.
  const Term& body() const { return child(0); }     // Lam
  const Term& fn() const { return child(0); }       // App
  const Term& arg() const { return child(1); }      // App
  const Term& first() const { return child(0); }    // Pair
  const Term& second() const { return child(1); }   // Pair
  const Term& operand() const { return child(0); }  // Fst, Snd, Box, Unbox
  const Term& cond() const { return child(0); }     // If
  const Term& then_branch() const { return child(1); }
  const Term& else_branch() const { return child(2); }

  /// Copy of this node with different children (same arity).
  Term with_children(std::vector<Term> kids) const {
    auto n = std::make_shared<Node>(*node_);
    n->kids = std::move(kids);
    return Term(std::move(n));
  }

  /// Identity of the underlying node; equal terms may still be distinct nodes.
  bool same_node(const Term& other) const { return node_ == other.node_; }

  std::size_t size() const {
    std::size_t s = 1;
    for (auto& k : children()) s += k.size();
    return s;
  }

 private:
  struct Node {
    Kind kind;
    std::string name;
    Type annot;
    Element grade;
    std::uint64_t nat = 0;
    std::vector<Term> kids;
  };
  static std::shared_ptr<Node> node(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
  }
  static Term with_kids(Kind k, std::vector<Term> kids) {
    auto n = node(k);
    n->kids = std::move(kids);
    return Term(std::move(n));
  }
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Values: lambdas, pairs of values, booleans, naturals, and boxed values.
inline bool is_value(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Lam:
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::NatLit:
      return true;
    case Term::Kind::Pair:
      return is_value(t.first()) && is_value(t.second());
    case Term::Kind::Box:
      return is_value(t.operand());
    default:
      return false;
  }
}

/// A term known to be a value. Embedding back into Term is `term()`.
class Value {
 public:
  Value() : term_(Term::tt()) {}
  static std::optional<Value> from_term(Term t) {
    if (!is_value(t)) return std::nullopt;
    return Value(std::move(t));
  }
  static Value tt() { return Value(Term::tt()); }
  static Value ff() { return Value(Term::ff()); }
  static Value natural(std::uint64_t n) { return Value(Term::natural(n)); }
  static Value lam(std::string x, Type a, Term body) { return Value(Term::lam(std::move(x), std::move(a), std::move(body))); }
  static Value pair(const Value& a, const Value& b) { return Value(Term::pair(a.term(), b.term())); }
  static Value box(Element g, const Value& v) { return Value(Term::box(std::move(g), v.term())); }

  const Term& term() const { return term_; }
  Term::Kind kind() const { return term_.kind(); }

 private:
  explicit Value(Term t) : term_(std::move(t)) {}
  Term term_;
};

// ---- binding structure -----------------------------------------------------

namespace detail {
inline void collect_free(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::Var:
      if (std::find(bound.begin(), bound.end(), t.name()) == bound.end()) out.insert(t.name());
      return;
    case Term::Kind::Lam:
      bound.push_back(t.name());
      collect_free(t.body(), bound, out);
      bound.pop_back();
      return;
    default:
      for (auto& k : t.children()) collect_free(k, bound, out);
  }
}

inline void collect_names(const Term& t, std::set<std::string>& out) {
  if (t.is(Term::Kind::Var) || t.is(Term::Kind::Lam)) out.insert(t.name());
  for (auto& k : t.children()) collect_names(k, out);
}

inline bool alpha_eq_in(const Term& a, const Term& b, std::vector<std::pair<std::string, std::string>>& env) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Var: {
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        bool l = it->first == a.name(), r = it->second == b.name();
        if (l || r) return l && r;
      }
      return a.name() == b.name();
    }
    case Term::Kind::Lam: {
      if (!(a.annotation() == b.annotation())) return false;
      env.emplace_back(a.name(), b.name());
      bool ok = alpha_eq_in(a.body(), b.body(), env);
      env.pop_back();
      return ok;
    }
    case Term::Kind::NatLit:
      return a.nat_value() == b.nat_value();
    case Term::Kind::Box:
      if (a.grade() != b.grade()) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.children().size(); ++i)
    if (!alpha_eq_in(a.child(i), b.child(i), env)) return false;
  return true;
}
}  // namespace detail

inline std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  detail::collect_free(t, bound, out);
  return out;
}

inline bool is_closed(const Term& t) { return free_vars(t).empty(); }

inline bool alpha_eq(const Term& a, const Term& b) {
  std::vector<std::pair<std::string, std::string>> env;
  return detail::alpha_eq_in(a, b, env);
}

/// A variant of `base` not in `avoid`.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.contains(base)) return base;
  auto stem = base.substr(0, base.find('_'));
  if (stem.empty()) stem = "v";
  for (std::size_t i = 1;; ++i) {
    auto cand = stem + "_" + std::to_string(i);
    if (!avoid.contains(cand)) return cand;
  }
}

/// Capture-avoiding substitution t[x := s] for an arbitrary (possibly open) s.
inline Term substitute(const Term& t, const std::string& x, const Term& s, const std::set<std::string>& fv_s) {
  switch (t.kind()) {
    case Term::Kind::Var:
      return t.name() == x ? s : t;
    case Term::Kind::Lam: {
      if (t.name() == x) return t;  // shadowed
      if (fv_s.contains(t.name())) {
        auto avoid = fv_s;
        detail::collect_names(t.body(), avoid);
        avoid.insert(x);
        auto y = fresh_name(t.name(), avoid);
        auto renamed = substitute(t.body(), t.name(), Term::var(y), {y});
        return Term::lam(y, t.annotation(), substitute(renamed, x, s, fv_s));
      }
      return Term::lam(t.name(), t.annotation(), substitute(t.body(), x, s, fv_s));
    }
    case Term::Kind::True:
    case Term::Kind::False:
    case Term::Kind::NatLit:
      return t;
    default: {
      std::vector<Term> kids;
      kids.reserve(t.children().size());
      bool changed = false;
      for (auto& k : t.children()) {
        kids.push_back(substitute(k, x, s, fv_s));
        changed = changed || !kids.back().same_node(k);
      }
      return changed ? t.with_children(std::move(kids)) : t;
    }
  }
}

inline Term substitute(const Term& t, const std::string& x, const Term& s) { return substitute(t, x, s, free_vars(s)); }

inline Term substitute(const Term& t, const std::string& x, const Value& v) {
  return substitute(t, x, v.term(), free_vars(v.term()));
}

/// Renames every binder to a fresh name; the result is alpha-equivalent.
inline Term rename_binders(const Term& t, std::size_t& counter, const std::string& prefix = "r") {
  if (t.is(Term::Kind::Lam)) {
    auto y = prefix + std::to_string(counter++);
    auto body = substitute(t.body(), t.name(), Term::var(y), {y});
    return Term::lam(y, t.annotation(), rename_binders(body, counter, prefix));
  }
  if (t.children().empty()) return t;
  std::vector<Term> kids;
  for (auto& k : t.children()) kids.push_back(rename_binders(k, counter, prefix));
  return t.with_children(std::move(kids));
}

// ---- printing --------------------------------------------------------------

namespace detail {
inline void print_type(std::ostream& os, const Type& t, const Lattice& lat, int prec) {
  // prec: 0 = arrow position, 1 = product operand, 2 = prefix operand
  switch (t.kind()) {
    case Type::Kind::Bool:
      os << "Bool";
      return;
    case Type::Kind::Nat:
      os << "Nat";
      return;
    case Type::Kind::Box:
      if (prec > 2) os << '(';
      os << "Box[" << lat.format(t.grade()) << "] ";
      print_type(os, t.body(), lat, 2);
      if (prec > 2) os << ')';
      return;
    case Type::Kind::Prod:
      if (prec > 1) os << '(';
      print_type(os, t.left(), lat, 1);
      os << " * ";
      print_type(os, t.right(), lat, 3);  // left-associative
      if (prec > 1) os << ')';
      return;
    case Type::Kind::Arrow:
      if (prec > 0) os << '(';
      print_type(os, t.dom(), lat, 1);
      if (t.latent())
        os << " -[" << lat.format(*t.latent()) << "]-> ";
      else
        os << " -> ";
      print_type(os, t.cod(), lat, 0);
      if (prec > 0) os << ')';
      return;
  }
}

// Operands of fst/snd/box/unbox and application arguments must be atoms.
inline bool needs_parens_as_atom(const Term& t) {
  return t.is(Term::Kind::App) || t.is(Term::Kind::Lam) || t.is(Term::Kind::If);
}

inline void print_term(std::ostream& os, const Term& t, const Lattice& lat);

inline void print_atom(std::ostream& os, const Term& t, const Lattice& lat) {
  if (needs_parens_as_atom(t)) {
    os << '(';
    print_term(os, t, lat);
    os << ')';
  } else {
    print_term(os, t, lat);
  }
}

inline void print_term(std::ostream& os, const Term& t, const Lattice& lat) {
  switch (t.kind()) {
    case Term::Kind::Var:
      os << t.name();
      return;
    case Term::Kind::True:
      os << "tt";
      return;
    case Term::Kind::False:
      os << "ff";
      return;
    case Term::Kind::NatLit:
      os << t.nat_value();
      return;
    case Term::Kind::Lam:
      os << "lam " << t.name() << " : ";
      print_type(os, t.annotation(), lat, 0);
      os << " . ";
      print_term(os, t.body(), lat);
      return;
    case Term::Kind::App:
      if (t.fn().is(Term::Kind::Lam) || t.fn().is(Term::Kind::If))
        print_atom(os, t.fn(), lat);
      else
        print_term(os, t.fn(), lat);
      os << ' ';
      print_atom(os, t.arg(), lat);
      return;
    case Term::Kind::Pair:
      os << '(';
      print_term(os, t.first(), lat);
      os << ", ";
      print_term(os, t.second(), lat);
      os << ')';
      return;
    case Term::Kind::Fst:
    case Term::Kind::Snd:
      os << (t.is(Term::Kind::Fst) ? "fst " : "snd ");
      print_atom(os, t.operand(), lat);
      return;
    case Term::Kind::If:
      os << "if ";
      print_term(os, t.cond(), lat);
      os << " then ";
      print_term(os, t.then_branch(), lat);
      os << " else ";
      print_term(os, t.else_branch(), lat);
      return;
    case Term::Kind::Box:
      os << "box[" << lat.format(t.grade()) << "] ";
      print_atom(os, t.operand(), lat);
      return;
    case Term::Kind::Unbox:
      os << "unbox ";
      print_atom(os, t.operand(), lat);
      return;
  }
}
}  // namespace detail

inline std::string format(const Type& t, const Lattice& lat) {
  std::ostringstream os;
  detail::print_type(os, t, lat, 0);
  return os.str();
}

inline std::string format(const Term& t, const Lattice& lat) {
  std::ostringstream os;
  detail::print_term(os, t, lat);
  return os.str();
}

inline std::string format(const Value& v, const Lattice& lat) { return format(v.term(), lat); }

}  // namespace costlam

#endif  // COSTLAM_SYNTAX_HPP
