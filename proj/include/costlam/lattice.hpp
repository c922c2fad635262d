#ifndef COSTLAM_LATTICE_HPP
#define COSTLAM_LATTICE_HPP

// Resource lattices (L, <=, combine, join, bottom) and their law checker.
//
// A Lattice is a cheap, immutable handle. Elements are plain values that
// remember which instance produced them; every operation rejects elements of
// a foreign instance.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace costlam {

class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an element is used with a lattice instance other than its own.
class LatticeMismatch : public LatticeError {
 public:
  using LatticeError::LatticeError;
};

namespace detail {

// Process-wide interning of instance descriptors, so that two handles built
// from the same description (e.g. two parses of "nat") share an id.
class InstanceRegistry {
 public:
  static InstanceRegistry& get() {
    static InstanceRegistry registry;
    return registry;
  }

  std::uint32_t intern(const std::string& descriptor, const std::string& display) {
    std::lock_guard lock(mutex_);
    if (auto it = ids_.find(descriptor); it != ids_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(names_.size() + 1);
    ids_.emplace(descriptor, id);
    names_.push_back(display);
    return id;
  }

  std::string name(std::uint32_t id) const {
    std::lock_guard lock(mutex_);
    if (id == 0 || id > names_.size()) return "<no instance>";
    return names_[id - 1];
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
};

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits "a, (b, c), d" at top-level commas.
inline std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.push_back(trim(s.substr(start)));
  return parts;
}

inline std::optional<std::uint64_t> parse_natural(std::string_view s) {
  if (s.empty() || s.size() > 19) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw LatticeError("natural-number resource overflow");
  return r;
}

}  // namespace detail

/// An element of some lattice instance. Equality is structural and includes
/// the owning instance.
class Element {
 public:
  Element() = default;

  std::uint32_t instance() const { return instance_; }
  std::span<const std::uint64_t> coords() const { return coords_; }
  bool empty() const { return instance_ == 0; }

  friend bool operator==(const Element&, const Element&) = default;
  friend auto operator<=>(const Element&, const Element&) = default;

 private:
  friend class Lattice;
  Element(std::uint32_t inst, std::vector<std::uint64_t> c) : instance_(inst), coords_(std::move(c)) {}

  std::uint32_t instance_ = 0;
  std::vector<std::uint64_t> coords_;
};

/// Explicit operation tables for a finite lattice. Indices refer to `elements`.
struct FiniteTable {
  std::string name;
  std::vector<std::string> elements;
  std::size_t bottom = 0;
  std::vector<char> leq;                 // n*n, leq[a*n+b] != 0 iff a <= b
  std::vector<std::size_t> combine;      // n*n
  std::vector<std::size_t> join;         // n*n

  std::size_t size() const { return elements.size(); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < elements.size(); ++i)
      if (elements[i] == name) return i;
    return std::nullopt;
  }

  std::string descriptor() const {
    std::ostringstream os;
    os << "finite:" << name << ":";
    for (auto& e : elements) os << e << ' ';
    os << '|' << bottom << '|';
    for (char c : leq) os << (c ? '1' : '0');
    os << '|';
    for (auto c : combine) os << c << ',';
    os << '|';
    for (auto j : join) os << j << ',';
    return os.str();
  }
};

class Lattice {
 public:
  enum class Kind { Nat, Gas, Saturating, Triple, Finite, Product };

  static Lattice nat() { return Lattice(make_impl(Kind::Nat, "nat", "nat")); }
  static Lattice gas() { return Lattice(make_impl(Kind::Gas, "gas", "gas")); }
  static Lattice triple() { return Lattice(make_impl(Kind::Triple, "triple", "triple")); }

  static Lattice saturating(std::uint64_t cap) {
    auto name = "sat(" + std::to_string(cap) + ")";
    auto impl = make_impl(Kind::Saturating, name, name);
    impl->cap = cap;
    return Lattice(std::move(impl));
  }

  /// Builds a finite instance. Only shape and totality are validated here;
  /// algebraic laws are the business of check_laws.
  static Lattice finite(FiniteTable table) {
    const std::size_t n = table.size();
    if (n == 0) throw LatticeError("finite lattice '" + table.name + "' has no elements");
    if (table.bottom >= n) throw LatticeError("finite lattice '" + table.name + "': bottom out of range");
    if (table.leq.size() != n * n || table.combine.size() != n * n || table.join.size() != n * n)
      throw LatticeError("finite lattice '" + table.name + "': tables must be " + std::to_string(n) + "x" +
                         std::to_string(n));
    for (auto c : table.combine)
      if (c >= n) throw LatticeError("finite lattice '" + table.name + "': combine result out of range");
    for (auto j : table.join)
      if (j >= n) throw LatticeError("finite lattice '" + table.name + "': join result out of range");
    auto display = table.name;
    auto impl = make_impl(Kind::Finite, table.descriptor(), display);
    impl->table = std::make_shared<const FiniteTable>(std::move(table));
    return Lattice(std::move(impl));
  }

  static Lattice product(std::vector<Lattice> parts) {
    if (parts.size() < 2) throw LatticeError("a product lattice needs at least two components");
    std::string descriptor = "prod(", display = "prod(";
    std::size_t width = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      descriptor += (i ? "," : "") + parts[i].impl_->descriptor;
      display += (i ? "," : "") + parts[i].name();
      width += parts[i].width();
    }
    descriptor += ")";
    display += ")";
    auto impl = make_impl(Kind::Product, descriptor, display);
    impl->parts = std::move(parts);
    impl->width = width;
    return Lattice(std::move(impl));
  }

  Kind kind() const { return impl_->kind; }
  const std::string& name() const { return impl_->display; }
  std::uint32_t id() const { return impl_->id; }
  std::size_t width() const { return impl_->width; }
  std::uint64_t cap() const { return impl_->cap; }
  const FiniteTable* table() const { return impl_->table.get(); }
  std::span<const Lattice> components() const { return impl_->parts; }

  friend bool operator==(const Lattice& a, const Lattice& b) { return a.id() == b.id(); }

  // ---- element construction ------------------------------------------------

  Element natural(std::uint64_t n) const {
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
        return make({n});
      case Kind::Saturating:
        if (n > cap()) throw LatticeError(std::to_string(n) + " exceeds the cap of " + name());
        return make({n});
      default:
        throw LatticeError("lattice " + name() + " has no natural-number elements");
    }
  }

  Element triple_of(std::uint64_t t, std::uint64_t m, std::uint64_t d) const {
    if (kind() != Kind::Triple) throw LatticeError("lattice " + name() + " has no triple elements");
    return make({t, m, d});
  }

  Element finite_element(std::string_view label) const {
    if (kind() != Kind::Finite) throw LatticeError("lattice " + name() + " has no named elements");
    auto idx = table()->index_of(label);
    if (!idx) throw LatticeError("unknown element '" + std::string(label) + "' of lattice " + name());
    return make({*idx});
  }

  Element tuple(std::span<const Element> parts) const {
    if (kind() != Kind::Product || parts.size() != components().size())
      throw LatticeError("tuple does not match the shape of lattice " + name());
    std::vector<std::uint64_t> c;
    c.reserve(width());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      components()[i].require(parts[i]);
      c.insert(c.end(), parts[i].coords().begin(), parts[i].coords().end());
    }
    return make(std::move(c));
  }

  /// Splits a product element into its components.
  std::vector<Element> split(const Element& e) const {
    require(e);
    if (kind() != Kind::Product) throw LatticeError("lattice " + name() + " is not a product");
    std::vector<Element> out;
    std::size_t off = 0;
    for (auto& part : components()) {
      auto c = e.coords().subspan(off, part.width());
      out.push_back(part.make({c.begin(), c.end()}));
      off += part.width();
    }
    return out;
  }

  bool contains(const Element& e) const {
    if (e.instance() != id() || e.coords().size() != width()) return false;
    return raw_contains(e.coords());
  }

  // ---- the structure -------------------------------------------------------

  bool leq(const Element& a, const Element& b) const {
    require(a);
    require(b);
    return raw_leq(a.coords(), b.coords());
  }

  Element combine(const Element& a, const Element& b) const {
    require(a);
    require(b);
    std::vector<std::uint64_t> out(width());
    raw_combine(a.coords(), b.coords(), out.data());
    return make(std::move(out));
  }

  Element join(const Element& a, const Element& b) const {
    require(a);
    require(b);
    std::vector<std::uint64_t> out(width());
    raw_join(a.coords(), b.coords(), out.data());
    return make(std::move(out));
  }

  Element bottom() const {
    std::vector<std::uint64_t> out(width());
    raw_bottom(out.data());
    return make(std::move(out));
  }

  /// Smallest nonzero step where one exists; used as the default delta for
  /// every primitive operation.
  Element unit_step() const {
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
        return make({1});
      case Kind::Saturating:
        return make({std::min<std::uint64_t>(1, cap())});
      case Kind::Triple:
        return make({1, 0, 0});
      case Kind::Finite: {
        // First atom in declaration order: a non-bottom element with nothing
        // strictly between it and bottom.
        const auto& t = *table();
        const std::size_t n = t.size();
        for (std::size_t a = 0; a < n; ++a) {
          if (a == t.bottom) continue;
          bool atom = true;
          for (std::size_t c = 0; c < n && atom; ++c)
            if (c != a && c != t.bottom && t.leq[c * n + a]) atom = false;
          if (atom) return make({a});
        }
        return bottom();
      }
      case Kind::Product: {
        std::vector<Element> parts;
        for (auto& p : components()) parts.push_back(p.unit_step());
        return tuple(parts);
      }
    }
    return bottom();
  }

  /// A designated large element used as the default budget.
  Element large() const {
    constexpr std::uint64_t big = 1'000'000;
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
        return make({big});
      case Kind::Saturating:
        return make({cap()});
      case Kind::Triple:
        return make({big, big, big});
      case Kind::Finite: {
        auto all = elements();
        Element top = bottom();
        for (auto& e : all) top = join(top, e);
        return top;
      }
      case Kind::Product: {
        std::vector<Element> parts;
        for (auto& p : components()) parts.push_back(p.large());
        return tuple(parts);
      }
    }
    return bottom();
  }

  bool is_finite() const {
    switch (kind()) {
      case Kind::Saturating:
      case Kind::Finite:
        return true;
      case Kind::Product:
        return std::all_of(components().begin(), components().end(), [](auto& p) { return p.is_finite(); });
      default:
        return false;
    }
  }

  /// All elements of a finite instance, in a fixed order.
  std::vector<Element> elements() const {
    if (!is_finite()) throw LatticeError("lattice " + name() + " is infinite");
    std::vector<std::vector<std::uint64_t>> rows;
    raw_enumerate(rows);
    std::vector<Element> out;
    out.reserve(rows.size());
    for (auto& r : rows) out.push_back(make(std::move(r)));
    return out;
  }

  // ---- literals ------------------------------------------------------------

  std::string format(const Element& e) const {
    require(e);
    std::ostringstream os;
    raw_format(e.coords(), os);
    return os.str();
  }

  Element parse_literal(std::string_view text) const {
    auto lit = detail::trim(text);
    std::vector<std::uint64_t> out;
    raw_parse(lit, out);
    return make(std::move(out));
  }

  void require(const Element& e) const {
    if (e.instance() != id())
      throw LatticeMismatch("element of lattice '" + detail::InstanceRegistry::get().name(e.instance()) +
                            "' used with lattice '" + name() + "'");
  }

 private:
  struct Impl {
    Kind kind;
    std::string descriptor;
    std::string display;
    std::uint32_t id = 0;
    std::uint64_t cap = 0;
    std::size_t width = 1;
    std::shared_ptr<const FiniteTable> table;
    std::vector<Lattice> parts;
  };

  static std::shared_ptr<Impl> make_impl(Kind k, std::string descriptor, std::string display) {
    auto impl = std::make_shared<Impl>();
    impl->kind = k;
    impl->descriptor = std::move(descriptor);
    impl->display = std::move(display);
    impl->width = (k == Kind::Triple) ? 3 : 1;
    return impl;
  }

  explicit Lattice(std::shared_ptr<Impl> impl) {
    impl->id = detail::InstanceRegistry::get().intern(impl->descriptor, impl->display);
    impl_ = std::move(impl);
  }

  Element make(std::vector<std::uint64_t> c) const { return Element(id(), std::move(c)); }

  using Span = std::span<const std::uint64_t>;

  bool raw_contains(Span a) const {
    switch (kind()) {
      case Kind::Saturating:
        return a[0] <= cap();
      case Kind::Finite:
        return a[0] < table()->size();
      case Kind::Product: {
        std::size_t off = 0;
        for (auto& p : components()) {
          if (!p.raw_contains(a.subspan(off, p.width()))) return false;
          off += p.width();
        }
        return true;
      }
      default:
        return true;
    }
  }

  bool raw_leq(Span a, Span b) const {
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
      case Kind::Saturating:
        return a[0] <= b[0];
      case Kind::Triple:
        return a[0] <= b[0] && a[1] <= b[1] && a[2] <= b[2];
      case Kind::Finite:
        return table()->leq[a[0] * table()->size() + b[0]] != 0;
      case Kind::Product: {
        std::size_t off = 0;
        for (auto& p : components()) {
          if (!p.raw_leq(a.subspan(off, p.width()), b.subspan(off, p.width()))) return false;
          off += p.width();
        }
        return true;
      }
    }
    return false;
  }

  void raw_combine(Span a, Span b, std::uint64_t* out) const {
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
        out[0] = detail::checked_add(a[0], b[0]);
        return;
      case Kind::Saturating:
        out[0] = std::min(detail::checked_add(a[0], b[0]), cap());
        return;
      case Kind::Triple:
        for (int i = 0; i < 3; ++i) out[i] = detail::checked_add(a[i], b[i]);
        return;
      case Kind::Finite:
        out[0] = table()->combine[a[0] * table()->size() + b[0]];
        return;
      case Kind::Product: {
        std::size_t off = 0;
        for (auto& p : components()) {
          p.raw_combine(a.subspan(off, p.width()), b.subspan(off, p.width()), out + off);
          off += p.width();
        }
        return;
      }
    }
  }

  void raw_join(Span a, Span b, std::uint64_t* out) const {
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
      case Kind::Saturating:
        out[0] = std::max(a[0], b[0]);
        return;
      case Kind::Triple:
        for (int i = 0; i < 3; ++i) out[i] = std::max(a[i], b[i]);
        return;
      case Kind::Finite:
        out[0] = table()->join[a[0] * table()->size() + b[0]];
        return;
      case Kind::Product: {
        std::size_t off = 0;
        for (auto& p : components()) {
          p.raw_join(a.subspan(off, p.width()), b.subspan(off, p.width()), out + off);
          off += p.width();
        }
        return;
      }
    }
  }

  void raw_bottom(std::uint64_t* out) const {
    switch (kind()) {
      case Kind::Finite:
        out[0] = table()->bottom;
        return;
      case Kind::Product: {
        std::size_t off = 0;
        for (auto& p : components()) {
          p.raw_bottom(out + off);
          off += p.width();
        }
        return;
      }
      default:
        std::fill(out, out + width(), 0);
    }
  }

  void raw_enumerate(std::vector<std::vector<std::uint64_t>>& rows) const {
    switch (kind()) {
      case Kind::Saturating:
        for (std::uint64_t i = 0; i <= cap(); ++i) rows.push_back({i});
        return;
      case Kind::Finite:
        for (std::uint64_t i = 0; i < table()->size(); ++i) rows.push_back({i});
        return;
      case Kind::Product: {
        rows.push_back({});
        for (auto& p : components()) {
          std::vector<std::vector<std::uint64_t>> sub, next;
          p.raw_enumerate(sub);
          for (auto& prefix : rows)
            for (auto& s : sub) {
              auto r = prefix;
              r.insert(r.end(), s.begin(), s.end());
              next.push_back(std::move(r));
            }
          rows = std::move(next);
        }
        return;
      }
      default:
        throw LatticeError("lattice " + name() + " is infinite");
    }
  }

  void raw_format(Span a, std::ostream& os) const {
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
      case Kind::Saturating:
        os << a[0];
        return;
      case Kind::Triple:
        os << '(' << a[0] << ',' << a[1] << ',' << a[2] << ')';
        return;
      case Kind::Finite:
        os << table()->elements[a[0]];
        return;
      case Kind::Product: {
        os << '(';
        std::size_t off = 0;
        for (std::size_t i = 0; i < components().size(); ++i) {
          auto& p = components()[i];
          if (i) os << ',';
          p.raw_format(a.subspan(off, p.width()), os);
          off += p.width();
        }
        os << ')';
        return;
      }
    }
  }

  void raw_parse(const std::string& lit, std::vector<std::uint64_t>& out) const {
    auto fail = [&] { throw LatticeError("unknown literal '" + lit + "' for lattice " + name()); };
    auto unparen = [&](const std::string& s) -> std::vector<std::string> {
      if (s.size() < 2 || s.front() != '(' || s.back() != ')') fail();
      return detail::split_top_level(std::string_view(s).substr(1, s.size() - 2));
    };
    switch (kind()) {
      case Kind::Nat:
      case Kind::Gas:
      case Kind::Saturating: {
        auto n = detail::parse_natural(lit);
        if (!n) fail();
        if (kind() == Kind::Saturating && *n > cap()) fail();
        out.push_back(*n);
        return;
      }
      case Kind::Triple: {
        auto parts = unparen(lit);
        if (parts.size() != 3) fail();
        for (auto& p : parts) {
          auto n = detail::parse_natural(p);
          if (!n) fail();
          out.push_back(*n);
        }
        return;
      }
      case Kind::Finite: {
        auto idx = table()->index_of(lit);
        if (!idx) fail();
        out.push_back(*idx);
        return;
      }
      case Kind::Product: {
        auto parts = unparen(lit);
        if (parts.size() != components().size()) fail();
        for (std::size_t i = 0; i < parts.size(); ++i) components()[i].raw_parse(parts[i], out);
        return;
      }
    }
  }

  std::shared_ptr<const Impl> impl_;
};

// ---- builtin instances and table files -------------------------------------

/// The two-element chain {bot, top} with combine = join = max.
inline Lattice chain2() {
  FiniteTable t;
  t.name = "chain2";
  t.elements = {"bot", "top"};
  t.bottom = 0;
  t.leq = {1, 1, 0, 1};
  t.combine = {0, 1, 1, 1};
  t.join = {0, 1, 1, 1};
  return Lattice::finite(std::move(t));
}

/// Parses a finite table in the plain-text lattice format:
///
///     name: diamond            # optional
///     elements: bot a b top
///     bottom: bot
///     leq:
///       bot a
///       a top
///     combine:
///       a b -> top
///     join:                    # optional; derived from leq when absent
///       a b -> top
///
/// `leq` lists pairs a <= b; reflexive pairs are implied. A table entry given
/// for only one of (a, b) / (b, a) is mirrored. Both tables must end up total.
inline Lattice parse_lattice_table(std::string_view text, std::string default_name = "finite") {
  FiniteTable t;
  t.name = std::move(default_name);
  std::optional<std::string> bottom_name;
  std::vector<std::pair<std::string, std::string>> leq_pairs;
  std::map<std::pair<std::string, std::string>, std::string> combine_entries, join_entries;
  bool have_join = false;
  std::string section;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw LatticeError("lattice table line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto line = detail::trim(raw);
    if (line.empty()) continue;
    std::string rest = line;
    if (auto colon = line.find(':'); colon != std::string::npos) {
      auto key = detail::trim(std::string_view(line).substr(0, colon));
      if (key == "name" || key == "elements" || key == "bottom" || key == "leq" || key == "combine" ||
          key == "join") {
        section = key;
        rest = detail::trim(std::string_view(line).substr(colon + 1));
        if (section == "join") have_join = true;
        if (rest.empty()) continue;
      }
    }
    std::istringstream words(rest);
    std::vector<std::string> toks;
    for (std::string w; words >> w;) toks.push_back(w);
    if (section == "name") {
      t.name = rest;
    } else if (section == "elements") {
      for (auto& w : toks) t.elements.push_back(w);
    } else if (section == "bottom") {
      if (toks.size() != 1) fail("bottom takes exactly one element");
      bottom_name = toks[0];
    } else if (section == "leq") {
      if (toks.size() != 2) fail("leq entries are 'a b' pairs");
      leq_pairs.emplace_back(toks[0], toks[1]);
    } else if (section == "combine" || section == "join") {
      if (toks.size() != 4 || toks[2] != "->") fail("table entries are 'a b -> c'");
      auto& entries = (section == "combine") ? combine_entries : join_entries;
      auto [it, fresh] = entries.emplace(std::pair{toks[0], toks[1]}, toks[3]);
      if (!fresh && it->second != toks[3]) fail("conflicting entries for " + toks[0] + " " + toks[1]);
    } else {
      fail("entry outside of any section");
    }
  }

  const std::size_t n = t.elements.size();
  if (n == 0) throw LatticeError("lattice table declares no elements");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (t.elements[i] == t.elements[j]) throw LatticeError("duplicate element '" + t.elements[i] + "'");
  auto index = [&](const std::string& name) {
    auto idx = t.index_of(name);
    if (!idx) throw LatticeError("lattice table refers to undeclared element '" + name + "'");
    return *idx;
  };
  if (!bottom_name) throw LatticeError("lattice table has no bottom");
  t.bottom = index(*bottom_name);

  t.leq.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) t.leq[i * n + i] = 1;
  for (auto& [a, b] : leq_pairs) t.leq[index(a) * n + index(b)] = 1;

  auto fill = [&](const std::map<std::pair<std::string, std::string>, std::string>& entries,
                  const char* what) {
    std::vector<std::optional<std::size_t>> cells(n * n);
    for (auto& [key, value] : entries) cells[index(key.first) * n + index(key.second)] = index(value);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (!cells[a * n + b] && cells[b * n + a]) cells[a * n + b] = cells[b * n + a];
    std::vector<std::size_t> out(n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (!cells[a * n + b]) {
          std::string msg = std::string(what) + " table is not total: missing " + t.elements[a] + " " +
                            t.elements[b];
          if (std::string_view(what) == "join") msg = "not a join-semilattice: " + msg;
          throw LatticeError(msg);
        }
        out[a * n + b] = *cells[a * n + b];
      }
    return out;
  };
  t.combine = fill(combine_entries, "combine");

  if (have_join) {
    t.join = fill(join_entries, "join");
  } else {
    t.join.assign(n * n, 0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        std::optional<std::size_t> lub;
        for (std::size_t c = 0; c < n; ++c) {
          if (!t.leq[a * n + c] || !t.leq[b * n + c]) continue;
          bool least = true;
          for (std::size_t d = 0; d < n && least; ++d)
            if (t.leq[a * n + d] && t.leq[b * n + d] && !t.leq[c * n + d]) least = false;
          if (least) {
            lub = c;
            break;
          }
        }
        if (!lub)
          throw LatticeError("not a join-semilattice: " + t.elements[a] + " and " + t.elements[b] +
                             " have no least upper bound");
        t.join[a * n + b] = *lub;
      }
  }
  return Lattice::finite(std::move(t));
}

inline Lattice load_lattice_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LatticeError("cannot open lattice file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto stem = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem.erase(dot);
  return parse_lattice_table(buf.str(), stem);
}

/// Resolves a builtin lattice name: nat, gas, triple, chain2, sat(N), or
/// prod(L1, L2, ...).
inline Lattice parse_lattice_spec(std::string_view spec) {
  auto s = detail::trim(spec);
  if (s == "nat") return Lattice::nat();
  if (s == "gas") return Lattice::gas();
  if (s == "triple") return Lattice::triple();
  if (s == "chain2") return chain2();
  auto inner = [&](std::string_view head) -> std::optional<std::string> {
    if (s.size() > head.size() + 1 && s.starts_with(head) && s[head.size()] == '(' && s.back() == ')')
      return s.substr(head.size() + 1, s.size() - head.size() - 2);
    return std::nullopt;
  };
  if (auto arg = inner("sat")) {
    auto cap = detail::parse_natural(detail::trim(*arg));
    if (!cap) throw LatticeError("bad saturation cap in '" + s + "'");
    return Lattice::saturating(*cap);
  }
  if (auto arg = inner("prod")) {
    std::vector<Lattice> parts;
    for (auto& p : detail::split_top_level(*arg)) parts.push_back(parse_lattice_spec(p));
    return Lattice::product(std::move(parts));
  }
  throw LatticeError("unknown lattice '" + s + "'");
}

// ---- law checking ----------------------------------------------------------

struct LawResult {
  std::string law;
  bool passed = true;
  std::size_t checked = 0;
  std::vector<Element> witness;  // counterexample, when !passed
};

struct LawReport {
  std::string lattice;
  std::size_t sample_size = 0;
  std::vector<LawResult> laws;

  bool passed() const {
    return std::all_of(laws.begin(), laws.end(), [](const LawResult& l) { return l.passed; });
  }
  const LawResult* find(std::string_view law) const {
    for (auto& l : laws)
      if (l.law == law) return &l;
    return nullptr;
  }
};

/// Checks every resource-lattice axiom over `sample` (all elements of a
/// finite instance when `sample` is empty). Failures carry the first
/// counterexample found.
inline LawReport check_laws(const Lattice& lat, std::vector<Element> sample = {}) {
  if (sample.empty()) {
    if (!lat.is_finite()) throw LatticeError("check_laws needs a sample for infinite lattice " + lat.name());
    sample = lat.elements();
  }
  for (auto& e : sample) lat.require(e);

  LawReport report;
  report.lattice = lat.name();
  report.sample_size = sample.size();
  const auto& S = sample;
  const Element bot = lat.bottom();

  auto law = [&](std::string name, auto&& body) {
    LawResult r;
    r.law = std::move(name);
    body(r);
    report.laws.push_back(std::move(r));
  };
  auto fail = [](LawResult& r, std::initializer_list<Element> w) {
    if (r.passed) {
      r.passed = false;
      r.witness.assign(w.begin(), w.end());
    }
  };

  // Results of combine/join must stay inside the instance.
  law("closure", [&](LawResult& r) {
    for (auto& a : S)
      for (auto& b : S) {
        ++r.checked;
        if (!lat.contains(lat.combine(a, b)) || !lat.contains(lat.join(a, b))) fail(r, {a, b});
      }
  });
  law("leq-reflexive", [&](LawResult& r) {
    for (auto& a : S) {
      ++r.checked;
      if (!lat.leq(a, a)) fail(r, {a});
    }
  });
  law("leq-antisymmetric", [&](LawResult& r) {
    for (auto& a : S)
      for (auto& b : S) {
        ++r.checked;
        if (a != b && lat.leq(a, b) && lat.leq(b, a)) fail(r, {a, b});
      }
  });
  law("leq-transitive", [&](LawResult& r) {
    for (auto& a : S)
      for (auto& b : S) {
        if (!lat.leq(a, b)) continue;
        for (auto& c : S) {
          ++r.checked;
          if (lat.leq(b, c) && !lat.leq(a, c)) fail(r, {a, b, c});
        }
      }
  });
  law("bottom-least", [&](LawResult& r) {
    for (auto& a : S) {
      ++r.checked;
      if (!lat.leq(bot, a)) fail(r, {a});
    }
  });
  law("combine-identity", [&](LawResult& r) {
    for (auto& a : S) {
      ++r.checked;
      if (lat.combine(a, bot) != a || lat.combine(bot, a) != a) fail(r, {a});
    }
  });
  law("combine-commutative", [&](LawResult& r) {
    for (auto& a : S)
      for (auto& b : S) {
        ++r.checked;
        if (lat.combine(a, b) != lat.combine(b, a)) fail(r, {a, b});
      }
  });
  law("combine-associative", [&](LawResult& r) {
    for (auto& a : S)
      for (auto& b : S) {
        auto ab = lat.combine(a, b);
        for (auto& c : S) {
          ++r.checked;
          if (lat.combine(ab, c) != lat.combine(a, lat.combine(b, c))) fail(r, {a, b, c});
        }
      }
  });
  law("combine-monotone", [&](LawResult& r) {
    std::vector<std::pair<std::size_t, std::size_t>> below;
    for (std::size_t i = 0; i < S.size(); ++i)
      for (std::size_t j = 0; j < S.size(); ++j)
        if (lat.leq(S[i], S[j])) below.emplace_back(i, j);
    for (auto [a, a2] : below)
      for (auto [b, b2] : below) {
        ++r.checked;
        if (!lat.leq(lat.combine(S[a], S[b]), lat.combine(S[a2], S[b2]))) fail(r, {S[a], S[a2], S[b], S[b2]});
      }
  });
  law("join-upper-bound", [&](LawResult& r) {
    for (auto& a : S)
      for (auto& b : S) {
        ++r.checked;
        auto j = lat.join(a, b);
        if (!lat.leq(a, j) || !lat.leq(b, j)) fail(r, {a, b});
      }
  });
  law("join-least", [&](LawResult& r) {
    for (auto& a : S)
      for (auto& b : S) {
        auto j = lat.join(a, b);
        for (auto& c : S) {
          ++r.checked;
          if (lat.leq(a, c) && lat.leq(b, c) && !lat.leq(j, c)) fail(r, {a, b, c});
        }
      }
  });
  return report;
}

/// Law-checking sample for `lo..hi`. Scalar lattices take every value in
/// range (clamped to a saturation cap); triples take the grid over
/// {lo, lo+1, mid, hi-1, hi} per coordinate; products take the product of
/// the first, middle and last element of each component sample; finite
/// lattices take all elements.
inline std::vector<Element> sample_range(const Lattice& lat, std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) throw LatticeError("empty sample range");
  std::vector<Element> out;
  auto keep = [&](Element e) {
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(std::move(e));
  };
  std::set<std::uint64_t> grid{lo, lo + (hi - lo) / 2, hi};
  if (hi > lo) grid.insert({lo + 1, hi - 1});
  switch (lat.kind()) {
    case Lattice::Kind::Nat:
    case Lattice::Kind::Gas:
    case Lattice::Kind::Saturating:
      for (auto i = lo; i <= hi; ++i) keep(lat.natural(lat.kind() == Lattice::Kind::Saturating ? std::min(i, lat.cap()) : i));
      break;
    case Lattice::Kind::Triple:
      for (auto a : grid)
        for (auto b : grid)
          for (auto c : grid) keep(lat.triple_of(a, b, c));
      break;
    case Lattice::Kind::Finite:
      return lat.elements();
    case Lattice::Kind::Product: {
      std::vector<std::vector<Element>> parts;
      for (auto& c : lat.components()) {
        auto sub = sample_range(c, lo, hi);
        if (sub.size() > 3) sub = {sub.front(), sub[sub.size() / 2], sub.back()};
        parts.push_back(std::move(sub));
      }
      std::vector<Element> cur;
      auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == parts.size()) {
          keep(lat.tuple(cur));
          return;
        }
        for (auto& e : parts[i]) {
          cur.push_back(e);
          self(self, i + 1);
          cur.pop_back();
        }
      };
      rec(rec, 0);
      break;
    }
  }
  return out;
}

}  // namespace costlam

template <>
struct std::hash<costlam::Element> {
  std::size_t operator()(const costlam::Element& e) const noexcept {
    std::size_t h = e.instance();
    for (auto c : e.coords()) h = h * 1000003u ^ std::hash<std::uint64_t>{}(c);
    return h;
  }
};

#endif  // COSTLAM_LATTICE_HPP
