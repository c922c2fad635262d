#ifndef COSTLAM_PARSE_HPP
#define COSTLAM_PARSE_HPP

// Recursive-descent parser for the surface syntax:
//
//   term   := lam | app
//   lam    := "lam" ident ":" type "." term
//   app    := atom { atom }
//   atom   := "tt" | "ff" | natural | ident
//           | "(" term "," term ")" | "(" term ")"
//           | "fst" atom | "snd" atom
//           | "if" term "then" term "else" term
//           | "box" "[" lit "]" atom | "unbox" atom
//   type   := ptype [ ("->" | "-[" lit "]->") type ]
//   ptype  := prefix { "*" prefix }
//   prefix := "Bool" | "Nat" | "Box" "[" lit "]" prefix | "(" type ")"
//
// `#` starts a line comment. Lattice literals are handed to the lattice.

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

#include "costlam/lattice.hpp"
#include "costlam/syntax.hpp"

namespace costlam {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

inline bool is_keyword(std::string_view w) {
  return w == "lam" || w == "if" || w == "then" || w == "else" || w == "tt" || w == "ff" || w == "fst" ||
         w == "snd" || w == "box" || w == "unbox" || w == "Bool" || w == "Nat" || w == "Box";
}

class Parser {
 public:
  Parser(std::string_view src, const Lattice& lat) : src_(src), lat_(lat) {}

  Term parse_program() {
    auto t = parse_term();
    skip_space();
    if (!at_end()) error("unexpected input after term");
    return t;
  }

  Type parse_type_only() {
    auto t = parse_type();
    skip_space();
    if (!at_end()) error("unexpected input after type");
    return t;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end()) {
      if (peek() == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(peek()))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  // Next word without consuming it (empty when not at a word).
  std::string_view peek_word() {
    skip_space();
    if (!ident_start(peek())) return {};
    std::size_t end = pos_;
    while (end < src_.size() && ident_char(src_[end])) ++end;
    return src_.substr(pos_, end - pos_);
  }

  std::string take_word() {
    auto w = peek_word();
    std::string out(w);
    for (std::size_t i = 0; i < w.size(); ++i) advance();
    return out;
  }

  bool try_word(std::string_view w) {
    if (peek_word() == w) {
      take_word();
      return true;
    }
    return false;
  }

  void expect_word(std::string_view w) {
    if (!try_word(w)) error("expected '" + std::string(w) + "'");
  }

  bool try_punct(std::string_view p) {
    skip_space();
    if (src_.substr(pos_).starts_with(p)) {
      for (std::size_t i = 0; i < p.size(); ++i) advance();
      return true;
    }
    return false;
  }

  void expect_punct(std::string_view p) {
    if (!try_punct(p)) error("expected '" + std::string(p) + "'");
  }

  // Raw literal text up to the matching ']' (which is consumed).
  Element parse_literal() {
    skip_space();
    int l = line_, c = col_;
    std::size_t start = pos_;
    int depth = 0;
    while (!at_end()) {
      char ch = peek();
      if (ch == '(' || ch == '[') ++depth;
      if (ch == ')') --depth;
      if (ch == ']') {
        if (depth == 0) break;
        --depth;
      }
      advance();
    }
    if (at_end()) error("unterminated lattice literal");
    auto text = src_.substr(start, pos_ - start);
    advance();  // ']'
    try {
      return lat_.parse_literal(text);
    } catch (const LatticeError& e) {
      throw ParseError(e.what(), l, c);
    }
  }

  std::string parse_ident() {
    auto w = peek_word();
    if (w.empty()) error("expected an identifier");
    if (is_keyword(w)) error("keyword '" + std::string(w) + "' cannot be used as an identifier");
    return take_word();
  }

  // ---- types ----

  Type parse_type() {
    auto left = parse_ptype();
    skip_space();
    if (try_punct("->")) return Type::arrow(left, parse_type());
    if (try_punct("-[")) {
      auto latent = parse_literal();
      expect_punct("->");
      return Type::arrow(left, parse_type(), latent);
    }
    return left;
  }

  Type parse_ptype() {
    auto t = parse_prefix();
    while (try_punct("*")) t = Type::prod(t, parse_prefix());
    return t;
  }

  Type parse_prefix() {
    if (try_word("Bool")) return Type::boolean();
    if (try_word("Nat")) return Type::nat();
    if (try_word("Box")) {
      expect_punct("[");
      auto g = parse_literal();
      return Type::box(g, parse_prefix());
    }
    if (try_punct("(")) {
      auto t = parse_type();
      expect_punct(")");
      return t;
    }
    error("expected a type");
  }

  // ---- terms ----

  Term parse_term() {
    if (try_word("lam")) {
      auto x = parse_ident();
      expect_punct(":");
      auto a = parse_type();
      expect_punct(".");
      return Term::lam(x, a, parse_term());
    }
    auto t = parse_atom();
    while (starts_atom()) t = Term::app(t, parse_atom());
    return t;
  }

  bool starts_atom() {
    skip_space();
    if (at_end()) return false;
    char c = peek();
    if (c == '(' || std::isdigit(static_cast<unsigned char>(c))) return true;
    auto w = peek_word();
    if (w.empty()) return false;
    return w != "then" && w != "else" && w != "lam";
  }

  Term parse_atom() {
    skip_space();
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      std::size_t start = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      auto n = parse_natural(src_.substr(start, pos_ - start));
      if (!n) error("natural literal out of range");
      return Term::natural(*n);
    }
    if (try_punct("(")) {
      auto a = parse_term();
      if (try_punct(",")) {
        auto b = parse_term();
        expect_punct(")");
        return Term::pair(a, b);
      }
      expect_punct(")");
      return a;
    }
    auto w = peek_word();
    if (w.empty()) error(at_end() ? "unexpected end of input" : "unexpected character '" + std::string(1, peek()) + "'");
    if (w == "tt") return take_word(), Term::tt();
    if (w == "ff") return take_word(), Term::ff();
    if (w == "fst") return take_word(), Term::fst(parse_atom());
    if (w == "snd") return take_word(), Term::snd(parse_atom());
    if (w == "unbox") return take_word(), Term::unbox(parse_atom());
    if (w == "box") {
      take_word();
      expect_punct("[");
      auto g = parse_literal();
      return Term::box(g, parse_atom());
    }
    if (w == "if") {
      take_word();
      auto c = parse_term();
      expect_word("then");
      auto t = parse_term();
      expect_word("else");
      auto e = parse_term();
      return Term::ite(c, t, e);
    }
    if (w == "lam") error("a lambda in argument position must be parenthesized");
    return Term::var(parse_ident());
  }

  std::string_view src_;
  const Lattice& lat_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace detail

inline Term parse(std::string_view source, const Lattice& lat) {
  detail::Parser p(source, lat);
  return p.parse_program();
}

inline Type parse_type(std::string_view source, const Lattice& lat) {
  detail::Parser p(source, lat);
  return p.parse_type_only();
}

}  // namespace costlam

#endif  // COSTLAM_PARSE_HPP
