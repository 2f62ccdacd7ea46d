#pragma once

#include "mg/rational.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mg {

// Surface syntax values: symbols, string literals, exact rationals and lists.
// Positions are 1-based and survive into diagnostics.
struct SExpr {
  enum class Kind { Symbol, String, Number, List };

  Kind kind = Kind::Symbol;
  std::string text;          // Symbol / String payload
  Rational number;           // Number payload
  std::vector<SExpr> items;  // List payload
  int line = 0;
  int column = 0;

  bool is_symbol() const { return kind == Kind::Symbol; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
  bool is_string() const { return kind == Kind::String; }
  bool is_number() const { return kind == Kind::Number; }
  bool is_list() const { return kind == Kind::List; }

  static SExpr symbol(std::string s);
  static SExpr string(std::string s);
  static SExpr num(Rational r);
  static SExpr list(std::vector<SExpr> items);
};

// Full-input parse. UTF-8 text, "#" line comments, strings with backslash
// escapes, rationals as integer, integer/integer or decimal. Throws
// EngineError{ParseError} with a line:column prefix.
std::vector<SExpr> parse(std::string_view text);

// Canonical printing; parse(print(e)) == e for canonical forms.
std::string print(const SExpr& expr);
std::string print_all(const std::vector<SExpr>& exprs);  // one per line

}  // namespace mg
