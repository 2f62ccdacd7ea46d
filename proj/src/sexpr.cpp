#include "mg/sexpr.hpp"

#include "mg/error.hpp"

#include <cctype>
#include <sstream>

namespace mg {

SExpr SExpr::symbol(std::string s) {
  SExpr e;
  e.kind = Kind::Symbol;
  e.text = std::move(s);
  return e;
}

SExpr SExpr::string(std::string s) {
  SExpr e;
  e.kind = Kind::String;
  e.text = std::move(s);
  return e;
}

SExpr SExpr::num(Rational r) {
  SExpr e;
  e.kind = Kind::Number;
  e.number = std::move(r);
  return e;
}

SExpr SExpr::list(std::vector<SExpr> items) {
  SExpr e;
  e.kind = Kind::List;
  e.items = std::move(items);
  return e;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_blank();
    while (!at_end()) {
      out.push_back(read_expr());
      skip_blank();
    }
    return out;
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  [[noreturn]] void error(int line, int column, const std::string& expected) {
    fail(ErrorCode::ParseError,
         std::to_string(line) + ":" + std::to_string(column) + ": " + expected);
  }

  void skip_blank() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  static bool is_delimiter(char c) {
    return c == '(' || c == ')' || c == '"' || c == '#' ||
           std::isspace(static_cast<unsigned char>(c));
  }

  SExpr read_expr() {
    int line = line_, column = column_;
    char c = peek();
    SExpr e;
    if (c == '(') {
      advance();
      std::vector<SExpr> items;
      skip_blank();
      while (true) {
        if (at_end()) error(line, column, "expected ')' before end of input");
        if (peek() == ')') {
          advance();
          break;
        }
        items.push_back(read_expr());
        skip_blank();
      }
      e = SExpr::list(std::move(items));
    } else if (c == ')') {
      error(line, column, "unexpected ')'");
    } else if (c == '"') {
      e = read_string();
    } else {
      e = read_token();
    }
    e.line = line;
    e.column = column;
    return e;
  }

  SExpr read_string() {
    int line = line_, column = column_;
    advance();  // opening quote
    std::string out;
    while (true) {
      if (at_end()) error(line, column, "unterminated string literal");
      char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) error(line, column, "unterminated escape in string literal");
        char esc = advance();
        switch (esc) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default:
            error(line_, column_ - 1, std::string("unknown escape '\\") + esc + "'");
        }
      } else {
        out += c;
      }
    }
    return SExpr::string(std::move(out));
  }

  SExpr read_token() {
    std::string tok;
    while (!at_end() && !is_delimiter(peek())) tok += advance();
    if (tok.empty()) error(line_, column_, "expected a token");
    char first = tok[0];
    bool maybe_number = std::isdigit(static_cast<unsigned char>(first)) ||
                        ((first == '-' || first == '+') && tok.size() > 1 &&
                         std::isdigit(static_cast<unsigned char>(tok[1])));
    if (maybe_number) {
      if (auto r = parse_rational(tok)) return SExpr::num(std::move(*r));
      error(line_, column_ - static_cast<int>(tok.size()),
            "malformed number '" + tok + "'");
    }
    return SExpr::symbol(std::move(tok));
  }
};

void print_to(std::ostream& os, const SExpr& e) {
  switch (e.kind) {
    case SExpr::Kind::Symbol:
      os << e.text;
      break;
    case SExpr::Kind::String: {
      os << '"';
      for (char c : e.text) {
        switch (c) {
          case '"': os << "\\\""; break;
          case '\\': os << "\\\\"; break;
          case '\n': os << "\\n"; break;
          case '\t': os << "\\t"; break;
          case '\r': os << "\\r"; break;
          default: os << c;
        }
      }
      os << '"';
      break;
    }
    case SExpr::Kind::Number:
      os << to_string(e.number);
      break;
    case SExpr::Kind::List: {
      os << '(';
      for (size_t i = 0; i < e.items.size(); ++i) {
        if (i) os << ' ';
        print_to(os, e.items[i]);
      }
      os << ')';
      break;
    }
  }
}

}  // namespace

std::vector<SExpr> parse(std::string_view text) { return Reader(text).read_all(); }

std::string print(const SExpr& expr) {
  std::ostringstream os;
  print_to(os, expr);
  return os.str();
}

std::string print_all(const std::vector<SExpr>& exprs) {
  std::string out;
  for (const SExpr& e : exprs) {
    out += print(e);
    out += '\n';
  }
  return out;
}

}  // namespace mg
