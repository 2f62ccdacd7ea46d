#include "mg/sexpr.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <random>

using namespace mg;
using mgtest::thrown_code;

TEST_CASE("parses nested atom expressions") {
  auto exprs = parse(R"((Inheritance (Concept "cat") (Concept "animal")))");
  REQUIRE(exprs.size() == 1);
  const SExpr& e = exprs[0];
  REQUIRE(e.is_list());
  REQUIRE(e.items.size() == 3);
  CHECK(e.items[0].is_symbol("Inheritance"));
  CHECK(e.items[1].items[1].is_string());
  CHECK(e.items[1].items[1].text == "cat");
}

TEST_CASE("parses rationals exactly") {
  auto exprs = parse("(choice 1/2 a b) 0.25 -3 7");
  CHECK(exprs[0].items[1].number == Rational(1, 2));
  CHECK(exprs[1].number == Rational(1, 4));
  CHECK(exprs[2].number == Rational(-3));
  CHECK(exprs[3].number == Rational(7));
}

TEST_CASE("comments and escapes") {
  auto exprs = parse("# leading comment\n(Concept \"a\\\"b\\\\c\\n\") # trailing");
  REQUIRE(exprs.size() == 1);
  CHECK(exprs[0].items[1].text == "a\"b\\c\n");
}

TEST_CASE("parse errors carry position") {
  try {
    parse("(unclosed");
    FAIL("expected ParseError");
  } catch (const EngineError& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("1:1") != std::string::npos);
  }
  try {
    parse("(a\n  ))");
    FAIL("expected ParseError");
  } catch (const EngineError& e) {
    CHECK(std::string(e.what()).find("2:5") != std::string::npos);
  }
  CHECK(thrown_code([] { parse("\"no end"); }) == ErrorCode::ParseError);
  CHECK(thrown_code([] { parse("12/"); }) == ErrorCode::ParseError);
}

TEST_CASE("print-parse identity on canonical forms") {
  const char* samples[] = {
      R"((Inheritance (Concept "cat") (Concept "animal")))",
      R"((Evaluation (Predicate "likes") (List (Concept "cat") (Concept "fish"))))",
      R"((choice 1/2 a b))",
      R"((tv 9/10 1/2))",
      R"((Concept "queer \"name\" with \\ stuff"))",
  };
  for (const char* s : samples) {
    auto first = parse(s);
    std::string printed = print_all(first);
    auto second = parse(printed);
    CHECK(print_all(second) == printed);
  }
}

TEST_CASE("fuzzed inputs never crash the reader") {
  std::mt19937_64 rng(99);
  const std::string alphabet = "()\"\\ abc01/.#\n\t$";
  size_t parsed = 0, rejected = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string input;
    size_t len = rng() % 40;
    for (size_t k = 0; k < len; ++k) input += alphabet[rng() % alphabet.size()];
    try {
      parse(input);
      ++parsed;
    } catch (const EngineError& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      ++rejected;
    }
  }
  CHECK(parsed + rejected == 2000);
}
