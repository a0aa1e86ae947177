#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/parser.hpp"
#include "couplecheck/semantics.hpp"
#include "couplecheck/sexpr.hpp"
#include "couplecheck/types.hpp"

using namespace couplecheck;

TEST_CASE("rationals parse and print") {
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("-4") == -4);
  CHECK(to_string(parse_rational("2/4")) == "1/2");
  CHECK(to_string(Rational(7)) == "7");
  CHECK(power(Rational(5, 9), 3) == Rational(125, 729));
  CHECK_THROWS_AS(parse_rational("1/0x"), std::invalid_argument);
}

TEST_CASE("type carriers") {
  CHECK(domain_size(*t_zmod(5)) == 5);
  CHECK(domain_size(*t_tuple({t_bool(), t_range(3)})) == 6);
  CHECK(domain_size(*t_list(2, t_bool())) == 7);
  auto vs = enumerate_type(*t_list(2, t_bool()));
  REQUIRE(vs.size() == 7);
  CHECK(vs[0].elems().empty());
  CHECK(coerce(*t_zmod(3), Value::integer(-1)) == Value::integer(2));
  CHECK_FALSE(coerce(*t_range(3), Value::integer(3)).has_value());
  CHECK(contains(*t_int(-2, 2), Value::integer(-2)));
}

TEST_CASE("parse print round trip on the corpus") {
  for (auto f : {"uniformizer.pw", "walk.pw", "ballot.pw", "pairwise.pw", "kwise.pw", "condindep.pw",
                 "rejection.pw"}) {
    CAPTURE(f);
    auto tp = testing::load_corpus(f);
    auto text = print_program(tp->source);
    auto again = parse_program(text);
    CHECK(program_equal(tp->source, again));
    CHECK(print_program(again) == text);
  }
}

TEST_CASE("parse print round trip on random programs") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    testing::ProgramGen gen(s, true);
    auto p = parse_program(gen.program());
    auto q = parse_program(print_program(p));
    CHECK(program_equal(p, q));
  }
}

TEST_CASE("expression printing keeps precedence") {
  for (auto text : {"(a + b) * c", "a - (b - c)", "!(x && y) || z", "x => y => z", "(x => y) => z",
                    "l :: 3", "if b then 1 else 2", "forall i : range(3), i < 3"}) {
    auto e = parse_expr(text);
    auto again = parse_expr(print_expr(*e));
    CHECK(expr_equal(*e, *again));
  }
}

TEST_CASE("syntax errors carry a location") {
  try {
    parse_program("program p\nvar x : bool = false;\nbegin\n  x := ;\nend\n");
    FAIL("no error");
  } catch (const SyntaxError& e) {
    CHECK(e.loc.line == 4);
  }
}

TEST_CASE("type errors are collected") {
  CHECK_THROWS_AS(load_program("program p\nvar x : bool = false;\nbegin\n  x := 1 + true;\nend\n"), TypeError);
  CHECK_THROWS_AS(load_program("program p\nvar x : bool = false;\nbegin\n  y := true;\nend\n"), TypeError);
  CHECK_THROWS_AS(load_program("program p\nparam n : integer;\nvar x : range(n) = 0;\nbegin\nskip;\nend\n"),
                  TypeError);
}

TEST_CASE("parameters size types") {
  auto tp = load_program_file(testing::corpus("pairwise.pw"), {{"n", "3"}});
  int z = tp.layout->find("z");
  REQUIRE(z >= 0);
  CHECK(domain_size(*tp.layout->vars[z].type) == 256);
}

TEST_CASE("for loops desugar to counter loops") {
  auto tp = load_program("program p\nvar i : range(4) = 0;\nvar s : range(10) = 0;\nbegin\n"
                         "for i = 0 to 2 { s := s + i; }\nend\n");
  for (const auto& st : tp.body) CHECK(st->kind != StmtKind::For);
  auto d = run_program(tp, 8);
  REQUIRE(d.mass.size() == 1);
  CHECK(d.mass.begin()->first.vals[tp.layout->find("s")] == Value::integer(3));
}

TEST_CASE("s-expressions") {
  auto xs = parse_sexprs("; comment\n(a :k \"s t\" (b c))");
  REQUIRE(xs.size() == 1);
  CHECK(xs[0].head() == "a");
  CHECK(xs[0].items[1].is_keyword());
  CHECK(xs[0].items[2].kind == SExpr::Kind::String);
  CHECK(xs[0].items[2].text == "s t");
  CHECK_THROWS_AS(parse_sexprs("(a"), SExprError);
}
