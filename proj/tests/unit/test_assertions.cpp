#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/assertion.hpp"
#include "couplecheck/eval.hpp"
#include "couplecheck/parser.hpp"
#include "couplecheck/semantics.hpp"

using namespace couplecheck;

namespace {

const char* kProg =
    "program p\nvar x : bool = false;\nvar y : bool = false;\n"
    "var u : range(3) = 0;\nvar v : range(3) = 0;\nbegin\nskip;\nend\n";

ExprPtr program_expr(const TypedProgram& tp, const std::string& text, const TypePtr& target) {
  Scope s = tp.scope();
  s.side[0] = tp.layout.get();
  return coerce_to(check_expr(parse_expr(text), s), target);
}

}  // namespace

TEST_CASE("EqMem expands to equality on every shared variable") {
  auto tp = load_program(kProg);
  Scope rel = relational_scope(tp, tp);
  auto phi = parse_assertion("EqMem", rel);
  auto states = initial_states(tp, true);
  int holds = 0;
  for (const auto& a : states)
    for (const auto& b : states)
      if (eval_assertion(*phi, a, b)) {
        ++holds;
        CHECK(a == b);
      }
  CHECK(holds == static_cast<int>(states.size()));
}

TEST_CASE("implication checking") {
  auto tp = load_program(kProg);
  Scope rel = relational_scope(tp, tp);
  auto valid = check_implies(parse_assertion("x{1} = y{2} && y{2}", rel), parse_assertion("x{1}", rel), rel);
  CHECK(valid.valid);
  auto invalid = check_implies(parse_assertion("u{1} < v{2}", rel), parse_assertion("u{1} + 1 = v{2}", rel), rel);
  CHECK_FALSE(invalid.valid);
  REQUIRE(invalid.cex.has_value());
  CHECK_FALSE(invalid.cex->to_string().empty());
  auto vacuous = check_implies(parse_assertion("x{1} && !x{1}", rel), parse_assertion("false", rel), rel);
  CHECK(vacuous.valid);
  CHECK_THROWS_AS(check_implies(parse_assertion("true", rel),
                                parse_assertion("u{1} + v{1} + u{2} + v{2} < 9 || x{1} || y{2}", rel), rel, 3),
                  BudgetError);
}

TEST_CASE("run-time errors make a formula false") {
  auto tp = load_program("program p\nvar l : list(2, bool) = [];\nbegin\nskip;\nend\n");
  Scope rel = relational_scope(tp, tp);
  auto phi = parse_assertion("l{1}[0]", rel);
  auto neg = parse_assertion("!l{1}[0]", rel);
  State empty = tp.init;
  CHECK_FALSE(eval_assertion(*phi, empty, empty));
  CHECK_FALSE(eval_assertion(*neg, empty, empty));
}

TEST_CASE("substitution lemma") {
  auto tp = load_program(kProg);
  Scope rel = relational_scope(tp, tp);
  auto states = initial_states(tp, true);
  const std::vector<std::string> formulas = {"x{1} = x{2}", "u{1} + v{2} < 3 => y{1}",
                                             "(x{1} xor y{2}) || u{1} = v{1}", "u{1} = u{2} && v{1} != 2"};
  const std::vector<std::pair<std::string, std::string>> assigns = {
      {"x", "y && u = 1"}, {"u", "(u + v) % 3"}, {"u", "if x then 2 else v"}, {"v", "u"}};
  for (const auto& ftext : formulas) {
    auto phi = parse_assertion(ftext, rel);
    for (const auto& [target, etext] : assigns) {
      int slot = tp.layout->find(target);
      auto e = program_expr(tp, etext, tp.layout->vars[slot].type);
      for (int side : {1, 2}) {
        auto sub = subst(phi, side, slot, retag(e, side));
        for (const auto& m1 : states)
          for (const auto& m2 : states) {
            EvalEnv env;
            env.st[0] = side == 1 ? &m1 : &m2;
            State updated = side == 1 ? m1 : m2;
            updated.vals[slot] = eval(*e, env);
            bool direct = side == 1 ? eval_assertion(*phi, updated, m2) : eval_assertion(*phi, m1, updated);
            CHECK(eval_assertion(*sub, m1, m2) == direct);
          }
      }
    }
  }
}

TEST_CASE("free variables are tagged") {
  auto tp = load_program(kProg);
  Scope rel = relational_scope(tp, tp);
  auto fv = free_vars(*parse_assertion("x{1} && u{2} = 1", rel));
  CHECK(fv.size() == 2);
  CHECK(fv.count({1, tp.layout->find("x")}) == 1);
  CHECK(fv.count({2, tp.layout->find("u")}) == 1);
  CHECK(conjuncts(parse_assertion("x{1} && (y{1} && u{1} = 0)", rel)).size() == 3);
}
