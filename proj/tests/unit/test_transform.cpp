#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/parser.hpp"
#include "couplecheck/semantics.hpp"
#include "couplecheck/transform.hpp"

using namespace couplecheck;

TEST_CASE("product program matches both runs on random bounded programs") {
  std::mt19937_64 rng(5);
  for (std::uint64_t s = 0; s < 50; ++s) {
    testing::ProgramGen gen(1000 + s);
    auto tp = load_program(gen.program());
    const std::size_t k = tp.layout->vars.size();
    auto single = run_program(tp, 8);
    auto composed = self_compose(tp, 2);
    REQUIRE(composed.layout->vars.size() == 2 * k);
    auto joint = run_program(composed, 8);
    CHECK(joint.residual == 0);
    auto pairs = map_dist(joint, [&](const State& m) {
      return std::pair{project_copy(m, k, 1), project_copy(m, k, 2)};
    });
    for (const auto& [ab, p] : pairs.mass) CHECK(p == single.at(ab.first) * single.at(ab.second));
    CHECK(pairs.weight() == single.weight() * single.weight());
    // a random event on each copy
    auto slot = std::uniform_int_distribution<std::size_t>(0, k - 2)(rng);
    auto val = single.mass.begin()->first.vals[slot];
    auto e = [&](const State& m) { return m.vals[slot] == val; };
    Rational pe = pr_event(single, e);
    CHECK(pr_event(pairs, [&](const auto& ab) { return e(ab.first) && e(ab.second); }) == pe * pe);
  }
}

TEST_CASE("self-composition renames copies") {
  auto tp = load_program_file(testing::corpus("uniformizer.pw"));
  auto c = self_compose(tp, 3);
  for (auto name : {"x#1", "y#1", "x#2", "y#3"}) CHECK(c.layout->find(name) >= 0);
  CHECK(c.layout->find("x") < 0);
  auto text = print_program(self_compose_source(tp, 2));
  CHECK(text.find("x#2") != std::string::npos);
  CHECK(self_compose_state(tp.init, 2).vals.size() == 2 * tp.init.vals.size());
}

TEST_CASE("swapping independent statements") {
  auto tp = load_program("program p\nvar x : bool = false;\nvar u : range(3) = 0;\nbegin\n"
                         "x <$ flip(1/3);\nu <$ uniform(range(3));\nx := !x;\nend\n");
  auto swapped = swap_stmts(tp.body[0], tp.body[1]);
  Block b = swapped;
  b.push_back(tp.body[2]);
  auto seeds = initial_states(tp, true);
  CHECK(semantic_equiv(tp.body, b, seeds, 4).equivalent);
  CHECK_THROWS_AS(swap_stmts(tp.body[0], tp.body[2]), SwapError);
  auto moved = move_stmt(tp.body, 1, 0);
  CHECK(stmt_equal(*moved[0], *tp.body[1]));
  CHECK(semantic_equiv(tp.body, moved, seeds, 4).equivalent);
  auto fp = var_footprint(tp.body);
  CHECK(fp.all == std::set<std::string>{"x", "u"});
}

TEST_CASE("inequivalent blocks yield a witness") {
  auto tp = load_program("program p\nvar x : bool = false;\nbegin\nx <$ flip(1/3);\nend\n");
  auto other = load_program("program p\nvar x : bool = false;\nbegin\nx <$ flip(2/3);\nend\n");
  auto r = semantic_equiv(tp.body, other.body, initial_states(tp, false), 4);
  CHECK_FALSE(r.equivalent);
  CHECK(r.witness.has_value());
}

TEST_CASE("while split is oracle-equal at matched fuel") {
  for (int n : {3, 4, 5}) {
    auto tp = load_program_file(testing::corpus("walk.pw"), {{"n", std::to_string(n)}});
    std::size_t w = 0;
    while (tp.body[w]->kind != StmtKind::While) ++w;
    Scope s = tp.scope();
    s.side[0] = tp.layout.get();
    auto guard = check_bool(parse_expr("c != l"), s);
    auto split = while_split(*tp.body[w], guard);
    REQUIRE(split.size() == 2);
    Block whole = tp.body;
    whole.erase(whole.begin() + w);
    whole.insert(whole.begin() + w, split.begin(), split.end());
    for (unsigned fuel : {10u, 37u}) {
      auto a = exec(tp.body, tp.init, fuel);
      auto b = exec(whole, tp.init, fuel);
      CHECK(a == b);
    }
  }
}
