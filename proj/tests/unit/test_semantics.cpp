#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/semantics.hpp"

using namespace couplecheck;

namespace {

Value var(const TypedProgram& tp, const State& s, const std::string& x) { return s.vals[tp.layout->find(x)]; }

}  // namespace

TEST_CASE("uniformizer against the geometric series") {
  for (auto p : {Rational(1, 3), Rational(1, 2), Rational(2, 3)}) {
    auto tp = load_program_file(testing::corpus("uniformizer.pw"), {{"p", to_string(p)}});
    const unsigned fuel = 60;
    auto d = run_program(tp, fuel);
    Rational q = p * p + (1 - p) * (1 - p);
    Rational series = 0, qk = 1;
    for (unsigned k = 0; k < fuel; ++k) {
      series += qk;
      qk *= q;
    }
    Rational pt = pr_event(d, [&](const State& s) { return var(tp, s, "x").as_bool(); });
    Rational pf = pr_event(d, [&](const State& s) { return !var(tp, s, "x").as_bool(); });
    CHECK(d.residual == power(q, fuel));
    CHECK(pt == p * (1 - p) * series);
    CHECK(pt == pf);
    CHECK(d.weight() + d.residual == 1);
  }
}

TEST_CASE("sampling instructions") {
  auto tp = load_program("program p\nvar x : bool = false;\nvar u : range(5) = 0;\nbegin\n"
                         "x <$ flip(1/3);\nu <$ uniform{1, 3};\nend\n");
  auto d = run_program(tp, 4);
  CHECK(pr_event(d, [&](const State& s) { return var(tp, s, "x").as_bool(); }) == Rational(1, 3));
  CHECK(pr_event(d, [&](const State& s) { return var(tp, s, "u").as_int() == 3; }) == Rational(1, 2));
  CHECK_THROWS_AS(load_program("program p\nvar u : range(5) = 0;\nbegin\nu <$ uniform{1, 3, 3};\nend\n"), TypeError);
}

TEST_CASE("abort and run-time errors are not weight") {
  auto tp = load_program("program p\nvar x : bool = false;\nvar u : range(3) = 0;\nbegin\n"
                         "x <$ flip(1/2);\nif x { abort; } else { u := u + 7; }\nend\n");
  auto d = run_program(tp, 4);
  CHECK(d.weight() == 0);
  CHECK(d.error == Rational(1, 2));
  CHECK_FALSE(d.first_error.empty());
  auto ll = check_lossless(tp, 4, 0);
  CHECK(ll.kind == LosslessKind::NotLossless);
  CHECK(ll.deficit == 1);
}

TEST_CASE("lossless classification") {
  auto uni = load_program_file(testing::corpus("uniformizer.pw"));
  CHECK(check_lossless(uni, 60, Rational(1, 1 << 30)).kind == LosslessKind::Within);
  CHECK(check_lossless(uni, 5, Rational(1, 1 << 30)).kind == LosslessKind::NotLossless);
  auto ballot = load_program_file(testing::corpus("ballot.pw"));
  CHECK(check_lossless(ballot, 8, 0).kind == LosslessKind::Exact);
  auto loop = load_program("program p\nvar x : bool = true;\nbegin\nwhile x { skip; }\nend\n");
  auto r = check_lossless(loop, 10, Rational(1, 2));
  CHECK(r.kind == LosslessKind::NotLossless);
  CHECK(r.residual == 1);
}

TEST_CASE("monad laws") {
  std::mt19937_64 rng(7);
  auto k1 = [](const int& a) {
    SubDist<int> d;
    d.add(a % 3, Rational(1, 2));
    d.add((a + 1) % 3, Rational(1, 3));
    d.residual = Rational(1, 6);
    return d;
  };
  auto k2 = [](const int& b) {
    SubDist<int> d;
    d.add(b * 2, Rational(3, 4));
    d.error = Rational(1, 4);
    return d;
  };
  for (int t = 0; t < 50; ++t) {
    auto mu = testing::random_dist(rng, 5, t % 2 == 0);
    CHECK(bind(dirac(3), k1) == k1(3));
    CHECK(bind(mu, [](const int& a) { return dirac(a); }) == mu);
    auto lhs = bind(bind(mu, k1), k2);
    auto rhs = bind(mu, [&](const int& a) { return bind(k1(a), k2); });
    CHECK(lhs == rhs);
  }
}

TEST_CASE("marginals and supports of products") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    auto a = testing::random_dist(rng, 4);
    auto b = testing::random_dist(rng, 3, false);
    auto prod = bind(a, [&](const int& x) { return map_dist(b, [&](const int& y) { return std::pair{x, y}; }); });
    auto m1 = marginal1(prod);
    auto m2 = marginal2(prod);
    for (const auto& [x, p] : a.mass) CHECK(m1.at(x) == p * b.weight());
    for (const auto& [y, p] : b.mass) CHECK(m2.at(y) == p * a.weight());
    CHECK(prod.weight() == a.weight() * b.weight());
    for (const auto& [xy, p] : prod.mass) {
      CHECK(p > 0);
      CHECK(a.at(xy.first) > 0);
      CHECK(b.at(xy.second) > 0);
    }
  }
}

TEST_CASE("exec of a random program is a sub-distribution over its layout") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    testing::ProgramGen gen(s, true);
    auto tp = load_program(gen.program());
    auto d = run_program(tp, 6);
    CHECK(d.weight() + d.residual + d.error == 1);
    for (const auto& [st, p] : d.mass) {
      CHECK(p > 0);
      REQUIRE(st.vals.size() == tp.layout->vars.size());
      for (std::size_t i = 0; i < st.vals.size(); ++i) CHECK(contains(*tp.layout->vars[i].type, st.vals[i]));
    }
  }
}

TEST_CASE("more fuel never loses mass") {
  auto tp = load_program_file(testing::corpus("walk.pw"), {{"n", "3"}});
  Rational prev = 2;
  for (unsigned f : {5u, 10u, 20u, 40u}) {
    auto d = run_program(tp, f);
    CHECK(d.residual < prev);
    CHECK(d.weight() + d.residual == 1);
    prev = d.residual;
  }
}
