#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/coupling.hpp"
#include "couplecheck/maxflow.hpp"

using namespace couplecheck;

TEST_CASE("max flow on a textbook network") {
  MaxFlow g(6);
  g.add_edge(0, 1, 16);
  g.add_edge(0, 2, 13);
  g.add_edge(1, 2, 10);
  g.add_edge(2, 1, 4);
  g.add_edge(1, 3, 12);
  g.add_edge(3, 2, 9);
  g.add_edge(2, 4, 14);
  g.add_edge(4, 3, 7);
  g.add_edge(3, 5, 20);
  g.add_edge(4, 5, 4);
  CHECK(g.run(0, 5) == 23);
  auto side = g.source_side(0);
  CHECK(side[0]);
  CHECK_FALSE(side[5]);
}

TEST_CASE("identity coupling and a Hall violation") {
  std::vector<Rational> mu1 = {Rational(1, 2), Rational(1, 2)};
  std::vector<Rational> mu2 = {Rational(1, 4), Rational(3, 4)};
  auto eq = find_coupling(mu1, mu2, [](std::size_t i, std::size_t j) { return i == j; }, 0);
  CHECK_FALSE(eq.feasible);
  REQUIRE_FALSE(eq.cut.empty());
  CHECK(eq.cut_left > eq.cut_right);
  auto within = find_coupling(mu1, mu2, [](std::size_t i, std::size_t j) { return i == j; }, Rational(1, 4));
  CHECK(within.feasible);
  CHECK(within.overflow == Rational(1, 4));
  auto any = find_coupling(mu1, mu2, [](std::size_t, std::size_t) { return true; }, 0);
  CHECK(any.feasible);
  Rational total = 0;
  for (const auto& [i, j, p] : any.joint) total += p;
  CHECK(total == 1);
}

TEST_CASE("different weights need slack") {
  std::vector<Rational> mu1 = {Rational(1, 2)};
  std::vector<Rational> mu2 = {Rational(1, 4)};
  auto all = [](std::size_t, std::size_t) { return true; };
  CHECK_FALSE(find_coupling(mu1, mu2, all, 0).feasible);
  CHECK(find_coupling(mu1, mu2, all, Rational(1, 4)).feasible);
}

TEST_CASE("implication couplings bound the probabilities") {
  std::mt19937_64 rng(2024);
  int feasible = 0;
  for (int t = 0; t < 200; ++t) {
    int n1 = std::uniform_int_distribution<int>(1, 5)(rng);
    int n2 = std::uniform_int_distribution<int>(1, 5)(rng);
    auto mu1 = testing::random_dist(rng, n1);
    auto mu2 = testing::random_dist(rng, n2);
    unsigned m1 = std::uniform_int_distribution<unsigned>(0, (1u << n1) - 1)(rng);
    unsigned m2 = std::uniform_int_distribution<unsigned>(0, (1u << n2) - 1)(rng);
    auto e1 = [&](int a) { return ((m1 >> a) & 1u) != 0; };
    auto e2 = [&](int b) { return ((m2 >> b) & 1u) != 0; };
    auto psi = [&](int a, int b) { return !e1(a) || e2(b); };
    auto c = find_coupling(mu1, mu2, psi, 0);
    Rational p1 = pr_event(mu1, e1), p2 = pr_event(mu2, e2);
    if (c.feasible) {
      ++feasible;
      CHECK(p1 <= p2);
      CHECK(is_coupling(c.joint, mu1, mu2, psi, 0));
    } else {
      // both are proper, so the converse holds as well
      CHECK(p1 > p2);
      CHECK(c.cut_left > c.cut_right);
    }
    auto lemma = fundamental_lemma(mu1, mu2, e1, e2, LemmaMode::Implies, 0);
    CHECK(lemma.certified == c.feasible);
    CHECK(lemma.lhs == p1);
    CHECK(lemma.rhs == p2);
  }
  CHECK(feasible > 0);
  CHECK(feasible < 200);
}

TEST_CASE("pointwise, direct and equality couplings agree") {
  std::mt19937_64 rng(99);
  int equal = 0;
  for (int t = 0; t < 100; ++t) {
    int n = std::uniform_int_distribution<int>(1, 5)(rng);
    auto mu1 = testing::random_dist(rng, n, t % 3 != 0);
    auto mu2 = t % 2 == 0 ? mu1 : testing::random_dist(rng, n, t % 3 != 0);
    std::vector<int> carrier;
    for (int i = 0; i < n; ++i) carrier.push_back(i);
    auto v = pointwise_eq_check(mu1, mu2, carrier);
    CHECK(v.consistent);
    CHECK(v.direct_equal == (mu1.mass == mu2.mass));
    if (v.equal) ++equal;
    else REQUIRE(v.first_failure.has_value());
  }
  CHECK(equal >= 50);
  SubDist<int> d;
  d.add(7, 1);
  CHECK_THROWS_AS(pointwise_eq_check(d, d, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST_CASE("f-couplings") {
  SubDist<int> u;
  for (int i = 0; i < 4; ++i) u.add(i, Rational(1, 4));
  auto shift = [](int v) { return std::optional<int>((v + 1) % 4); };
  CHECK(check_f_coupling(u, u, shift).ok);
  auto collapse = [](int v) { return std::optional<int>(v / 2); };
  auto r = check_f_coupling(u, u, collapse);
  CHECK_FALSE(r.ok);
  CHECK(r.reason == "not injective on the support");
  SubDist<int> b;
  b.add(0, Rational(1, 3));
  b.add(1, Rational(2, 3));
  auto swap01 = [](int v) { return std::optional<int>(1 - v); };
  CHECK(check_f_coupling(b, b, swap01).reason == "mass not preserved");
  auto partial = [](int v) { return v == 0 ? std::optional<int>() : std::optional<int>(v); };
  CHECK_THROWS_AS(check_f_coupling(b, b, partial), std::invalid_argument);
}

TEST_CASE("fundamental lemma in iff form") {
  SubDist<int> a, b;
  a.add(0, Rational(1, 3));
  a.add(1, Rational(2, 3));
  b.add(5, Rational(2, 3));
  b.add(6, Rational(1, 3));
  auto c = fundamental_lemma(a, b, [](int v) { return v == 0; }, [](int v) { return v == 6; }, LemmaMode::Iff, 0,
                             "x = 0", "y = 6");
  CHECK(c.certified);
  CHECK(c.lhs == c.rhs);
  auto d = fundamental_lemma(a, b, [](int v) { return v == 0; }, [](int v) { return v == 5; }, LemmaMode::Iff, 0);
  CHECK_FALSE(d.certified);
}
