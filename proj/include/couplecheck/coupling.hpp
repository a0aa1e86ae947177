#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "couplecheck/subdist.hpp"

namespace couplecheck {

// Result of the transportation problem between two mass vectors. When
// feasible, `joint` is the witness (with up to `slack` mass of each side
// sent to the overflow sink / drawn from the filler source). Otherwise
// `cut` is a set S of left indices with mu1(S) > mu2(psi(S)) + slack.
struct FlowCoupling {
  bool feasible = false;
  std::vector<std::tuple<std::size_t, std::size_t, Rational>> joint;
  Rational overflow = 0;  // left mass not matched
  Rational filler = 0;    // right mass not matched
  std::vector<std::size_t> cut;
  Rational cut_left = 0;   // mu1(S)
  Rational cut_right = 0;  // mu2(psi(S))
};

using Relation = std::function<bool(std::size_t, std::size_t)>;

// Requires |sum mu1 - sum mu2| <= slack (otherwise infeasible with S = all
// of the heavier side's support, or an empty cut when the right side is
// heavier).
FlowCoupling find_coupling(const std::vector<Rational>& mu1, const std::vector<Rational>& mu2, const Relation& psi,
                           const Rational& slack);

template <class A, class B>
struct Coupling {
  bool feasible = false;
  SubDist<std::pair<A, B>> joint;
  Rational overflow = 0;
  Rational filler = 0;
  std::vector<A> cut;
  Rational cut_left = 0;
  Rational cut_right = 0;
};

template <class A, class B, class Psi>
Coupling<A, B> find_coupling(const SubDist<A>& mu1, const SubDist<B>& mu2, Psi&& psi, const Rational& slack) {
  std::vector<const A*> xs;
  std::vector<const B*> ys;
  std::vector<Rational> m1, m2;
  for (const auto& [a, p] : mu1.mass) {
    xs.push_back(&a);
    m1.push_back(p);
  }
  for (const auto& [b, p] : mu2.mass) {
    ys.push_back(&b);
    m2.push_back(p);
  }
  auto fc = find_coupling(m1, m2, [&](std::size_t i, std::size_t j) { return psi(*xs[i], *ys[j]); }, slack);
  Coupling<A, B> out;
  out.feasible = fc.feasible;
  for (const auto& [i, j, p] : fc.joint) out.joint.add({*xs[i], *ys[j]}, p);
  out.overflow = fc.overflow;
  out.filler = fc.filler;
  for (auto i : fc.cut) out.cut.push_back(*xs[i]);
  out.cut_left = fc.cut_left;
  out.cut_right = fc.cut_right;
  return out;
}

// Checks that a joint distribution is a psi-coupling of mu1 and mu2 up to
// `slack` per side.
template <class A, class B, class Psi>
bool is_coupling(const SubDist<std::pair<A, B>>& joint, const SubDist<A>& mu1, const SubDist<B>& mu2, Psi&& psi,
                 const Rational& slack) {
  for (const auto& [ab, p] : joint.mass)
    if (p <= 0 || !psi(ab.first, ab.second)) return false;
  auto l = marginal1(joint);
  auto r = marginal2(joint);
  Rational dl = 0, dr = 0;
  for (const auto& [a, p] : l.mass) {
    if (p > mu1.at(a)) return false;
  }
  for (const auto& [a, p] : mu1.mass) dl += p - l.at(a);
  for (const auto& [b, p] : r.mass) {
    if (p > mu2.at(b)) return false;
  }
  for (const auto& [b, p] : mu2.mass) dr += p - r.at(b);
  return dl <= slack && dr <= slack;
}

struct FCouplingResult {
  bool ok = false;
  std::string reason;
};

// f must be total on supp(mu1); throws std::invalid_argument otherwise.
template <class T, class F>
FCouplingResult check_f_coupling(const SubDist<T>& mu1, const SubDist<T>& mu2, F&& f) {
  FCouplingResult r;
  if (mu1.weight() != mu2.weight()) {
    r.reason = "weights differ";
    return r;
  }
  std::map<T, T> image;
  for (const auto& [x, p] : mu1.mass) {
    std::optional<T> y = f(x);
    if (!y) throw std::invalid_argument("bijection undefined on a support point");
    auto [it, fresh] = image.emplace(*y, x);
    if (!fresh) {
      r.reason = "not injective on the support";
      return r;
    }
    if (mu2.at(*y) != p) {
      r.reason = "mass not preserved";
      return r;
    }
  }
  r.ok = true;
  return r;
}

enum class LemmaMode { Implies, Iff };

struct Conclusion {
  bool certified = false;
  LemmaMode mode = LemmaMode::Implies;
  Rational lhs = 0;  // Pr_mu1[E1]
  Rational rhs = 0;  // Pr_mu2[E2]
  Rational slack = 0;
  std::string text;
};

std::string format_conclusion(const Conclusion& c, const std::string& e1, const std::string& e2);

template <class A, class B, class E1, class E2>
Conclusion fundamental_lemma(const SubDist<A>& mu1, const SubDist<B>& mu2, E1&& e1, E2&& e2, LemmaMode mode,
                             const Rational& slack, const std::string& e1_text = "E1",
                             const std::string& e2_text = "E2") {
  Conclusion c;
  c.mode = mode;
  c.slack = slack;
  c.lhs = pr_event(mu1, e1);
  c.rhs = pr_event(mu2, e2);
  auto res = find_coupling(
      mu1, mu2,
      [&](const A& a, const B& b) {
        bool x = e1(a), y = e2(b);
        return mode == LemmaMode::Iff ? x == y : (!x || y);
      },
      slack);
  c.certified = res.feasible;
  c.text = format_conclusion(c, e1_text, e2_text);
  return c;
}

struct PointwiseVerdict {
  bool equal = false;         // all pointwise couplings exist
  bool direct_equal = false;  // masses agree on the carrier
  bool eq_coupling = false;   // the equality coupling exists
  bool consistent = false;    // the three answers agree
  std::vector<bool> per_value;  // coupling for psi_a, in carrier order
  std::optional<std::size_t> first_failure;
};

// Values outside supp are treated as mass 0; throws std::invalid_argument
// when a support point lies outside the carrier.
template <class T>
PointwiseVerdict pointwise_eq_check(const SubDist<T>& mu1, const SubDist<T>& mu2, const std::vector<T>& carrier) {
  std::map<T, std::size_t> pos;
  for (std::size_t i = 0; i < carrier.size(); ++i) pos.emplace(carrier[i], i);
  for (const auto* mu : {&mu1, &mu2})
    for (const auto& [v, p] : mu->mass)
      if (!pos.count(v)) throw std::invalid_argument("support point outside the carrier");
  PointwiseVerdict v;
  v.equal = true;
  for (std::size_t i = 0; i < carrier.size(); ++i) {
    const T& a = carrier[i];
    auto c = find_coupling(mu1, mu2, [&](const T& x, const T& y) { return (x == a) == (y == a); }, Rational(0));
    v.per_value.push_back(c.feasible);
    if (!c.feasible && !v.first_failure) {
      v.first_failure = i;
      v.equal = false;
    }
  }
  v.direct_equal = mu1.mass == mu2.mass;
  v.eq_coupling = find_coupling(mu1, mu2, [](const T& x, const T& y) { return x == y; }, Rational(0)).feasible;
  v.consistent = v.equal == v.direct_equal && v.equal == v.eq_coupling;
  return v;
}

}  // namespace couplecheck
