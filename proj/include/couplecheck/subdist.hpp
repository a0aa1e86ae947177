#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>

#include "couplecheck/rational.hpp"

namespace couplecheck {

// Finite sub-distribution with exact masses. `residual` is mass held back
// by loop truncation, `error` is mass of traces that hit a run-time error.
// Neither counts towards weight().
template <class T>
struct SubDist {
  std::map<T, Rational> mass;
  Rational residual = 0;
  Rational error = 0;
  std::string first_error;

  void add(const T& v, const Rational& p) {
    if (p == 0) return;
    auto [it, fresh] = mass.try_emplace(v, p);
    if (!fresh) it->second += p;
  }
  void add_error(const Rational& p, const std::string& what) {
    if (p == 0) return;
    if (error == 0 && first_error.empty()) first_error = what;
    error += p;
  }
  Rational weight() const {
    Rational w = 0;
    for (const auto& [v, p] : mass) w += p;
    return w;
  }
  Rational at(const T& v) const {
    auto it = mass.find(v);
    return it == mass.end() ? Rational(0) : it->second;
  }
  bool empty() const { return mass.empty(); }

  friend bool operator==(const SubDist& a, const SubDist& b) {
    return a.mass == b.mass && a.residual == b.residual && a.error == b.error;
  }
};

template <class T>
SubDist<T> dirac(const T& v) {
  SubDist<T> d;
  d.mass.emplace(v, Rational(1));
  return d;
}

template <class T, class K>
auto bind(const SubDist<T>& mu, K&& k) -> decltype(k(std::declval<const T&>())) {
  decltype(k(std::declval<const T&>())) out;
  out.residual = mu.residual;
  out.error = mu.error;
  out.first_error = mu.first_error;
  for (const auto& [a, p] : mu.mass) {
    auto inner = k(a);
    for (const auto& [b, q] : inner.mass) out.add(b, p * q);
    out.residual += p * inner.residual;
    out.add_error(p * inner.error, inner.first_error);
  }
  return out;
}

template <class T, class F>
auto map_dist(const SubDist<T>& mu, F&& f) {
  SubDist<std::decay_t<decltype(f(std::declval<const T&>()))>> out;
  out.residual = mu.residual;
  out.error = mu.error;
  out.first_error = mu.first_error;
  for (const auto& [a, p] : mu.mass) out.add(f(a), p);
  return out;
}

template <class T, class P>
Rational pr_event(const SubDist<T>& mu, P&& event) {
  Rational s = 0;
  for (const auto& [a, p] : mu.mass)
    if (event(a)) s += p;
  return s;
}

// Projection of a joint sub-distribution; residual and error carry over.
template <class A, class B>
auto marginal1(const SubDist<std::pair<A, B>>& mu) {
  return map_dist(mu, [](const std::pair<A, B>& ab) { return ab.first; });
}
template <class A, class B>
auto marginal2(const SubDist<std::pair<A, B>>& mu) {
  return map_dist(mu, [](const std::pair<A, B>& ab) { return ab.second; });
}

}  // namespace couplecheck
