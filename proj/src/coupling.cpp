#include "couplecheck/coupling.hpp"

#include "couplecheck/maxflow.hpp"

namespace couplecheck {

FlowCoupling find_coupling(const std::vector<Rational>& mu1, const std::vector<Rational>& mu2, const Relation& psi,
                           const Rational& slack) {
  FlowCoupling out;
  Rational w1 = 0, w2 = 0;
  for (const auto& p : mu1) w1 += p;
  for (const auto& p : mu2) w2 += p;
  // left overflow capacity a, right filler capacity b, balanced so that
  // w1 + b = w2 + a
  Rational a = slack, b = slack;
  if (w1 > w2)
    b = slack - (w1 - w2);
  else
    a = slack - (w2 - w1);
  if (a < 0 || b < 0) {
    // weights too far apart: the heavier side cannot be absorbed
    if (w1 > w2) {
      for (std::size_t i = 0; i < mu1.size(); ++i) out.cut.push_back(i);
      out.cut_left = w1;
      out.cut_right = w2;
    }
    return out;
  }

  // common denominator
  BigInt den = 1;
  auto absorb = [&](const Rational& q) { mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), q.get_den_mpz_t()); };
  for (const auto& p : mu1) absorb(p);
  for (const auto& p : mu2) absorb(p);
  absorb(a);
  absorb(b);
  auto scaled = [&](const Rational& q) -> BigInt { return q.get_num() * (den / q.get_den()); };

  const std::size_t n1 = mu1.size(), n2 = mu2.size();
  const std::size_t src = n1 + n2, over = src + 1, fill = src + 2, snk = src + 3;
  MaxFlow g(snk + 1);
  BigInt inf = scaled(w1) + scaled(w2) + scaled(a) + scaled(b) + 1;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> pair_edges;
  std::vector<std::size_t> over_edges(n1), fill_edges(n2);
  for (std::size_t i = 0; i < n1; ++i) g.add_edge(src, i, scaled(mu1[i]));
  for (std::size_t j = 0; j < n2; ++j) g.add_edge(n1 + j, snk, scaled(mu2[j]));
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      if (psi(i, j)) pair_edges.emplace_back(i, j, g.add_edge(i, n1 + j, inf));
  for (std::size_t i = 0; i < n1; ++i) over_edges[i] = g.add_edge(i, over, inf);
  for (std::size_t j = 0; j < n2; ++j) fill_edges[j] = g.add_edge(fill, n1 + j, inf);
  g.add_edge(src, fill, scaled(b));
  g.add_edge(fill, over, inf);
  g.add_edge(over, snk, scaled(a));

  BigInt need = scaled(w1) + scaled(b);
  BigInt got = g.run(src, snk);
  auto unscale = [&](const BigInt& v) {
    Rational q(v, den);
    q.canonicalize();
    return q;
  };
  if (got == need) {
    out.feasible = true;
    for (const auto& [i, j, id] : pair_edges) {
      const auto& f = g.flow_on(id);
      if (f > 0) out.joint.emplace_back(i, j, unscale(f));
    }
    for (std::size_t i = 0; i < n1; ++i) out.overflow += unscale(g.flow_on(over_edges[i]));
    for (std::size_t j = 0; j < n2; ++j) out.filler += unscale(g.flow_on(fill_edges[j]));
    return out;
  }
  auto side = g.source_side(src);
  std::vector<bool> hit(n2, false);
  for (std::size_t i = 0; i < n1; ++i) {
    if (!side[i]) continue;
    out.cut.push_back(i);
    out.cut_left += mu1[i];
    for (std::size_t j = 0; j < n2; ++j)
      if (!hit[j] && psi(i, j)) {
        hit[j] = true;
        out.cut_right += mu2[j];
      }
  }
  return out;
}

std::string format_conclusion(const Conclusion& c, const std::string& e1, const std::string& e2) {
  std::string rel = c.mode == LemmaMode::Iff ? " = " : " <= ";
  std::string s = "Pr[" + e1 + "]" + rel + "Pr[" + e2 + "]";
  s += " (" + to_string(c.lhs) + rel + to_string(c.rhs) + ", slack " + to_string(c.slack) + ")";
  return (c.certified ? "CERTIFIED " : "NOT CERTIFIED ") + s;
}

}  // namespace couplecheck
