#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/properties.hpp"
#include "couplecheck/semantics.hpp"

using namespace couplecheck;

namespace {

PropertyQuery query(std::shared_ptr<const TypedProgram> tp, std::vector<std::string> vars, PropertyKind kind,
                    Route route, std::uint32_t fuel = 8) {
  PropertyQuery q;
  q.program = std::move(tp);
  q.vars = std::move(vars);
  q.kind = kind;
  q.route = route;
  q.opt.fuel = fuel;
  return q;
}

// joint law of the named variables in the final state
std::map<std::vector<Value>, Rational> joint(const TypedProgram& tp, const std::vector<std::string>& vars,
                                             std::uint32_t fuel = 8) {
  auto d = run_program(tp, fuel);
  std::map<std::vector<Value>, Rational> out;
  for (const auto& [s, p] : d.mass) {
    std::vector<Value> key;
    for (const auto& v : vars) key.push_back(s.vals[tp.layout->find(v)]);
    out[key] += p;
  }
  return out;
}

bool uniform_by_definition(const TypedProgram& tp, const std::string& x) {
  auto j = joint(tp, {x});
  auto carrier = enumerate_type(*tp.layout->vars[tp.layout->find(x)].type);
  Rational share = Rational(1) / static_cast<long>(carrier.size());
  for (const auto& v : carrier) {
    auto it = j.find({v});
    if ((it == j.end() ? Rational(0) : it->second) != share) return false;
  }
  return true;
}

bool indep_by_definition(const TypedProgram& tp, const std::string& x, const std::string& y) {
  auto j = joint(tp, {x, y});
  std::map<Value, Rational> px, py;
  for (const auto& [k, p] : j) {
    px[k[0]] += p;
    py[k[1]] += p;
  }
  for (const auto& [a, pa] : px)
    for (const auto& [b, pb] : py) {
      auto it = j.find({a, b});
      if ((it == j.end() ? Rational(0) : it->second) != pa * pb) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("uniformizer is certified on all routes with the residual as slack") {
  auto tp = testing::load_corpus("uniformizer.pw", {{"p", "1/3"}});
  for (auto route : {Route::Oracle, Route::Semantic, Route::Proof}) {
    auto q = query(tp, {"x"}, PropertyKind::Uniform, route, 60);
    q.proof_path = testing::corpus("uniformizer.prf");
    auto r = check_property(q);
    CAPTURE(route_name(route));
    CHECK(r.ok());
    CHECK(r.slack == power(Rational(5, 9), 60));
    CHECK(r.line().rfind("UNIFORM x: CERTIFIED (slack ", 0) == 0);
  }
}

TEST_CASE("report line for an exact pass") {
  auto tp = testing::load("program p\nvar x : bool = false;\nbegin\nx <$ flip(1/2);\nend\n");
  auto r = check_uniform(query(tp, {"x"}, PropertyKind::Uniform, Route::Oracle));
  CHECK(r.line() == "UNIFORM x: CERTIFIED (slack 0)");
  auto biased = testing::load("program p\nvar x : bool = false;\nbegin\nx <$ flip(1/3);\nend\n");
  auto f = check_uniform(query(biased, {"x"}, PropertyKind::Uniform, Route::Oracle));
  CHECK(f.status == Status::Failed);
  CHECK(f.max_deviation == Rational(1, 6));
}

TEST_CASE("uniformity: oracle and semantic route agree with the definition") {
  int uniform = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    testing::ProgramGen gen(300 + s);
    auto tp = testing::load(gen.program());
    bool truth = uniform_by_definition(*tp, "u");
    auto oracle = check_uniform(query(tp, {"u"}, PropertyKind::Uniform, Route::Oracle));
    auto semantic = check_uniform(query(tp, {"u"}, PropertyKind::Uniform, Route::Semantic));
    CAPTURE(s);
    CHECK(oracle.ok() == truth);
    CHECK(semantic.ok() == truth);
    uniform += truth ? 1 : 0;
  }
  CHECK(uniform > 0);
  CHECK(uniform < 50);
}

TEST_CASE("independence: oracle and self-composition agree with the definition") {
  int indep = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    testing::ProgramGen gen(700 + s);
    auto tp = testing::load(gen.program());
    bool truth = indep_by_definition(*tp, "x", "u");
    auto oracle = check_indep_selfcomp(query(tp, {"x", "u"}, PropertyKind::Indep, Route::Oracle));
    auto semantic = check_indep_selfcomp(query(tp, {"x", "u"}, PropertyKind::Indep, Route::Semantic));
    CAPTURE(s);
    CHECK(oracle.ok() == truth);
    CHECK(semantic.ok() == truth);
    indep += truth ? 1 : 0;
  }
  CHECK(indep > 0);
  CHECK(indep < 30);
}

TEST_CASE("conditional independence: definition and unfolded identity coincide") {
  int held = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    testing::ProgramGen gen(900 + s);
    auto tp = testing::load(gen.program());
    auto j = joint(*tp, {"x", "u", "y"});
    Rational pe = 0;
    for (const auto& [k, p] : j)
      if (k[2].as_bool()) pe += p;
    auto q = query(tp, {"x", "u"}, PropertyKind::CondIndep, Route::Oracle);
    q.event = "y";
    if (pe == 0) {
      CHECK_THROWS_AS(check_cond_indep(q), PreconditionError);
      continue;
    }
    std::map<Value, Rational> px, pu;
    std::map<std::pair<Value, Value>, Rational> pxu;
    for (const auto& [k, p] : j) {
      if (!k[2].as_bool()) continue;
      px[k[0]] += p;
      pu[k[1]] += p;
      pxu[{k[0], k[1]}] += p;
    }
    bool definition = true, unfolded = true;
    for (const auto& a : {Value::boolean(false), Value::boolean(true)})
      for (std::int64_t b = 0; b < 3; ++b) {
        Rational joint_e = pxu[{a, Value::integer(b)}], xe = px[a], ue = pu[Value::integer(b)];
        if (joint_e / pe != (xe / pe) * (ue / pe)) definition = false;
        if (joint_e * pe != xe * ue) unfolded = false;
      }
    CHECK(definition == unfolded);
    CHECK(check_cond_indep(q).ok() == definition);
    held += definition ? 1 : 0;
  }
  CHECK(held > 0);
}

TEST_CASE("ballot conclusion chain") {
  for (auto [a, b] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{3, 2}}) {
    auto tp = load_program_file(testing::corpus("ballot.pw"), {{"nA", std::to_string(a)}, {"nB", std::to_string(b)}});
    const std::string totals = "xA = nA && xB = nB";
    auto phi = probability(tp, "exists j : range(nA + nB), l[j] = 0", totals, 8);
    auto not_phi = probability(tp, "forall j : range(nA + nB), l[j] != 0", totals, 8);
    auto cross = probability(tp, "l[0] * l[nA + nB - 1] < 0", totals, 8);
    CHECK(phi.residual == 0);
    CHECK(phi.value == 2 * cross.value);
    Rational expect(a - b, a + b);
    expect.canonicalize();
    CHECK(not_phi.value == expect);
    CHECK(phi.value + not_phi.value == 1);
  }
}

TEST_CASE("conditioning on an impossible event") {
  auto tp = testing::load_corpus("condindep.pw");
  auto q = query(tp, {"w", "w'"}, PropertyKind::CondIndep, Route::Oracle);
  q.event = "y && !y";
  CHECK_THROWS_AS(check_property(q), PreconditionError);
}

TEST_CASE("canonical judgments") {
  auto tp = testing::load_corpus("uniformizer.pw");
  auto u = uniform_judgment(query(tp, {"x"}, PropertyKind::Uniform, Route::Proof));
  REQUIRE(u.metas.size() == 2);
  CHECK(u.metas[0].name == "a");
  CHECK(u.metas[1].name == "a'");
  CHECK(u.pre == "EqMem");
  auto clash = testing::load("program p\nvar a : bool = false;\nbegin\na <$ flip(1/2);\nend\n");
  auto c = uniform_judgment(query(clash, {"a"}, PropertyKind::Uniform, Route::Proof));
  CHECK(c.metas[0].name == "b");
  auto ci = testing::load_corpus("condindep.pw");
  auto q = query(ci, {"w", "w'"}, PropertyKind::Indep, Route::Proof);
  auto s = selfcomp_judgment(q);
  CHECK(s.metas.size() == 2);
  CHECK(s.pre == "eqmem(1, 2)");
}

TEST_CASE("expression lists and carrier restriction") {
  auto walk = testing::load_corpus("walk.pw", {{"n", "3"}});
  auto r = check_uniform(query(walk, {"ret.0"}, PropertyKind::Uniform, Route::Oracle, 200));
  CHECK(r.ok());
  CHECK(r.slack > 0);
  CHECK(r.slack <= Rational(1, 1 << 30));
  auto rej = testing::load_corpus("rejection.pw");
  auto q = query(rej, {"x"}, PropertyKind::Uniform, Route::Oracle, 40);
  CHECK(check_uniform(q).status == Status::Failed);
  q.event = "x % 2 = 0";
  auto ok = check_uniform(q);
  CHECK(ok.ok());
  CHECK(ok.slack == power(Rational(1, 2), 40));
}

TEST_CASE("independence via uniformity") {
  auto kw = testing::load_corpus("kwise.pw");
  auto r = check_indep_via_uniformity(query(kw, {"x[0]", "x[2]"}, PropertyKind::IndepViaUniform, Route::Oracle));
  CHECK(r.ok());
  auto tp = testing::load("program p\nvar x : bool = false;\nvar y : bool = false;\nbegin\n"
                          "x <$ flip(1/3);\ny <$ flip(1/2);\nend\n");
  auto na = check_indep_via_uniformity(query(tp, {"x", "y"}, PropertyKind::IndepViaUniform, Route::Oracle));
  CHECK(na.status == Status::NotApplicable);
}

TEST_CASE("sampled families are marked") {
  auto kw = testing::load_corpus("kwise.pw", {{"p", "5"}});
  auto q = query(kw, {"x[0]", "x[1]"}, PropertyKind::Uniform, Route::Semantic);
  q.sample = 3;
  q.seed = 1;
  auto r = check_uniform(q);
  CHECK(r.ok());
  CHECK_FALSE(r.exhaustive);
  CHECK(r.checked == 3);
  CHECK(r.total == 625);
  CHECK(r.line().find("sampled 3 of 625") != std::string::npos);
}

TEST_CASE("conclude a probability from an accepted instance") {
  auto tp = testing::load_corpus("ballot.pw");
  auto ps = load_proof_file(testing::corpus("ballot.prf"));
  auto j = judgment_from_header(*ps.header, tp, ps.dir);
  MetaEnv env = {{"i", Value::integer(2)}};
  CheckOptions opt;
  opt.fuel = 8;
  auto res = check_proof(j, env, ps, opt);
  REQUIRE(res.accepted);
  auto c = conclude_probability(j, env, &res, opt);
  CHECK(c.certified);
  CHECK(c.mode == LemmaMode::Iff);
  CHECK(c.lhs == c.rhs);
  CHECK(c.lhs == Rational(1, 8));
  auto without = conclude_probability(j, env, nullptr, opt);
  CHECK(without.certified);
}
