#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/prhl.hpp"

using namespace couplecheck;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

struct Script {
  Judgment judgment;
  ProofScript script;
};

Script script_for(const std::string& program, const Bindings& b, const std::string& text) {
  auto tp = testing::load_corpus(program, b);
  auto ps = parse_proof_script(text, CORPUS_DIR);
  REQUIRE(ps.header.has_value());
  auto j = judgment_from_header(*ps.header, tp, ps.dir, b);
  return {j, ps};
}

FamilyResult check(const std::string& program, const Bindings& b, const std::string& text) {
  auto s = script_for(program, b, text);
  return check_proof_family(s.judgment, s.script, {});
}

struct Shipped {
  const char* program;
  const char* proof;
  Bindings bindings;
  unsigned fuel;
};

const std::vector<Shipped> kShipped = {
    {"uniformizer.pw", "uniformizer.prf", {{"p", "1/3"}}, 60},
    {"walk.pw", "walk.prf", {{"n", "3"}}, 200},
    {"ballot.pw", "ballot.prf", {{"nA", "3"}, {"nB", "2"}}, 8},
    {"pairwise.pw", "pairwise2.prf", {{"n", "2"}}, 8},
    {"pairwise.pw", "pairwise3.prf", {{"n", "3"}}, 8},
    {"kwise.pw", "kwise.prf", {{"p", "3"}}, 8},
    {"condindep.pw", "condindep.prf", {}, 8},
    {"rejection.pw", "rejection.prf", {}, 40},
};

}  // namespace

TEST_CASE("a flip coupled with its negation") {
  auto tp = testing::load("program p\nvar x : bool = false;\nbegin\nx <$ flip(1/2);\nend\n");
  Judgment j{tp, tp, {}, "", "true", "x{1} = !x{2}", ""};
  auto ok = check_proof(j, {}, parse_proof_script("(proof (rand :f \"fun v -> !v\"))"));
  CHECK(ok.accepted);
  auto id = check_proof(j, {}, parse_proof_script("(proof (rand))"));
  CHECK_FALSE(id.accepted);
  CHECK_FALSE(id.rule.empty());
  auto biased = testing::load("program p\nvar x : bool = false;\nbegin\nx <$ flip(1/3);\nend\n");
  Judgment jb{biased, biased, {}, "", "true", "x{1} = !x{2}", ""};
  auto r = check_proof(jb, {}, parse_proof_script("(proof (rand :f \"fun v -> !v\"))"));
  CHECK_FALSE(r.accepted);
  CHECK(r.rule == "Rand");
  CHECK_FALSE(validate_semantic(jb, {}).holds);
  CHECK(validate_semantic(j, {}).holds);
}

TEST_CASE("meta families are enumerated in order") {
  auto tp = testing::load("program p\nvar x : range(3) = 0;\nbegin\nskip;\nend\n");
  Judgment j{tp, tp, {{"a", "range(3)"}, {"b", "bool"}}, "a != 1", "true", "x{1} = x{2}", ""};
  auto fam = instantiate_family(j);
  REQUIRE(fam.size() == 4);
  CHECK(format_env(fam[0]) == "a=0, b=false");
  CHECK(format_env(fam[3]) == "a=2, b=true");
}

TEST_CASE("every shipped proof is accepted and semantically valid") {
  for (const auto& s : kShipped) {
    CAPTURE(s.proof);
    auto sc = script_for(s.program, s.bindings, slurp(testing::corpus(s.proof)));
    CheckOptions opt;
    opt.fuel = s.fuel;
    auto fam = check_proof_family(sc.judgment, sc.script, opt);
    CHECK(fam.accepted);
    CHECK_FALSE(fam.instances.empty());
    // the semantic check is exhaustive over the instances for the small
    // families and spot-checks the larger ones
    std::size_t stride = fam.instances.size() > 20 ? fam.instances.size() / 7 : 1;
    for (std::size_t i = 0; i < fam.instances.size(); i += stride) {
      const auto& [env, res] = fam.instances[i];
      CAPTURE(format_env(env));
      if (!res.accepted) continue;
      auto sem = validate_semantic(sc.judgment, env, opt);
      CHECK(sem.holds);
    }
  }
}

TEST_CASE("uniformizer: a weakened invariant is rejected") {
  auto text = slurp(testing::corpus("uniformizer.prf"));
  auto weak = replace_once(text, "x{1} = x{2} && y{1} = y{2}", "true");
  auto fam = check("uniformizer.pw", {}, weak);
  CHECK_FALSE(fam.accepted);
}

TEST_CASE("uniformizer: the loop body needs the swap") {
  auto text = slurp(testing::corpus("uniformizer.prf"));
  auto noswap = replace_once(text, "(struct :right (swap 1 2)", "");
  noswap = replace_once(noswap, "(seq (rand) (rand)))))))", "(seq (rand) (rand))))))");
  auto fam = check("uniformizer.pw", {}, noswap);
  CHECK_FALSE(fam.accepted);
  bool any_rejected = false;
  for (const auto& [env, r] : fam.instances) any_rejected = any_rejected || !r.accepted;
  CHECK(any_rejected);
}

TEST_CASE("rejection sampling: the literal invariant fails without pinning x") {
  auto text = slurp(testing::corpus("rejection.prf"));
  auto plain = replace_once(text, "(struct :left (replace 1 2 (use pinned)) :right (replace 1 2 (use pinned))", "");
  plain = replace_once(plain, "(assg))))))", "(assg)))))");
  auto fam = check("rejection.pw", {}, plain);
  CHECK_FALSE(fam.accepted);
  std::size_t rejected = 0;
  for (const auto& [env, r] : fam.instances) rejected += r.accepted ? 0 : 1;
  CHECK(rejected == fam.instances.size());
}

TEST_CASE("conditional independence: the copies must be reordered first") {
  auto text = slurp(testing::corpus("condindep.prf"));
  auto flat = replace_once(text, "(struct :left ((move 8 1) (move 4 2)) :right ((move 3 1) (move 8 2))", "");
  flat = replace_once(flat, "(assg) (assg))))", "(assg) (assg)))");
  CHECK_FALSE(check("condindep.pw", {}, flat).accepted);
}

TEST_CASE("walk: the mirrored branch needs the negation coupling") {
  auto text = slurp(testing::corpus("walk.prf"));
  auto same = replace_once(text, "(rand :f \"fun v -> -v\")", "(rand)");
  CHECK_FALSE(check("walk.pw", {{"n", "3"}}, same).accepted);
}

TEST_CASE("ballot: the reflection must stop at the first tie") {
  auto text = slurp(testing::corpus("ballot.prf"));
  auto always = replace_once(text, "if len(l{1}) < i then (if v = A then B else A) else v", "if v = A then B else A");
  CHECK_FALSE(check("ballot.pw", {{"nA", "2"}, {"nB", "1"}}, always).accepted);
}

TEST_CASE("rejections name the rule and the position") {
  auto text = slurp(testing::corpus("uniformizer.prf"));
  auto weak = replace_once(text, "x{1} = x{2} && y{1} = y{2}", "true");
  auto fam = check("uniformizer.pw", {}, weak);
  for (const auto& [env, r] : fam.instances) {
    if (r.accepted) continue;
    CHECK_FALSE(r.rule.empty());
    CHECK_FALSE(r.reason.empty());
    CHECK_FALSE(r.to_string().empty());
  }
}
