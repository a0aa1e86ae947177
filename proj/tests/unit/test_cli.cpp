#include <sys/wait.h>

#include <array>
#include <cstdio>

#include "doctest.h"
#include "helpers.hpp"

#include "couplecheck/corpus.hpp"
#include "couplecheck/report.hpp"

using namespace couplecheck;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args) {
  std::string cmd = std::string(COUPLECHECK_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

Report sample_report() {
  Report r;
  r.property = "INDEP";
  r.subject = "w, w'";
  r.route = Route::Semantic;
  r.status = Status::Failed;
  r.slack = Rational(1, 1024);
  r.max_deviation = Rational(1, 36);
  r.checked = 3;
  r.total = 4;
  r.exhaustive = false;
  r.instances = {{"a1=false, a2=false", false, "coupling infeasible"}, {"a1=true, a2=true", true, ""}};
  r.notes = {"sampled"};
  r.message = "dependent";
  return r;
}

}  // namespace

TEST_CASE("empty results give the header alone") {
  CHECK(format_report({}, false) == "couplecheck: 0 result(s)\n");
  auto j = nlohmann::ordered_json::parse(format_report({}, true));
  CHECK(j["tool"] == "couplecheck");
  CHECK(j["results"].empty());
}

TEST_CASE("JSON reports round-trip") {
  Report a = sample_report();
  Report b;
  b.property = "UNIFORM";
  b.subject = "x";
  auto text = format_report({a, b}, true);
  auto parsed = nlohmann::ordered_json::parse(text);
  REQUIRE(parsed["results"].size() == 2);
  CHECK(report_from_json(parsed["results"][0]) == a);
  CHECK(report_from_json(parsed["results"][1]) == b);
  CHECK(parsed["results"][0]["slack"] == "1/1024");
  CHECK(parsed["results"][1]["slack"] == "0");
  // field order is fixed
  CHECK(format_report({a, b}, true) == text);
  std::vector<std::string> keys;
  for (auto it = parsed["results"][0].begin(); it != parsed["results"][0].end(); ++it) keys.push_back(it.key());
  CHECK(keys.front() == "property");
}

TEST_CASE("text reports show the slack") {
  auto text = format_report({sample_report()}, false);
  CHECK(text.find("slack 1/1024") != std::string::npos);
  CHECK(text.find("a1=false, a2=false") != std::string::npos);
}

TEST_CASE("corpus runner") {
  CorpusOptions opt;
  CHECK_THROWS_AS(run_corpus(testing::corpus("corpus.json"), [] {
                    CorpusOptions o;
                    o.filter = "nonexistent";
                    return o;
                  }()),
                  UsageError);
  CHECK_THROWS_AS(run_corpus("/nonexistent/corpus.json", opt), UsageError);
  opt.filter = "uniformizer";
  auto s = run_corpus(testing::corpus("corpus.json"), opt);
  CHECK(s.all_pass());
  CHECK(s.entries == std::vector<std::string>{"uniformizer"});
  CHECK(s.max_slack == power(Rational(5, 9), 60));
  auto j = summary_to_json(s);
  CHECK(j.dump() == summary_to_json(run_corpus(testing::corpus("corpus.json"), opt)).dump());
}

TEST_CASE("exit codes") {
  CHECK(cli("corpus nonexistent").status == 2);
  CHECK(cli("corpus uniformizer").status == 0);
  CHECK(cli("--bogus").status == 2);
  CHECK(cli("uniform " + testing::corpus("rejection.pw") + " --vars x --fuel 40").status == 1);
  CHECK(cli("uniform " + testing::corpus("rejection.pw") + " --vars x --event 'x % 2 = 0' --fuel 40").status == 0);
  CHECK(cli("cond-indep " + testing::corpus("condindep.pw") + " --vars w,w\\' --event 'y && !y'").status == 2);
  CHECK(cli("run /nonexistent.pw").status == 2);
  CHECK(cli("--help").status == 0);
}

TEST_CASE("output is deterministic") {
  auto a = cli("--json --jobs 2 corpus pairwise");
  auto b = cli("--json corpus pairwise");
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  auto p = cli("prove " + testing::corpus("uniformizer.pw") + " " + testing::corpus("uniformizer.prf") +
               " --conclude --fuel 60");
  CHECK(p.status == 0);
  CHECK(p.out == cli("prove " + testing::corpus("uniformizer.pw") + " " + testing::corpus("uniformizer.prf") +
                     " --conclude --fuel 60")
                     .out);
}

TEST_CASE("other subcommands") {
  auto run = cli("run " + testing::corpus("condindep.pw") + " --bind px=1/3");
  CHECK(run.status == 0);
  CHECK_FALSE(run.out.empty());
  CHECK(cli("lossless " + testing::corpus("uniformizer.pw") + " --fuel 60").status == 0);
  CHECK(cli("lossless " + testing::corpus("uniformizer.pw") + " --fuel 5").status == 1);
  auto sc = cli("selfcompose " + testing::corpus("uniformizer.pw") + " -n 2");
  CHECK(sc.status == 0);
  CHECK(sc.out.find("x#2") != std::string::npos);
  CHECK(cli("coupling --left '0=1/2,1=1/2' --right '0=1/2,1=1/2' --psi 'x{1} = x{2}'").status == 0);
  CHECK(cli("coupling --left '0=1/2,1=1/2' --right '0=1/4,1=3/4' --psi 'x{1} = x{2}'").status == 1);
  CHECK(cli("coupling --left '0=1/2,1=1/2' --right '0=1/4,1=3/4' --psi 'x{1} = x{2}' --slack 1/4").status == 0);
  CHECK(cli("indep " + testing::corpus("condindep.pw") + " --vars w,w\\' --bind px=1/3 --bind pz=1/3").status ==
        1);
  CHECK(cli("indep " + testing::corpus("kwise.pw") + " --vars x[0],x[1] --via-uniform").status == 0);
}
