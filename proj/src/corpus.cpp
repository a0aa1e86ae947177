#include "couplecheck/corpus.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "couplecheck/assertion.hpp"
#include "couplecheck/parser.hpp"
#include "couplecheck/semantics.hpp"
#include "couplecheck/transform.hpp"

namespace couplecheck {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

bool CorpusSummary::all_pass() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const CheckOutcome& o) { return o.pass; });
}

namespace {

std::string bindings_text(const Bindings& b) {
  std::string s;
  for (const auto& [k, v] : b) s += (s.empty() ? "" : ", ") + k + "=" + v;
  return s;
}

Bindings to_bindings(const json& j) {
  Bindings b;
  for (const auto& [k, v] : j.items()) b[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return b;
}

std::vector<std::vector<std::string>> subsets(const std::vector<std::string>& from, std::size_t k) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k == 0 || k > from.size()) return out;
  while (true) {
    std::vector<std::string> s;
    for (auto i : idx) s.push_back(from[i]);
    out.push_back(s);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == from.size() - k + i - 1) --i;
    if (i == 0) return out;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
  return s;
}

Status expected_status(const std::string& e) {
  if (e == "certified") return Status::Certified;
  if (e == "failed") return Status::Failed;
  if (e == "not-applicable") return Status::NotApplicable;
  throw UsageError("bad expectation " + e);
}

class EntryRunner {
 public:
  EntryRunner(const json& entry, fs::path dir, const CorpusOptions& opt, unsigned jobs)
      : entry_(entry), dir_(std::move(dir)), opt_(opt), jobs_(jobs) {
    id_ = entry.at("id").get<std::string>();
    fuel_ = opt.fuel ? *opt.fuel : entry.value("fuel", 64u);
  }

  std::vector<CheckOutcome> run() {
    for (const auto& c : entry_.at("checks")) {
      const json& insts = c.contains("instances") ? c["instances"] : entry_.value("instances", json::array({json::object()}));
      for (const auto& i : insts) {
        auto b = to_bindings(i);
        try {
          run_check(c, b);
        } catch (const BudgetError& e) {
          add(b, label(c), "-", false, std::string("budget exceeded: ") + e.what());
        } catch (const std::exception& e) {
          add(b, label(c), "-", false, std::string("error: ") + e.what());
        }
      }
    }
    return std::move(out_);
  }

 private:
  const json& entry_;
  fs::path dir_;
  const CorpusOptions& opt_;
  unsigned jobs_;
  std::string id_;
  std::uint32_t fuel_;
  std::map<Bindings, std::shared_ptr<const TypedProgram>> programs_;
  std::vector<CheckOutcome> out_;

  CheckOptions check_options() const {
    CheckOptions o;
    o.fuel = fuel_;
    o.tol = opt_.tol;
    o.seed_enum = opt_.seed_enum;
    return o;
  }

  bool wants(Route r, const json& c) const {
    if (!opt_.routes.count(r)) return false;
    if (!c.contains("routes")) return true;
    for (const auto& x : c["routes"])
      if (x.get<std::string>() == route_name(r)) return true;
    return false;
  }

  std::shared_ptr<const TypedProgram> program(const Bindings& b) {
    auto it = programs_.find(b);
    if (it != programs_.end()) return it->second;
    auto path = (dir_ / entry_.at("program").get<std::string>()).string();
    auto tp = std::make_shared<const TypedProgram>(load_program_file(path, b));
    programs_[b] = tp;
    return tp;
  }

  std::string label(const json& c) const {
    auto kind = c.at("kind").get<std::string>();
    if (c.contains("vars")) return kind + " " + join(c["vars"].get<std::vector<std::string>>());
    if (c.contains("choose")) return kind + " " + std::to_string(c["choose"].get<int>()) + "-subsets";
    if (c.contains("proof")) return kind + " " + c["proof"].get<std::string>();
    if (c.contains("event")) return kind + " " + c["event"].get<std::string>();
    return kind;
  }

  void add(const Bindings& b, std::string check, std::string route, bool pass, std::string detail,
           Rational slack = 0) {
    out_.push_back({id_, bindings_text(b), std::move(check), std::move(route), pass, std::move(detail), std::move(slack)});
  }

  void run_check(const json& c, const Bindings& b) {
    auto kind = c.at("kind").get<std::string>();
    if (kind == "uniform" || kind == "indep" || kind == "indep-via-uniform" || kind == "cond-indep")
      return property(c, b, kind);
    if (kind == "prove") return prove(c, b);
    if (kind == "conclude") return conclude(c, b);
    if (kind == "probability") return prob(c, b);
    if (kind == "lossless") return lossless(c, b);
    if (kind == "while-split") return split(c, b);
    throw UsageError("unknown check kind " + kind);
  }

  void property(const json& c, const Bindings& b, const std::string& kind) {
    std::vector<std::vector<std::string>> var_sets;
    if (c.contains("vars")) var_sets.push_back(c["vars"].get<std::vector<std::string>>());
    if (c.contains("choose"))
      var_sets = subsets(c.at("from").get<std::vector<std::string>>(), c["choose"].get<std::size_t>());
    auto expect = c.value("expect", std::string("certified"));
    for (Route r : {Route::Proof, Route::Semantic, Route::Oracle}) {
      if (!wants(r, c)) continue;
      if (r == Route::Proof && !c.contains("proof")) continue;
      for (const auto& vars : var_sets) {
        PropertyQuery q;
        q.program = program(b);
        q.vars = vars;
        q.kind = kind == "uniform"     ? PropertyKind::Uniform
                 : kind == "indep"     ? PropertyKind::Indep
                 : kind == "cond-indep" ? PropertyKind::CondIndep
                                        : PropertyKind::IndepViaUniform;
        q.event = c.value("event", std::string());
        q.route = r;
        if (r == Route::Proof) q.proof_path = (dir_ / c["proof"].get<std::string>()).string();
        q.opt = check_options();
        q.jobs = jobs_;
        std::string what = kind + " " + join(vars) + (q.event.empty() ? "" : " | " + q.event);
        try {
          auto rep = check_property(q);
          add(b, what, route_name(r), expect != "error" && rep.status == expected_status(expect), rep.line(),
              rep.slack);
        } catch (const PreconditionError& e) {
          add(b, what, route_name(r), expect == "error", std::string("precondition: ") + e.what());
        }
      }
    }
  }

  void prove(const json& c, const Bindings& b) {
    bool proof = wants(Route::Proof, c), semantic = wants(Route::Semantic, c) && c.value("semantic", true);
    if (!proof && !semantic) return;
    auto path = (dir_ / c.at("proof").get<std::string>()).string();
    auto script = load_proof_file(path);
    if (!script.header) throw UsageError(path + ": no judgment header");
    auto j = judgment_from_header(*script.header, program(b), script.dir, b);
    auto what = "prove " + c["proof"].get<std::string>();
    if (proof) {
      auto expect = c.value("expect", std::string("accepted"));
      auto fr = check_proof_family(j, script, check_options());
      std::size_t acc = 0;
      std::string first;
      for (const auto& [env, pr] : fr.instances) {
        if (pr.accepted) ++acc;
        else if (first.empty()) first = format_env(env) + ": " + pr.to_string();
      }
      std::string detail = std::to_string(acc) + "/" + std::to_string(fr.instances.size()) + " instances accepted";
      if (!first.empty()) detail += "; " + first;
      add(b, what, "proof", fr.accepted == (expect == "accepted"), detail);
    }
    if (semantic) {
      Rational slack = 0;
      std::size_t holds = 0, total = 0;
      std::string first;
      for (const auto& env : instantiate_family(j)) {
        auto sr = validate_semantic(j, env, check_options());
        ++total;
        slack = std::max(slack, sr.max_slack);
        if (sr.holds) ++holds;
        else if (first.empty()) first = format_env(env) + ": " + sr.detail;
      }
      std::string detail = std::to_string(holds) + "/" + std::to_string(total) + " instances hold semantically";
      if (!first.empty()) detail += "; " + first;
      add(b, what, "semantic", holds == total, detail, slack);
    }
  }

  void conclude(const json& c, const Bindings& b) {
    if (!wants(Route::Proof, c)) return;
    auto path = (dir_ / c.at("proof").get<std::string>()).string();
    auto script = load_proof_file(path);
    auto j = judgment_from_header(*script.header, program(b), script.dir, b);
    auto want = to_bindings(c.at("meta"));
    std::optional<MetaEnv> env;
    for (const auto& e : instantiate_family(j)) {
      bool match = true;
      for (const auto& [name, v] : e) {
        auto it = want.find(name);
        if (it == want.end() || it->second != format_value(v, *type_of(j, name))) match = false;
      }
      if (match) env = e;
    }
    std::string what = "conclude " + c["proof"].get<std::string>() + " at " + bindings_text(want);
    if (!env) {
      add(b, what, "proof", false, "no such instance");
      return;
    }
    auto pr = check_proof(j, *env, script, check_options());
    if (!pr.accepted) {
      add(b, what, "proof", false, pr.to_string());
      return;
    }
    auto concl = conclude_probability(j, *env, &pr, check_options());
    bool pass = concl.certified;
    std::string detail = concl.text;
    if (c.contains("value")) {
      auto v = parse_rational(c["value"].get<std::string>());
      Rational d = concl.lhs > v ? Rational(concl.lhs - v) : Rational(v - concl.lhs);
      pass = pass && d <= concl.slack;
      detail += "; expected " + to_string(v);
    }
    add(b, what, "proof", pass, detail, concl.slack);
  }

  TypePtr type_of(const Judgment& j, const std::string& meta) const {
    for (const auto& m : j.metas)
      if (m.name == meta) {
        Scope sc = j.left->scope();
        return resolve_type(*parse_type(m.type), sc);
      }
    throw UsageError("unknown meta " + meta);
  }

  void prob(const json& c, const Bindings& b) {
    if (!wants(Route::Oracle, c)) return;
    auto event = c.at("event").get<std::string>();
    auto given = c.value("given", std::string());
    auto expect = parse_rational(c.at("expect").get<std::string>());
    auto r = probability(*program(b), event, given, fuel_);
    Rational d = r.value > expect ? Rational(r.value - expect) : Rational(expect - r.value);
    Rational slack = given.empty() ? r.residual : Rational(r.residual / r.given);
    std::string what = "Pr[" + event + (given.empty() ? "" : " | " + given) + "]";
    std::string detail = what + " = " + to_string(r.value) + ", expected " + to_string(expect);
    if (c.contains("derivation")) detail += " (" + c["derivation"].get<std::string>() + ")";
    add(b, "probability " + what, "oracle", d <= slack, detail, slack);
  }

  void lossless(const json& c, const Bindings& b) {
    if (!wants(Route::Oracle, c)) return;
    auto r = check_lossless(*program(b), fuel_, opt_.tol, opt_.seed_enum);
    auto expect = c.value("expect", std::string("lossless"));
    bool ok = r.kind != LosslessKind::NotLossless;
    add(b, "lossless", "oracle", ok == (expect == "lossless"), r.to_string(), r.residual);
  }

  void split(const json& c, const Bindings& b) {
    if (!wants(Route::Oracle, c)) return;
    auto tp = program(b);
    auto at = c.at("at").get<std::size_t>();
    Block body = tp->body;
    std::size_t pos = at - 1;
    for (const auto& cond : c.at("conditions")) {
      if (pos >= body.size()) throw UsageError("split position out of range");
      Scope sc = tp->scope();
      sc.side[0] = tp->layout.get();
      auto e = check_bool(parse_expr(cond.get<std::string>()), sc);
      auto pieces = while_split(*body[pos], e);
      body[pos] = pieces[1];
      body.insert(body.begin() + static_cast<std::ptrdiff_t>(pos), pieces[0]);
      ++pos;
    }
    auto seeds = initial_states(*tp, opt_.seed_enum);
    auto r = semantic_equiv(tp->body, body, seeds, fuel_);
    auto n = c["conditions"].size() + 1;
    add(b, "while-split " + std::to_string(n) + "-way at " + std::to_string(at), "oracle", r.equivalent,
        r.equivalent ? "output distributions identical, residual included" : r.detail);
  }
};

}  // namespace

CorpusSummary run_corpus(const std::string& corpus_json, const CorpusOptions& opt) {
  std::ifstream in(corpus_json);
  if (!in) throw UsageError("cannot open corpus " + corpus_json);
  json doc = json::parse(in);
  auto dir = fs::path(corpus_json).parent_path();
  std::vector<const json*> entries;
  for (const auto& e : doc.at("entries"))
    if (fnmatch(opt.filter.c_str(), e.at("id").get<std::string>().c_str(), 0) == 0) entries.push_back(&e);
  if (entries.empty()) throw UsageError("no corpus entry matches '" + opt.filter + "'");
  std::sort(entries.begin(), entries.end(),
            [](const json* a, const json* b) { return a->at("id").get<std::string>() < b->at("id").get<std::string>(); });
  std::vector<std::vector<CheckOutcome>> results(entries.size());
  unsigned inner = entries.size() == 1 ? opt.jobs : 1;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < entries.size();) results[i] = EntryRunner(*entries[i], dir, opt, inner).run();
  };
  unsigned n = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(entries.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  CorpusSummary s;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    s.entries.push_back(entries[i]->at("id").get<std::string>());
    for (auto& o : results[i]) {
      s.max_slack = std::max(s.max_slack, o.slack);
      s.outcomes.push_back(std::move(o));
    }
  }
  return s;
}

json summary_to_json(const CorpusSummary& s) {
  json j;
  j["entries"] = s.entries;
  std::size_t passed = 0;
  j["outcomes"] = json::array();
  for (const auto& o : s.outcomes) {
    passed += o.pass;
    j["outcomes"].push_back({{"entry", o.entry},
                             {"bindings", o.bindings},
                             {"check", o.check},
                             {"route", o.route},
                             {"pass", o.pass},
                             {"detail", o.detail},
                             {"slack", to_string(o.slack)}});
  }
  j["passed"] = passed;
  j["failed"] = s.outcomes.size() - passed;
  j["max_slack"] = to_string(s.max_slack);
  j["all_pass"] = s.all_pass();
  return j;
}

std::string format_summary(const CorpusSummary& s, bool as_json) {
  if (as_json) return summary_to_json(s).dump(2) + "\n";
  std::ostringstream os;
  std::size_t passed = 0;
  os << "corpus: " << s.entries.size() << " entr" << (s.entries.size() == 1 ? "y" : "ies") << ", "
     << s.outcomes.size() << " check(s)\n";
  for (const auto& o : s.outcomes) {
    passed += o.pass;
    os << (o.pass ? "PASS " : "FAIL ") << o.entry;
    if (!o.bindings.empty()) os << " [" << o.bindings << "]";
    os << " " << o.check << " (" << o.route << "): " << o.detail << "\n";
  }
  os << "summary: " << passed << " passed, " << s.outcomes.size() - passed << " failed, max slack "
     << to_string(s.max_slack);
  if (s.max_slack > 0) os << " (~" << approx(s.max_slack) << ")";
  os << "\n";
  return os.str();
}

}  // namespace couplecheck
