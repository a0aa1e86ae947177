#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "couplecheck/assertion.hpp"
#include "couplecheck/corpus.hpp"
#include "couplecheck/eval.hpp"
#include "couplecheck/parser.hpp"
#include "couplecheck/properties.hpp"
#include "couplecheck/report.hpp"
#include "couplecheck/semantics.hpp"
#include "couplecheck/transform.hpp"

#ifndef COUPLECHECK_CORPUS
#define COUPLECHECK_CORPUS "corpus/corpus.json"
#endif

using namespace couplecheck;
using json = nlohmann::ordered_json;

namespace {

struct Global {
  std::uint32_t fuel = 64;
  std::string tol = "1/2^30";
  bool json = false;
  unsigned jobs = 1;
  bool seed_enum = false;
};

// "p/q" where either side may be written b^e
Rational parse_tol(const std::string& s) {
  auto part = [](const std::string& t) {
    auto k = t.find('^');
    if (k == std::string::npos) return parse_rational(t);
    return power(parse_rational(t.substr(0, k)), static_cast<unsigned>(std::stoul(t.substr(k + 1))));
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) return part(s);
  return Rational(part(s.substr(0, slash)) / part(s.substr(slash + 1)));
}

Bindings parse_bindings(const std::vector<std::string>& xs) {
  Bindings b;
  for (const auto& x : xs) {
    auto k = x.find('=');
    if (k == std::string::npos || k == 0) throw UsageError("--bind expects NAME=VALUE, got " + x);
    b[x.substr(0, k)] = x.substr(k + 1);
  }
  return b;
}

// splits at commas outside brackets
std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& x : out) {
    auto a = x.find_first_not_of(' ');
    auto b = x.find_last_not_of(' ');
    x = a == std::string::npos ? "" : x.substr(a, b - a + 1);
  }
  std::erase_if(out, [](const std::string& x) { return x.empty(); });
  return out;
}

CheckOptions check_options(const Global& g) {
  CheckOptions o;
  o.fuel = g.fuel;
  o.tol = parse_tol(g.tol);
  o.seed_enum = g.seed_enum;
  return o;
}

int cmd_run(const Global& g, const std::string& file, const Bindings& b, const std::string& vars) {
  auto tp = load_program_file(file, b);
  auto mu = run_program(tp, g.fuel);
  std::vector<std::pair<std::string, Rational>> rows;
  if (vars.empty()) {
    for (const auto& [s, p] : mu.mass) rows.emplace_back(format_state(s, *tp.layout), p);
  } else {
    Scope sc = tp.scope();
    sc.side[0] = tp.layout.get();
    std::vector<ExprPtr> es;
    auto texts = split_list(vars);
    for (const auto& t : texts) es.push_back(check_expr(parse_expr(t), sc));
    std::map<std::vector<Value>, Rational> m;
    for (const auto& [s, p] : mu.mass) {
      EvalEnv env;
      env.st[0] = &s;
      std::vector<Value> v;
      for (const auto& e : es) v.push_back(eval(*e, env));
      m[v] += p;
    }
    for (const auto& [v, p] : m) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + texts[i] + " = " + format_value(v[i], *es[i]->type);
      rows.emplace_back(s, p);
    }
  }
  if (g.json) {
    json j;
    j["program"] = tp.name;
    j["fuel"] = g.fuel;
    j["outcomes"] = json::array();
    for (const auto& [s, p] : rows) j["outcomes"].push_back({{"outcome", s}, {"mass", to_string(p)}});
    j["residual"] = to_string(mu.residual);
    j["error"] = to_string(mu.error);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "RUN " << tp.name << " (fuel " << g.fuel << ")\n";
    for (const auto& [s, p] : rows) std::cout << "  " << to_string(p) << "  " << s << "\n";
    std::cout << "residual " << to_string(mu.residual) << "\n";
    std::cout << "error " << to_string(mu.error);
    if (!mu.first_error.empty()) std::cout << " (" << mu.first_error << ")";
    std::cout << "\n";
  }
  return 0;
}

int cmd_lossless(const Global& g, const std::string& file, const Bindings& b) {
  auto tp = load_program_file(file, b);
  auto r = check_lossless(tp, g.fuel, parse_tol(g.tol), g.seed_enum);
  if (g.json) {
    json j;
    j["program"] = tp.name;
    j["kind"] = r.kind == LosslessKind::Exact ? "exact" : r.kind == LosslessKind::Within ? "within" : "not-lossless";
    j["residual"] = to_string(r.residual);
    j["deficit"] = to_string(r.deficit);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "LOSSLESS " << tp.name << ": " << r.to_string() << "\n";
  }
  return r.kind == LosslessKind::NotLossless ? 1 : 0;
}

struct PropArgs {
  std::string file, vars, event, route = "oracle", proof;
  std::vector<std::string> binds;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  bool via_uniform = false;
};

int cmd_property(const Global& g, PropertyKind kind, const PropArgs& a) {
  PropertyQuery q;
  q.program = std::make_shared<const TypedProgram>(load_program_file(a.file, parse_bindings(a.binds)));
  q.vars = split_list(a.vars);
  q.kind = kind;
  if (kind == PropertyKind::Indep && a.via_uniform) q.kind = PropertyKind::IndepViaUniform;
  q.event = a.event;
  q.route = parse_route(a.route);
  q.proof_path = a.proof;
  q.opt = check_options(g);
  q.sample = a.sample;
  q.seed = a.seed;
  q.jobs = g.jobs;
  auto r = check_property(q);
  std::cout << format_report({r}, g.json);
  return r.ok() ? 0 : 1;
}

int cmd_prove(const Global& g, const std::string& prog, const std::string& proof, const Bindings& b, bool conclude,
              bool verbose) {
  auto tp = std::make_shared<const TypedProgram>(load_program_file(prog, b));
  auto script = load_proof_file(proof);
  if (!script.header) throw UsageError(proof + ": no (judgment ...) header");
  if (!script.proof) throw UsageError(proof + ": no (proof ...) form");
  auto j = judgment_from_header(*script.header, tp, script.dir, b);
  auto opt = check_options(g);
  auto family = instantiate_family(j);
  std::vector<ProofResult> results(family.size());
  std::vector<std::optional<Conclusion>> concl(family.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errs(family.size());
  auto worker = [&] {
    for (std::size_t i; (i = next++) < family.size();) {
      try {
        results[i] = check_proof(j, family[i], script, opt);
        if (conclude && results[i].accepted) concl[i] = conclude_probability(j, family[i], &results[i], opt);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::max(1u, g.jobs); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  std::size_t acc = 0;
  for (const auto& r : results) acc += r.accepted;
  bool all = acc == results.size();
  if (g.json) {
    json out;
    out["program"] = tp->name;
    out["proof"] = proof;
    out["accepted"] = all;
    out["instances"] = json::array();
    for (std::size_t i = 0; i < family.size(); ++i) {
      json x;
      x["instance"] = format_env(family[i]);
      x["accepted"] = results[i].accepted;
      x["result"] = results[i].to_string();
      if (!results[i].accepted) {
        x["rule"] = results[i].rule;
        x["path"] = results[i].path;
      }
      x["obligations"] = results[i].log.size();
      if (concl[i]) x["conclusion"] = concl[i]->text;
      out["instances"].push_back(x);
    }
    std::cout << out.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < family.size(); ++i) {
      std::cout << format_env(family[i]) << ": " << results[i].to_string() << "\n";
      if (verbose)
        for (const auto& o : results[i].log)
          std::cout << "    " << (o.ok ? "ok   " : "FAIL ") << (o.path.empty() ? "." : o.path) << " " << o.rule << ": "
                    << o.what << (o.detail.empty() ? "" : " [" + o.detail + "]") << "\n";
      if (concl[i]) std::cout << "  " << concl[i]->text << "\n";
    }
    std::cout << "PROVE " << tp->name << ": " << (all ? "ACCEPTED" : "REJECTED") << " (" << acc << "/"
              << results.size() << " instances)\n";
  }
  return all ? 0 : 1;
}

int cmd_selfcompose(const std::string& file, const Bindings& b, int n, const std::string& out) {
  if (n < 1) throw UsageError("-n must be at least 1");
  auto tp = load_program_file(file, b);
  auto text = print_program(self_compose_source(tp, n));
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw UsageError("cannot write " + out);
    f << text;
  }
  return 0;
}

SubDist<Value> parse_points(const std::string& text, TypePtr& type) {
  SubDist<Value> d;
  for (const auto& item : split_list(text)) {
    auto k = item.find('=');
    if (k == std::string::npos) throw UsageError("distribution items are VALUE=MASS, got " + item);
    Scope sc;
    auto e = check_expr(parse_expr(item.substr(0, k)), sc);
    if (!type) type = e->type;
    else if (!assignable(*type, *e->type) && !assignable(*e->type, *type))
      throw UsageError("mixed value types in distributions");
    d.add(eval_closed(*e), parse_rational(item.substr(k + 1)));
  }
  if (d.weight() > 1) throw UsageError("total mass exceeds 1");
  return d;
}

int cmd_coupling(const Global& g, const std::string& left, const std::string& right, const std::string& psi,
                 const std::string& slack_text) {
  TypePtr type;
  auto mu1 = parse_points(left, type);
  auto mu2 = parse_points(right, type);
  if (type->kind == TypeKind::Range || type->kind == TypeKind::Int || type->kind == TypeKind::ZMod) type = t_integer();
  Layout lay;
  lay.add("x", type);
  Scope sc;
  sc.side[1] = sc.side[2] = &lay;
  auto phi = check_bool(parse_expr(psi), sc);
  Rational slack = slack_text.empty() ? Rational(0) : parse_tol(slack_text);
  auto st = [](const Value& v) {
    State s;
    s.vals = {v};
    return s;
  };
  auto c = find_coupling(mu1, mu2, [&](const Value& a, const Value& b) { return eval_assertion(*phi, st(a), st(b)); },
                         slack);
  if (g.json) {
    json j;
    j["feasible"] = c.feasible;
    j["slack"] = to_string(slack);
    j["joint"] = json::array();
    for (const auto& [ab, p] : c.joint.mass)
      j["joint"].push_back({{"left", format_value(ab.first, *type)}, {"right", format_value(ab.second, *type)}, {"mass", to_string(p)}});
    j["cut"] = json::array();
    for (const auto& v : c.cut) j["cut"].push_back(format_value(v, *type));
    j["cut_left"] = to_string(c.cut_left);
    j["cut_right"] = to_string(c.cut_right);
    std::cout << j.dump(2) << "\n";
  } else if (c.feasible) {
    std::cout << "COUPLING: FEASIBLE (slack " << to_string(slack) << ")\n";
    for (const auto& [ab, p] : c.joint.mass)
      std::cout << "  " << format_value(ab.first, *type) << " ~ " << format_value(ab.second, *type) << "  "
                << to_string(p) << "\n";
  } else {
    std::cout << "COUPLING: INFEASIBLE (slack " << to_string(slack) << ")\n  cut {";
    for (std::size_t i = 0; i < c.cut.size(); ++i) std::cout << (i ? ", " : "") << format_value(c.cut[i], *type);
    std::cout << "}: left mass " << to_string(c.cut_left) << " > related right mass " << to_string(c.cut_right)
              << "\n";
  }
  return c.feasible ? 0 : 1;
}

int cmd_corpus(const Global& g, const std::string& filter, const std::string& path, const std::string& routes,
               bool fuel_given) {
  CorpusOptions o;
  o.filter = filter;
  if (fuel_given) o.fuel = g.fuel;
  o.jobs = std::max(1u, g.jobs);
  o.seed_enum = g.seed_enum;
  o.tol = parse_tol(g.tol);
  if (!routes.empty() && routes != "all") {
    o.routes.clear();
    for (const auto& r : split_list(routes)) o.routes.insert(parse_route(r));
  }
  auto s = run_corpus(path, o);
  std::cout << format_summary(s, g.json);
  return s.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"couplecheck: coupling proofs for a finite probabilistic while-language"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--fuel", g.fuel, "loop iterations per fuel group")->capture_default_str();
  app.add_option("--tol", g.tol, "losslessness tolerance, e.g. 1/2^30")->capture_default_str();
  app.add_flag("--json", g.json, "machine-readable output");
  app.add_option("--jobs", g.jobs, "parallel workers")->capture_default_str();
  app.add_flag("--seed-enum", g.seed_enum, "check from every initial store, not just the declared one");
  app.fallthrough();

  std::string file, file2, vars, out, left, right, psi, slack, filter = "*", corpus_path = COUPLECHECK_CORPUS, routes;
  std::vector<std::string> binds;
  int n = 2;
  bool conclude = false, verbose = false;

  auto* run = app.add_subcommand("run", "exact output distribution");
  run->add_option("FILE", file)->required();
  run->add_option("--bind", binds, "parameter binding NAME=VALUE");
  run->add_option("--vars", vars, "marginal on these expressions");

  auto* lossless = app.add_subcommand("lossless", "termination mass within tolerance");
  lossless->add_option("FILE", file)->required();
  lossless->add_option("--bind", binds);

  PropArgs pa;
  auto add_prop = [&](const std::string& name, const std::string& help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("FILE", pa.file)->required();
    c->add_option("--vars", pa.vars, "variables or expressions, comma separated")->required();
    c->add_option("--event", pa.event, name == "cond-indep" ? "conditioning event" : "carrier restriction");
    c->add_option("--route", pa.route, "proof, semantic or oracle")->capture_default_str();
    c->add_option("--proof", pa.proof, "proof script for the proof route");
    c->add_option("--bind", pa.binds);
    c->add_option("--sample", pa.sample, "spot-check this many instances");
    c->add_option("--seed", pa.seed, "seed for --sample");
    return c;
  };
  auto* uniform = add_prop("uniform", "uniformity of the tracked expressions");
  auto* indep = add_prop("indep", "mutual independence (self-composition)");
  indep->add_flag("--via-uniform", pa.via_uniform, "decide through joint uniformity");
  auto* cond = add_prop("cond-indep", "independence conditioned on --event");
  cond->get_option("--event")->required();

  auto* prove = app.add_subcommand("prove", "check a proof script");
  prove->add_option("PROGRAM", file)->required();
  prove->add_option("PROOF", file2)->required();
  prove->add_option("--bind", binds);
  prove->add_flag("--conclude", conclude, "state the probability conclusion of each accepted instance");
  prove->add_flag("-v,--verbose", verbose, "list the obligations");

  auto* selfc = app.add_subcommand("selfcompose", "print the n-fold self-composition");
  selfc->add_option("FILE", file)->required();
  selfc->add_option("-n", n, "number of copies")->capture_default_str();
  selfc->add_option("-o", out, "output file");
  selfc->add_option("--bind", binds);

  auto* coupling = app.add_subcommand("coupling", "search a coupling of two finite distributions");
  coupling->add_option("--left", left, "VALUE=MASS,...")->required();
  coupling->add_option("--right", right, "VALUE=MASS,...")->required();
  coupling->add_option("--psi", psi, "relation over x{1} and x{2}")->required();
  coupling->add_option("--slack", slack);

  auto* corpus = app.add_subcommand("corpus", "run the example corpus");
  corpus->add_option("FILTER", filter, "entry id glob")->capture_default_str();
  corpus->add_option("--corpus", corpus_path, "corpus.json")->capture_default_str();
  corpus->add_option("--routes", routes, "subset of proof,semantic,oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(g, file, parse_bindings(binds), vars);
    if (*lossless) return cmd_lossless(g, file, parse_bindings(binds));
    if (*uniform) return cmd_property(g, PropertyKind::Uniform, pa);
    if (*indep) return cmd_property(g, PropertyKind::Indep, pa);
    if (*cond) return cmd_property(g, PropertyKind::CondIndep, pa);
    if (*prove) return cmd_prove(g, file, file2, parse_bindings(binds), conclude, verbose);
    if (*selfc) return cmd_selfcompose(file, parse_bindings(binds), n, out);
    if (*coupling) return cmd_coupling(g, left, right, psi, slack);
    if (*corpus) return cmd_corpus(g, filter, corpus_path, routes, app.get_option("--fuel")->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
