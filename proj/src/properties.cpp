#include "couplecheck/properties.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <random>
#include <set>
#include <thread>

#include "couplecheck/assertion.hpp"
#include "couplecheck/eval.hpp"
#include "couplecheck/parser.hpp"
#include "couplecheck/semantics.hpp"
#include "couplecheck/transform.hpp"

namespace couplecheck {

std::string route_name(Route r) {
  switch (r) {
    case Route::Proof: return "proof";
    case Route::Semantic: return "semantic";
    case Route::Oracle: return "oracle";
  }
  return "?";
}

Route parse_route(const std::string& s) {
  if (s == "proof") return Route::Proof;
  if (s == "semantic") return Route::Semantic;
  if (s == "oracle") return Route::Oracle;
  throw std::invalid_argument("unknown route " + s + " (expected proof, semantic or oracle)");
}

std::string status_name(Status s) {
  switch (s) {
    case Status::Certified: return "CERTIFIED";
    case Status::Failed: return "FAILED";
    case Status::NotApplicable: return "NOT-APPLICABLE";
  }
  return "?";
}

std::string Report::line() const {
  std::string s = property + " " + subject;
  if (!event.empty()) s += " | " + event;
  s += ": " + status_name(status);
  std::string extra;
  if (!ok()) {
    for (const auto& i : instances)
      if (!i.ok) {
        s += " at " + i.instance;
        break;
      }
    if (route == Route::Oracle) extra = "deviation " + to_string(max_deviation) + ", ";
  }
  s += " (" + extra + "slack " + to_string(slack);
  if (!exhaustive) s += ", sampled " + std::to_string(checked) + " of " + std::to_string(total);
  return s + ")";
}

namespace {

struct Tracked {
  std::vector<std::string> texts;
  std::vector<ExprPtr> exprs;  // typed over the program layout
  std::vector<TypePtr> types;
  std::vector<std::vector<Value>> carriers;
};

Scope program_scope(const TypedProgram& tp) {
  Scope sc = tp.scope();
  sc.side[0] = tp.layout.get();
  return sc;
}

Tracked track(const TypedProgram& tp, const std::vector<std::string>& vars) {
  if (vars.empty()) throw PreconditionError("the variable list is empty");
  Tracked t;
  for (const auto& text : vars) {
    Scope sc = program_scope(tp);
    ExprPtr e;
    try {
      e = check_expr(parse_expr(text), sc);
    } catch (const std::exception& ex) {
      throw PreconditionError("cannot use '" + text + "': " + ex.what());
    }
    if (!is_finite(*e->type)) throw PreconditionError("'" + text + "' is not finite-typed");
    t.texts.push_back(text);
    t.exprs.push_back(e);
    t.types.push_back(e->type);
    t.carriers.push_back(enumerate_type(*e->type, 1'000'000));
  }
  return t;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + xs[i];
  return s;
}

// Renames state variables of an untyped expression, leaving names bound by
// a binder alone.
using Renamer = std::function<std::optional<std::pair<std::string, int>>(const std::string&)>;

ExprPtr rename(const ExprPtr& e, const Renamer& f, const std::set<std::string>& shadow = {}) {
  if (!e) return e;
  auto c = std::make_shared<Expr>(*e);
  if (c->kind == ExprKind::Var && c->tag == 0 && !shadow.count(c->name)) {
    if (auto r = f(c->name)) {
      c->name = r->first;
      c->tag = r->second;
    }
    return c;
  }
  if (c->kind == ExprKind::Binder) {
    auto inner = shadow;
    inner.insert(c->name);
    for (std::size_t i = 0; i < c->args.size(); ++i) {
      bool outside = c->binder == BinderKind::Tabulate && i == 1;
      c->args[i] = rename(c->args[i], f, outside ? shadow : inner);
    }
    return c;
  }
  for (auto& a : c->args) a = rename(a, f, shadow);
  return c;
}

// `text` with every variable of `layout` tagged, and renamed to copy `copy`
// of a self-composition when copy > 0.
std::string on_side(const std::string& text, const Layout& layout, int tag, int copy) {
  auto e = rename(parse_expr(text), [&](const std::string& x) -> std::optional<std::pair<std::string, int>> {
    if (layout.find(x) < 0) return std::nullopt;
    return std::make_pair(copy > 0 ? x + "#" + std::to_string(copy) : x, tag);
  });
  return print_expr(*e);
}

std::string substitute_names(const std::string& text, const std::map<std::string, std::string>& names) {
  auto e = rename(parse_expr(text), [&](const std::string& x) -> std::optional<std::pair<std::string, int>> {
    auto it = names.find(x);
    if (it == names.end()) return std::nullopt;
    return std::make_pair(it->second, 0);
  });
  return print_expr(*e);
}

struct MetaNames {
  std::vector<std::string> first, second;
};

MetaNames meta_names(const TypedProgram& tp, std::size_t n) {
  auto sc = tp.scope();
  for (std::string base : {"a", "b", "c", "u", "v", "w", "k"}) {
    MetaNames m;
    for (std::size_t i = 0; i < n; ++i) {
      std::string x = n == 1 ? base : base + std::to_string(i + 1);
      m.first.push_back(x);
      m.second.push_back(x + "'");
    }
    bool clash = false;
    for (const auto* v : {&m.first, &m.second})
      for (const auto& x : *v)
        if (tp.layout->find(x) >= 0 || sc.consts.count(x) || sc.funs.count(x)) clash = true;
    if (!clash) return m;
  }
  throw PreconditionError("no free names for the meta-variables");
}

std::string conj_eq(const std::vector<std::string>& lhs, const std::vector<std::string>& rhs) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < lhs.size(); ++i) parts.push_back(lhs[i] + " = " + rhs[i]);
  return parts.size() == 1 ? parts[0] : "(" + join(parts, " && ") + ")";
}

std::shared_ptr<const TypedProgram> composed(const TypedProgram& tp, int n) {
  return std::make_shared<const TypedProgram>(self_compose(tp, n));
}

std::vector<Value> eval_all(const std::vector<ExprPtr>& es, const State& m) {
  EvalEnv env;
  env.st[0] = &m;
  std::vector<Value> out;
  for (const auto& e : es) out.push_back(eval(*e, env));
  return out;
}

StateDist oracle(const TypedProgram& tp, const CheckOptions& opt, Report& r) {
  auto mu = run_program(tp, opt.fuel);
  r.slack = mu.residual;
  if (mu.error > 0) {
    r.status = Status::Failed;
    r.message = "run-time error mass " + to_string(mu.error) + ": " + mu.first_error;
  } else if (mu.residual > opt.tol) {
    r.status = Status::Failed;
    r.message = "not lossless within tolerance: residual " + to_string(mu.residual) + " at fuel " +
                std::to_string(opt.fuel);
  }
  return mu;
}

std::string format_tuple(const Tracked& t, const std::vector<Value>& v) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < v.size(); ++i) parts.push_back(t.texts[i] + "=" + format_value(v[i], *t.types[i]));
  return join(parts, ", ");
}

void for_each_tuple(const std::vector<std::vector<Value>>& carriers, const std::function<void(const std::vector<Value>&)>& f) {
  std::vector<std::size_t> idx(carriers.size(), 0);
  for (const auto& c : carriers)
    if (c.empty()) return;
  std::vector<Value> cur;
  while (true) {
    cur.clear();
    for (std::size_t i = 0; i < carriers.size(); ++i) cur.push_back(carriers[i][idx[i]]);
    f(cur);
    std::size_t k = carriers.size();
    while (k > 0) {
      --k;
      if (++idx[k] < carriers[k].size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

std::vector<std::size_t> choose(std::size_t total, const PropertyQuery& q, Report& r) {
  std::vector<std::size_t> all(total);
  for (std::size_t i = 0; i < total; ++i) all[i] = i;
  r.total = total;
  if (!q.sample || *q.sample >= total) {
    r.checked = total;
    return all;
  }
  std::vector<std::size_t> picked;
  std::mt19937_64 rng(q.seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), *q.sample, rng);
  r.checked = picked.size();
  r.exhaustive = false;
  r.notes.push_back("non-exhaustive: " + std::to_string(picked.size()) + " of " + std::to_string(total) +
                    " instances, seed " + std::to_string(q.seed));
  return picked;
}

template <class F>
std::vector<InstanceReport> run_parallel(std::size_t count, unsigned jobs, F&& f) {
  std::vector<InstanceReport> out(count);
  std::vector<std::exception_ptr> errs(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        out[i] = f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string header_funs(const ProofScript& s) {
  if (!s.header) return "";
  const auto& items = s.header->items;
  for (std::size_t i = 1; i + 1 < items.size(); ++i)
    if (items[i].is_keyword() && items[i].text == ":funs") return items[i + 1].text;
  return "";
}

// The coupling routes: one verdict per instance of the family.
void check_family(const Judgment& j, const PropertyQuery& q, Report& r) {
  std::optional<ProofScript> script;
  if (q.route == Route::Proof) {
    if (q.proof_path.empty()) throw PreconditionError("the proof route needs a proof script");
    script = load_proof_file(q.proof_path);
    if (!script->proof) throw PreconditionError(q.proof_path + ": no (proof ...) form");
    r.notes.push_back("judgment generated from the query; the script supplies the proof");
  }
  Judgment jj = j;
  if (script) {
    auto extra = header_funs(*script);
    if (!extra.empty()) jj.funs += (jj.funs.empty() ? "" : "\n") + extra;
  }
  auto family = instantiate_family(jj);
  auto picked = choose(family.size(), q, r);
  std::vector<Rational> slack(picked.size());
  r.instances = run_parallel(picked.size(), q.jobs, [&](std::size_t k) {
    const auto& env = family[picked[k]];
    InstanceReport ir;
    ir.instance = format_env(env);
    if (script) {
      auto pr = check_proof(jj, env, *script, q.opt);
      ir.ok = pr.accepted;
      ir.detail = pr.to_string();
    } else {
      auto sr = validate_semantic(jj, env, q.opt);
      ir.ok = sr.holds;
      slack[k] = sr.max_slack;
      ir.detail = sr.holds ? "coupling found for " + std::to_string(sr.pairs) + " seed pair(s)" : sr.detail;
    }
    return ir;
  });
  for (const auto& s : slack) r.slack = std::max(r.slack, s);
  for (const auto& i : r.instances)
    if (!i.ok) {
      r.status = Status::Failed;
      r.message = (script ? "proof rejected at " : "no coupling at ") + i.instance;
      break;
    }
}

Report base_report(const PropertyQuery& q, const std::string& property) {
  Report r;
  r.property = property;
  r.subject = join(q.vars, ", ");
  r.route = q.route;
  return r;
}

// Restriction of the uniform carrier, with the tracked names bound.
std::function<bool(const std::vector<Value>&)> restriction(const TypedProgram& tp, const Tracked& t,
                                                           const std::string& text) {
  if (text.empty()) return [](const std::vector<Value>&) { return true; };
  Scope sc = tp.scope();
  for (std::size_t i = 0; i < t.texts.size(); ++i) sc.bound.emplace_back(t.texts[i], t.types[i]);
  auto e = check_bool(parse_expr(text), sc);
  auto names = std::make_shared<std::vector<std::string>>(t.texts);
  return [e, names](const std::vector<Value>& v) {
    EvalEnv env;
    for (std::size_t i = 0; i < v.size(); ++i) env.bound.emplace_back(&(*names)[i], v[i]);
    try {
      return eval_bool(*e, env);
    } catch (const std::exception&) {
      return false;
    }
  };
}

Rational abs_diff(const Rational& a, const Rational& b) { return a > b ? Rational(a - b) : Rational(b - a); }

}  // namespace

Judgment uniform_judgment(const PropertyQuery& q) {
  const auto& tp = *q.program;
  auto t = track(tp, q.vars);
  auto m = meta_names(tp, t.texts.size());
  Judgment j;
  j.left = j.right = q.program;
  std::vector<std::string> l, r;
  for (std::size_t i = 0; i < t.texts.size(); ++i) {
    j.metas.push_back({m.first[i], type_to_string(*t.types[i])});
    l.push_back(on_side(t.texts[i], *tp.layout, 1, 0));
    r.push_back(on_side(t.texts[i], *tp.layout, 2, 0));
  }
  for (std::size_t i = 0; i < t.texts.size(); ++i) j.metas.push_back({m.second[i], type_to_string(*t.types[i])});
  if (!q.event.empty()) {
    std::map<std::string, std::string> n1, n2;
    for (std::size_t i = 0; i < t.texts.size(); ++i) {
      n1[t.texts[i]] = m.first[i];
      n2[t.texts[i]] = m.second[i];
    }
    j.where = "(" + substitute_names(q.event, n1) + ") && (" + substitute_names(q.event, n2) + ")";
  }
  j.pre = "EqMem";
  j.post = conj_eq(l, m.first) + " <=> " + conj_eq(r, m.second);
  return j;
}

Judgment selfcomp_judgment(const PropertyQuery& q) {
  const auto& tp = *q.program;
  auto t = track(tp, q.vars);
  int n = static_cast<int>(t.texts.size());
  auto m = meta_names(tp, t.texts.size());
  Judgment j;
  j.left = q.program;
  j.right = composed(tp, n);
  std::vector<std::string> l, r;
  for (int i = 0; i < n; ++i) {
    j.metas.push_back({m.first[i], type_to_string(*t.types[i])});
    l.push_back(on_side(t.texts[i], *tp.layout, 1, 0));
    r.push_back(on_side(t.texts[i], *tp.layout, 2, i + 1));
  }
  j.pre = "eqmem(1, " + std::to_string(n) + ")";
  j.post = conj_eq(l, m.first) + " <=> " + conj_eq(r, m.first);
  return j;
}

Judgment cond_indep_judgment(const PropertyQuery& q) {
  const auto& tp = *q.program;
  auto t = track(tp, q.vars);
  int n = static_cast<int>(t.texts.size());
  if (q.event.empty()) throw PreconditionError("conditional independence needs an event");
  auto m = meta_names(tp, t.texts.size());
  Judgment j;
  j.left = j.right = composed(tp, n);
  std::vector<std::string> l, r, e1, e2;
  for (int i = 0; i < n; ++i) {
    j.metas.push_back({m.first[i], type_to_string(*t.types[i])});
    l.push_back(on_side(t.texts[i], *tp.layout, 1, 1));
    r.push_back(on_side(t.texts[i], *tp.layout, 2, i + 1));
    e1.push_back("(" + on_side(q.event, *tp.layout, 1, i + 1) + ")");
    e2.push_back("(" + on_side(q.event, *tp.layout, 2, i + 1) + ")");
  }
  j.pre = "eqmem(" + std::to_string(n) + ", " + std::to_string(n) + ")";
  j.post = "(" + conj_eq(l, m.first) + " && " + join(e1, " && ") + ") <=> (" + conj_eq(r, m.first) + " && " +
           join(e2, " && ") + ")";
  return j;
}

Report check_uniform(const PropertyQuery& q) {
  const auto& tp = *q.program;
  auto r = base_report(q, "UNIFORM");
  auto t = track(tp, q.vars);
  if (!q.event.empty()) r.notes.push_back("carrier restricted to " + q.event);
  if (q.route != Route::Oracle) {
    Report o;
    auto mu = oracle(tp, q.opt, o);
    r.slack = mu.residual;
    if (!o.ok()) {
      r.status = o.status;
      r.message = o.message;
      return r;
    }
    check_family(uniform_judgment(q), q, r);
    return r;
  }
  auto mu = oracle(tp, q.opt, r);
  if (!r.ok()) return r;
  auto keep = restriction(tp, t, q.event);
  std::vector<std::vector<Value>> tuples;
  for_each_tuple(t.carriers, [&](const std::vector<Value>& v) {
    if (keep(v)) tuples.push_back(v);
  });
  if (tuples.empty()) throw PreconditionError("the restricted carrier is empty");
  std::map<std::vector<Value>, Rational> joint;
  for (const auto& [s, p] : mu.mass) joint[eval_all(t.exprs, s)] += p;
  Rational target(1, static_cast<unsigned long>(tuples.size()));
  Rational outside = 0;
  for (const auto& [v, p] : joint)
    if (!keep(v)) outside += p;
  auto picked = choose(tuples.size(), q, r);
  for (auto k : picked) {
    const auto& v = tuples[k];
    auto it = joint.find(v);
    Rational p = it == joint.end() ? Rational(0) : it->second;
    Rational dev = abs_diff(p, target);
    r.max_deviation = std::max(r.max_deviation, dev);
    r.instances.push_back({format_tuple(t, v), dev <= r.slack, "Pr = " + to_string(p) + ", deviation " + to_string(dev)});
  }
  if (outside > 0) {
    r.max_deviation = std::max(r.max_deviation, outside);
    r.notes.push_back("mass outside the carrier: " + to_string(outside));
  }
  if (r.max_deviation > r.slack) {
    r.status = Status::Failed;
    r.message = "deviation " + to_string(r.max_deviation) + " exceeds slack " + to_string(r.slack);
  }
  return r;
}

Report check_indep_via_uniformity(const PropertyQuery& q) {
  auto u = q;
  u.kind = PropertyKind::Uniform;
  auto r = check_uniform(u);
  r.property = "INDEP";
  if (r.ok()) {
    r.notes.push_back("jointly uniform, hence independent");
  } else {
    r.status = Status::NotApplicable;
    r.notes.push_back("joint distribution not certified uniform; independence undecided by this route");
  }
  return r;
}

Report check_indep_selfcomp(const PropertyQuery& q) {
  const auto& tp = *q.program;
  auto r = base_report(q, "INDEP");
  auto t = track(tp, q.vars);
  std::size_t n = t.texts.size();
  Report o;
  auto mu = oracle(tp, q.opt, o);
  r.slack = mu.residual * static_cast<unsigned long>(n);
  if (!o.ok()) {
    r.status = o.status;
    r.message = o.message;
    return r;
  }
  std::map<std::vector<Value>, Rational> joint;
  std::vector<std::map<Value, Rational>> marg(n);
  for (const auto& [s, p] : mu.mass) {
    auto v = eval_all(t.exprs, s);
    joint[v] += p;
    for (std::size_t i = 0; i < n; ++i) marg[i][v[i]] += p;
  }
  auto mass = [](const std::map<Value, Rational>& m, const Value& v) {
    auto it = m.find(v);
    return it == m.end() ? Rational(0) : it->second;
  };
  if (mu.residual == 0) {
    // the product proposition on the n-fold composition
    auto sc = composed(tp, static_cast<int>(n));
    std::vector<ExprPtr> copies;
    for (std::size_t i = 0; i < n; ++i) {
      Scope s2 = program_scope(*sc);
      copies.push_back(check_expr(parse_expr(on_side(t.texts[i], *tp.layout, 0, static_cast<int>(i + 1))), s2));
    }
    auto nu = run_program(*sc, q.opt.fuel);
    std::map<std::vector<Value>, Rational> prod;
    for (const auto& [s, p] : nu.mass) prod[eval_all(copies, s)] += p;
    bool same = true;
    for_each_tuple(t.carriers, [&](const std::vector<Value>& v) {
      Rational expect = 1;
      for (std::size_t i = 0; i < n; ++i) expect *= mass(marg[i], v[i]);
      auto it = prod.find(v);
      if ((it == prod.end() ? Rational(0) : it->second) != expect) same = false;
    });
    r.notes.push_back(same ? "product proposition holds on the " + std::to_string(n) + "-fold composition"
                           : "product proposition FAILS on the " + std::to_string(n) + "-fold composition");
    if (!same) {
      r.status = Status::Failed;
      r.message = "self-composition does not factor";
      return r;
    }
  }
  if (q.route != Route::Oracle) {
    check_family(selfcomp_judgment(q), q, r);
    return r;
  }
  std::vector<std::vector<Value>> tuples;
  for_each_tuple(t.carriers, [&](const std::vector<Value>& v) { tuples.push_back(v); });
  for (auto k : choose(tuples.size(), q, r)) {
    const auto& v = tuples[k];
    Rational expect = 1;
    for (std::size_t i = 0; i < n; ++i) expect *= mass(marg[i], v[i]);
    auto it = joint.find(v);
    Rational p = it == joint.end() ? Rational(0) : it->second;
    Rational dev = abs_diff(p, expect);
    r.max_deviation = std::max(r.max_deviation, dev);
    r.instances.push_back({format_tuple(t, v), dev <= r.slack,
                           "Pr = " + to_string(p) + ", product of marginals " + to_string(expect)});
  }
  if (r.max_deviation > r.slack) {
    r.status = Status::Failed;
    r.message = "joint differs from the product of marginals by " + to_string(r.max_deviation);
  }
  return r;
}

Report check_cond_indep(const PropertyQuery& q) {
  const auto& tp = *q.program;
  auto r = base_report(q, "COND-INDEP");
  r.event = q.event;
  auto t = track(tp, q.vars);
  if (q.event.empty()) throw PreconditionError("conditional independence needs an event");
  std::size_t n = t.texts.size();
  Scope sc = program_scope(tp);
  auto ev = check_bool(parse_expr(q.event), sc);
  Report o;
  auto mu = oracle(tp, q.opt, o);
  r.slack = mu.residual * static_cast<unsigned long>(n);
  if (!o.ok()) {
    r.status = o.status;
    r.message = o.message;
    return r;
  }
  Rational pe = 0;
  std::map<std::vector<Value>, Rational> joint;
  std::vector<std::map<Value, Rational>> marg(n);
  for (const auto& [s, p] : mu.mass) {
    EvalEnv env;
    env.st[0] = &s;
    if (!eval_bool(*ev, env)) continue;
    pe += p;
    auto v = eval_all(t.exprs, s);
    joint[v] += p;
    for (std::size_t i = 0; i < n; ++i) marg[i][v[i]] += p;
  }
  if (pe == 0) throw PreconditionError("Pr[" + q.event + "] = 0: conditioning on a null event");
  r.notes.push_back("Pr[" + q.event + "] = " + to_string(pe));
  if (q.route != Route::Oracle) {
    check_family(cond_indep_judgment(q), q, r);
    return r;
  }
  Rational pe_pow = 1;
  for (std::size_t i = 1; i < n; ++i) pe_pow *= pe;
  std::vector<std::vector<Value>> tuples;
  for_each_tuple(t.carriers, [&](const std::vector<Value>& v) { tuples.push_back(v); });
  for (auto k : choose(tuples.size(), q, r)) {
    const auto& v = tuples[k];
    auto it = joint.find(v);
    Rational lhs = (it == joint.end() ? Rational(0) : it->second) * pe_pow;
    Rational rhs = 1;
    for (std::size_t i = 0; i < n; ++i) {
      auto jt = marg[i].find(v[i]);
      rhs *= jt == marg[i].end() ? Rational(0) : jt->second;
    }
    Rational dev = abs_diff(lhs, rhs);
    r.max_deviation = std::max(r.max_deviation, dev);
    r.instances.push_back({format_tuple(t, v), dev <= r.slack,
                           "Pr[X=a, E] Pr[E]^(n-1) = " + to_string(lhs) + ", product = " + to_string(rhs)});
  }
  if (r.max_deviation > r.slack) {
    r.status = Status::Failed;
    r.message = "unfolded product identity fails by " + to_string(r.max_deviation);
  }
  return r;
}

Report check_property(const PropertyQuery& q) {
  switch (q.kind) {
    case PropertyKind::Uniform: return check_uniform(q);
    case PropertyKind::Indep: return check_indep_selfcomp(q);
    case PropertyKind::IndepViaUniform: return check_indep_via_uniformity(q);
    case PropertyKind::CondIndep: return check_cond_indep(q);
  }
  throw std::logic_error("unknown property kind");
}

namespace {

ExprPtr untag(const ExprPtr& e) {
  if (!e) return e;
  auto c = std::make_shared<Expr>(*e);
  c->tag = 0;
  for (auto& a : c->args) a = untag(a);
  return c;
}

bool only_tag(const Expr& e, int tag) {
  for (const auto& [t, slot] : free_vars(e))
    if (t != tag) return false;
  return true;
}

}  // namespace

Conclusion conclude_probability(const Judgment& j, const MetaEnv& env, const ProofResult* accepted,
                                const CheckOptions& opt) {
  auto in = make_instance(j, env);
  const auto& post = in.post;
  if (post->kind != ExprKind::Binary || (post->op != Op::Iff && post->op != Op::Implies))
    throw ShapeError("postcondition is not of the form E1{1} => E2{2} or E1{1} <=> E2{2}");
  const auto& e1 = post->args[0];
  const auto& e2 = post->args[1];
  if (!only_tag(*e1, 1) || !only_tag(*e2, 2))
    throw ShapeError("each side of the postcondition must mention one program only");
  if (accepted && !accepted->accepted) throw ShapeError("the judgment was not accepted");
  const auto& l = *j.left;
  const auto& r = *j.right;
  if (!eval_assertion(*in.pre, l.init, r.init)) throw ShapeError("the precondition fails on the initial states");
  auto mu1 = exec(l.body, l.init, opt.fuel);
  auto mu2 = exec(r.body, r.init, opt.fuel);
  auto mode = post->op == Op::Iff ? LemmaMode::Iff : LemmaMode::Implies;
  Rational slack = std::max(mu1.residual, mu2.residual);
  auto c = fundamental_lemma(
      mu1, mu2, [&](const State& m) { return eval_assertion(*e1, m, m); },
      [&](const State& m) { return eval_assertion(*e2, m, m); }, mode, slack, print_expr(*untag(e1)),
      print_expr(*untag(e2)));
  if (!accepted && c.certified) {
    auto sr = validate_semantic(j, env, opt);
    if (!sr.holds) {
      c.certified = false;
      c.text = format_conclusion(c, print_expr(*untag(e1)), print_expr(*untag(e2)));
    }
  }
  return c;
}

ProbabilityResult probability(const TypedProgram& tp, const std::string& event, const std::string& given,
                              std::uint32_t fuel) {
  Scope sc = program_scope(tp);
  auto ev = check_bool(parse_expr(event), sc);
  ExprPtr gv = given.empty() ? nullptr : check_bool(parse_expr(given), sc);
  auto mu = run_program(tp, fuel);
  ProbabilityResult out;
  out.residual = mu.residual;
  Rational joint = 0, pg = 0;
  for (const auto& [s, p] : mu.mass) {
    EvalEnv env;
    env.st[0] = &s;
    if (gv && !eval_bool(*gv, env)) continue;
    pg += p;
    if (eval_bool(*ev, env)) joint += p;
  }
  if (gv) {
    if (pg == 0) throw PreconditionError("Pr[" + given + "] = 0");
    out.given = pg;
    out.value = joint / pg;
  } else {
    out.value = joint;
  }
  return out;
}

}  // namespace couplecheck
