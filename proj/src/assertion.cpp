#include "couplecheck/assertion.hpp"

#include <algorithm>
#include <map>

#include "couplecheck/eval.hpp"
#include "couplecheck/parser.hpp"

namespace couplecheck {

namespace {

std::string base_name(const std::string& n) {
  auto h = n.find('#');
  return h == std::string::npos ? n : n.substr(0, h);
}

// copy i of base variable x in a layout, or "" if absent
std::string copy_name(const Layout& l, const std::string& base, int i) {
  std::string tagged = base + "#" + std::to_string(i);
  if (l.find(tagged) >= 0) return tagged;
  if (i == 1 && l.find(base) >= 0) return base;
  return "";
}

ExprPtr typed_var(const Layout& l, int tag, int slot) {
  auto v = std::make_shared<Expr>();
  v->kind = ExprKind::Var;
  v->name = l.vars[static_cast<std::size_t>(slot)].name;
  v->tag = tag;
  v->ref = RefKind::State;
  v->slot = slot;
  v->type = l.vars[static_cast<std::size_t>(slot)].type;
  return v;
}

}  // namespace

Scope relational_scope(const TypedProgram& left, const TypedProgram& right) {
  Scope sc = left.scope();
  auto r = right.scope();
  for (auto& [k, v] : r.consts) sc.consts.emplace(k, v);
  for (auto& [k, v] : r.funs) sc.funs.emplace(k, v);
  for (auto& [k, v] : r.labels) sc.labels.emplace(k, v);
  sc.side[1] = left.layout.get();
  sc.side[2] = right.layout.get();
  return sc;
}

ExprPtr eqmem(const Layout& left, const Layout& right, std::optional<std::pair<int, int>> pq) {
  std::vector<ExprPtr> conj;
  if (!pq) {
    for (const auto& v : left.vars)
      if (right.find(v.name) >= 0) conj.push_back(mk_binary(Op::Eq, mk_var(v.name, 1), mk_var(v.name, 2)));
    return conj.empty() ? mk_bool(true) : mk_and(conj);
  }
  std::vector<std::string> bases;
  for (const auto& v : left.vars) {
    auto b = base_name(v.name);
    if (std::find(bases.begin(), bases.end(), b) == bases.end()) bases.push_back(b);
  }
  for (const auto& b : bases) {
    for (int i = 1; i <= pq->first; ++i) {
      auto x1 = copy_name(left, b, i);
      if (x1.empty()) continue;
      for (int j = 1; j <= pq->second; ++j) {
        auto x2 = copy_name(right, b, j);
        if (x2.empty()) continue;
        conj.push_back(mk_binary(Op::Eq, mk_var(x1, 1), mk_var(x2, 2)));
      }
    }
  }
  return conj.empty() ? mk_bool(true) : mk_and(conj);
}

ExprPtr expand_macros(const ExprPtr& e, const Layout& left, const Layout& right) {
  if (e->kind == ExprKind::Var && e->tag == 0 && e->name == "EqMem") return eqmem(left, right);
  if (e->kind == ExprKind::Call && e->name == "eqmem") {
    if (e->args.size() != 2 || e->args[0]->kind != ExprKind::Lit || e->args[1]->kind != ExprKind::Lit)
      throw TypeError({"eqmem expects two integer literals"});
    auto p = e->args[0]->lit.as_int(), q = e->args[1]->lit.as_int();
    if (p < 1 || q < 1) throw TypeError({"eqmem arguments must be positive"});
    return eqmem(left, right, std::make_pair(static_cast<int>(p), static_cast<int>(q)));
  }
  bool changed = false;
  std::vector<ExprPtr> args;
  for (const auto& a : e->args) {
    args.push_back(expand_macros(a, left, right));
    changed = changed || args.back() != a;
  }
  if (!changed) return e;
  auto c = std::make_shared<Expr>(*e);
  c->args = std::move(args);
  return c;
}

ExprPtr parse_assertion(std::string_view text, Scope& rel) {
  auto e = parse_expr(text);
  if (rel.side[1] && rel.side[2]) e = expand_macros(e, *rel.side[1], *rel.side[2]);
  return check_bool(e, rel);
}

bool eval_assertion(const Expr& phi, const State& m1, const State& m2) {
  EvalEnv env;
  env.st[1] = &m1;
  env.st[2] = &m2;
  try {
    return eval_bool(phi, env);
  } catch (const EvalError&) {
    return false;
  }
}

ExprPtr retag(const ExprPtr& e, int side) {
  if (e->kind == ExprKind::Var) {
    if (e->ref != RefKind::State || e->tag == side) return e;
    auto c = std::make_shared<Expr>(*e);
    c->tag = side;
    return c;
  }
  bool changed = false;
  std::vector<ExprPtr> args;
  for (const auto& a : e->args) {
    args.push_back(retag(a, side));
    changed = changed || args.back() != a;
  }
  if (!changed) return e;
  auto c = std::make_shared<Expr>(*e);
  c->args = std::move(args);
  return c;
}

namespace {

ExprPtr subst_rec(const ExprPtr& phi, int side, int slot, const ExprPtr& e) {
  if (phi->kind == ExprKind::Var) {
    if (phi->ref == RefKind::State && phi->tag == side && phi->slot == slot) return coerce_to(e, phi->type);
    return phi;
  }
  bool changed = false;
  std::vector<ExprPtr> args;
  for (const auto& a : phi->args) {
    args.push_back(subst_rec(a, side, slot, e));
    changed = changed || args.back() != a;
  }
  if (!changed) return phi;
  auto c = std::make_shared<Expr>(*phi);
  c->args = std::move(args);
  return c;
}

}  // namespace

ExprPtr subst(const ExprPtr& phi, int side, int slot, const ExprPtr& e) {
  auto r = subst_rec(phi, side, slot, e);
  return r == phi ? phi : fold(r);
}

ExprPtr subst_target(const ExprPtr& phi, int side, const Stmt& target, const ExprPtr& e, const Layout& layout) {
  if (!target.index) return subst(phi, side, target.slot, e);
  auto var = typed_var(layout, side, target.slot);
  auto u = std::make_shared<Expr>();
  u->kind = ExprKind::Builtin;
  u->builtin = BuiltinFn::Upd;
  u->type = var->type;
  u->args = {var, retag(target.index, side), coerce_to(e, var->type->elems[0])};
  return subst(phi, side, target.slot, u);
}

std::set<VarRef> free_vars(const Expr& e) {
  std::set<VarRef> out;
  std::vector<const Expr*> todo{&e};
  while (!todo.empty()) {
    const Expr* x = todo.back();
    todo.pop_back();
    if (x->kind == ExprKind::Var && x->ref == RefKind::State) out.emplace(x->tag, x->slot);
    for (const auto& a : x->args) todo.push_back(a.get());
  }
  return out;
}

std::vector<ExprPtr> conjuncts(const ExprPtr& e) {
  std::vector<ExprPtr> out;
  std::vector<ExprPtr> todo{e};
  while (!todo.empty()) {
    auto x = todo.back();
    todo.pop_back();
    if (x->kind == ExprKind::Binary && x->op == Op::And) {
      todo.push_back(x->args[1]);
      todo.push_back(x->args[0]);
    } else if (!(x->kind == ExprKind::Lit && x->lit.is_bool() && x->lit.as_bool())) {
      out.push_back(x);
    }
  }
  return out;
}

std::string CounterExample::to_string() const {
  std::string s;
  for (const auto& [k, v] : bindings) s += (s.empty() ? "" : ", ") + k + " = " + v;
  return s.empty() ? "(no variables)" : s;
}

namespace {

struct Conj {
  ExprPtr e;
  std::vector<int> vars;  // indices into Search::vars
  bool from_goal = false;
  int def_var = -1;  // e is `var = rhs`
  ExprPtr rhs;
};

struct SearchVar {
  VarRef ref;
  TypePtr type;
  std::string name;
};

class Search {
 public:
  Search(const Scope& rel, std::uint64_t& explored, std::uint64_t budget)
      : rel_(rel), explored_(explored), budget_(budget) {
    for (int t = 1; t <= 2; ++t)
      if (rel.side[t]) st_[t].vals.resize(rel.side[t]->vars.size());
  }

  // Finds an assignment making every conjunct true and the goal false.
  std::optional<CounterExample> run(std::vector<ExprPtr> hyps, std::vector<ExprPtr> goal_hyps, ExprPtr goal) {
    for (const auto& h : hyps) add_conj(h, false);
    for (const auto& h : goal_hyps) add_conj(h, true);
    goal_ = goal;
    for (auto r : free_vars(*goal)) var_index(r);
    for (auto& c : conjs_) {
      for (auto r : free_vars(*c.e)) c.vars.push_back(var_index(r));
      std::sort(c.vars.begin(), c.vars.end());
      c.vars.erase(std::unique(c.vars.begin(), c.vars.end()), c.vars.end());
    }
    for (auto& c : conjs_) detect_definer(c);
    plan();
    failed_goal_hyps_ = 0;
    // closed conjuncts
    for (auto ci : checks_at_[0]) {
      auto r = check(conjs_[static_cast<std::size_t>(ci)]);
      if (r == Verdict::Prune) return std::nullopt;
      if (r == Verdict::GoalError) ++failed_goal_hyps_;
    }
    if (dfs(0)) return cex_;
    return std::nullopt;
  }

 private:
  enum class Verdict { Ok, Prune, GoalError };

  int var_index(VarRef r) {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].ref == r) return static_cast<int>(i);
    const auto& info = rel_.side[r.first]->vars[static_cast<std::size_t>(r.second)];
    vars_.push_back({r, info.type, info.name + "{" + std::to_string(r.first) + "}"});
    return static_cast<int>(vars_.size() - 1);
  }

  void add_conj(const ExprPtr& e, bool from_goal) {
    Conj c;
    c.e = e;
    c.from_goal = from_goal;
    conjs_.push_back(std::move(c));
  }

  void detect_definer(Conj& c) {
    if (c.from_goal || c.e->kind != ExprKind::Binary || c.e->op != Op::Eq) return;
    for (int side = 0; side < 2; ++side) {
      const auto& v = c.e->args[static_cast<std::size_t>(side)];
      const auto& rhs = c.e->args[static_cast<std::size_t>(1 - side)];
      if (v->kind != ExprKind::Var || v->ref != RefKind::State) continue;
      int vi = var_index({v->tag, v->slot});
      auto fv = free_vars(*rhs);
      if (fv.count({v->tag, v->slot})) continue;
      c.def_var = vi;
      c.rhs = rhs;
      return;
    }
  }

  std::uint64_t domain_size_of(int v) const { return domain_size(*vars_[static_cast<std::size_t>(v)].type); }

  void plan() {
    const int n = static_cast<int>(vars_.size());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    std::vector<bool> definable(static_cast<std::size_t>(n), false);
    for (const auto& c : conjs_)
      if (c.def_var >= 0) definable[static_cast<std::size_t>(c.def_var)] = true;
    definer_.assign(static_cast<std::size_t>(n), -1);
    level_of_.assign(static_cast<std::size_t>(n), -1);
    while (static_cast<int>(order_.size()) < n) {
      int pick = -1, def = -1;
      for (std::size_t ci = 0; ci < conjs_.size() && pick < 0; ++ci) {
        const auto& c = conjs_[ci];
        if (c.def_var < 0 || chosen[static_cast<std::size_t>(c.def_var)]) continue;
        bool ready = true;
        for (auto w : c.vars)
          if (w != c.def_var && !chosen[static_cast<std::size_t>(w)]) ready = false;
        if (ready) {
          pick = c.def_var;
          def = static_cast<int>(ci);
        }
      }
      for (int pass = 0; pass < 2 && pick < 0; ++pass) {
        std::uint64_t best = 0;
        for (int v = 0; v < n; ++v) {
          if (chosen[static_cast<std::size_t>(v)] || (pass == 0 && definable[static_cast<std::size_t>(v)])) continue;
          auto d = domain_size_of(v);
          if (pick < 0 || d < best) {
            pick = v;
            best = d;
          }
        }
      }
      chosen[static_cast<std::size_t>(pick)] = true;
      definer_[static_cast<std::size_t>(pick)] = def;
      level_of_[static_cast<std::size_t>(pick)] = static_cast<int>(order_.size());
      order_.push_back(pick);
    }
    // a conjunct is checked once its last variable is assigned; level 0
    // holds the closed ones and level k+1 those completed at order_[k]
    checks_at_.assign(static_cast<std::size_t>(n) + 1, {});
    for (std::size_t ci = 0; ci < conjs_.size(); ++ci) {
      int lvl = 0;
      for (auto w : conjs_[ci].vars) lvl = std::max(lvl, level_of_[static_cast<std::size_t>(w)] + 1);
      checks_at_[static_cast<std::size_t>(lvl)].push_back(static_cast<int>(ci));
    }
  }

  void tick() {
    if (++explored_ > budget_) throw BudgetError("implication check exceeded the budget of " + std::to_string(budget_) + " assignments");
  }

  Verdict check(const Conj& c) {
    EvalEnv env;
    env.st[1] = &st_[1];
    env.st[2] = &st_[2];
    try {
      return eval_bool(*c.e, env) ? Verdict::Ok : Verdict::Prune;
    } catch (const EvalError&) {
      return c.from_goal ? Verdict::GoalError : Verdict::Prune;
    }
  }

  Value& slot_of(int v) {
    const auto& r = vars_[static_cast<std::size_t>(v)].ref;
    return st_[r.first].vals[static_cast<std::size_t>(r.second)];
  }

  const std::vector<Value>& domain(int v) {
    auto it = domains_.find(v);
    if (it != domains_.end()) return it->second;
    try {
      return domains_[v] = enumerate_type(*vars_[static_cast<std::size_t>(v)].type, budget_);
    } catch (const std::length_error&) {
      throw BudgetError("carrier of " + vars_[static_cast<std::size_t>(v)].name + " exceeds the enumeration budget");
    }
  }

  bool checks_pass(std::size_t level, int& goal_errors) {
    for (auto ci : checks_at_[level]) {
      auto r = check(conjs_[static_cast<std::size_t>(ci)]);
      if (r == Verdict::Prune) return false;
      if (r == Verdict::GoalError) ++goal_errors;
    }
    return true;
  }

  bool leaf() {
    tick();
    bool goal_ok = false;
    if (failed_goal_hyps_ == 0) {
      EvalEnv env;
      env.st[1] = &st_[1];
      env.st[2] = &st_[2];
      try {
        goal_ok = eval_bool(*goal_, env);
      } catch (const EvalError&) {
        goal_ok = false;
      }
    }
    if (goal_ok) return false;
    CounterExample c;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      c.bindings.emplace_back(vars_[i].name, format_value(slot_of(static_cast<int>(i)), *vars_[i].type));
    std::sort(c.bindings.begin(), c.bindings.end());
    cex_ = std::move(c);
    return true;
  }

  bool dfs(std::size_t k) {
    if (k == order_.size()) return leaf();
    int v = order_[k];
    auto try_value = [&](const Value& x) {
      tick();
      slot_of(v) = x;
      int errs = 0;
      if (!checks_pass(k + 1, errs)) return false;
      failed_goal_hyps_ += errs;
      bool found = dfs(k + 1);
      failed_goal_hyps_ -= errs;
      return found;
    };
    int def = definer_[static_cast<std::size_t>(v)];
    if (def >= 0) {
      EvalEnv env;
      env.st[1] = &st_[1];
      env.st[2] = &st_[2];
      std::optional<Value> x;
      try {
        x = coerce(*vars_[static_cast<std::size_t>(v)].type, eval(*conjs_[static_cast<std::size_t>(def)].rhs, env));
      } catch (const EvalError&) {
        return false;
      }
      if (!x) return false;
      return try_value(*x);
    }
    for (const auto& x : domain(v))
      if (try_value(x)) return true;
    return false;
  }

  const Scope& rel_;
  std::uint64_t& explored_;
  std::uint64_t budget_;
  State st_[3];
  std::vector<Conj> conjs_;
  std::vector<SearchVar> vars_;
  ExprPtr goal_;
  std::vector<int> order_, definer_, level_of_;
  std::vector<std::vector<int>> checks_at_;
  std::map<int, std::vector<Value>> domains_;
  int failed_goal_hyps_ = 0;
  CounterExample cex_;
};

// Moves hypotheses of an implication goal into the antecedent.
void split_goal(const ExprPtr& goal, std::vector<ExprPtr>& hyps, std::vector<std::pair<std::vector<ExprPtr>, ExprPtr>>& out,
                std::vector<ExprPtr> goal_hyps) {
  if (goal->kind == ExprKind::Binary && goal->op == Op::And) {
    split_goal(goal->args[0], hyps, out, goal_hyps);
    split_goal(goal->args[1], hyps, out, goal_hyps);
    return;
  }
  if (goal->kind == ExprKind::Binary && goal->op == Op::Implies) {
    for (const auto& c : conjuncts(goal->args[0])) goal_hyps.push_back(c);
    split_goal(goal->args[1], hyps, out, goal_hyps);
    return;
  }
  if (goal->kind == ExprKind::Lit && goal->lit.is_bool() && goal->lit.as_bool()) return;
  out.emplace_back(goal_hyps, goal);
}

// Indices of hypotheses connected to `seed` through shared variables.
std::vector<bool> relevant(const std::vector<ExprPtr>& hyps, std::set<VarRef> seed) {
  std::vector<std::set<VarRef>> fv;
  for (const auto& h : hyps) fv.push_back(free_vars(*h));
  std::vector<bool> in(hyps.size(), false);
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      if (in[i]) continue;
      bool touch = fv[i].empty();
      for (const auto& r : fv[i])
        if (seed.count(r)) touch = true;
      if (!touch) continue;
      in[i] = true;
      grew = true;
      seed.insert(fv[i].begin(), fv[i].end());
    }
  }
  return in;
}

}  // namespace

ImplicationResult check_implies(const ExprPtr& phi, const ExprPtr& psi, const Scope& rel, std::uint64_t budget) {
  ImplicationResult res;
  auto hyps = conjuncts(phi);
  std::vector<std::pair<std::vector<ExprPtr>, ExprPtr>> goals;
  split_goal(psi, hyps, goals, {});
  // goals with the same hypotheses are searched together, so the shared
  // variables are enumerated once
  struct Group {
    std::vector<bool> in;
    std::vector<ExprPtr> goal_hyps;
    std::vector<ExprPtr> goals;
  };
  std::vector<Group> groups;
  for (const auto& [goal_hyps, goal] : goals) {
    std::set<VarRef> seed = free_vars(*goal);
    for (const auto& g : goal_hyps) {
      auto f = free_vars(*g);
      seed.insert(f.begin(), f.end());
    }
    auto in = relevant(hyps, seed);
    auto same = [&](const Group& g) {
      if (g.in != in || g.goal_hyps.size() != goal_hyps.size()) return false;
      for (std::size_t i = 0; i < goal_hyps.size(); ++i)
        if (!expr_equal(*g.goal_hyps[i], *goal_hyps[i])) return false;
      return true;
    };
    auto it = std::find_if(groups.begin(), groups.end(), same);
    if (it == groups.end()) groups.push_back({in, goal_hyps, {goal}});
    else it->goals.push_back(goal);
  }
  for (const auto& [in, goal_hyps, group_goals] : groups) {
    ExprPtr goal = group_goals.size() == 1 ? group_goals[0] : mk_and(group_goals);
    std::vector<ExprPtr> near, far;
    for (std::size_t i = 0; i < hyps.size(); ++i) (in[i] ? near : far).push_back(hyps[i]);
    Search s(rel, res.explored, budget);
    auto cex = s.run(near, goal_hyps, goal);
    if (!cex) continue;
    if (!far.empty()) {
      // the unrelated hypotheses must be satisfiable for the counterexample to extend
      Search sat(rel, res.explored, budget);
      auto model = sat.run(far, {}, mk_bool(false));
      if (!model) {
        res.valid = true;
        return res;
      }
      cex->bindings.insert(cex->bindings.end(), model->bindings.begin(), model->bindings.end());
      std::sort(cex->bindings.begin(), cex->bindings.end());
    }
    res.cex = cex;
    return res;
  }
  res.valid = true;
  return res;
}

}  // namespace couplecheck
