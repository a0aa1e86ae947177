#include "couplecheck/prhl.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "couplecheck/coupling.hpp"
#include "couplecheck/eval.hpp"
#include "couplecheck/parser.hpp"
#include "couplecheck/transform.hpp"

namespace couplecheck {

namespace {

struct Rejection {
  std::string rule, path, reason;
  std::optional<CounterExample> cex;
};

ExprPtr f_and(const ExprPtr& a, const ExprPtr& b) { return fold(mk_binary(Op::And, a, b)); }
ExprPtr f_imp(const ExprPtr& a, const ExprPtr& b) { return fold(mk_binary(Op::Implies, a, b)); }
ExprPtr f_iff(const ExprPtr& a, const ExprPtr& b) { return fold(mk_binary(Op::Iff, a, b)); }
ExprPtr f_not(const ExprPtr& a) { return fold(mk_unary(Op::Not, a)); }

ExprPtr subst_bound(const ExprPtr& e, const std::string& name, const ExprPtr& lit) {
  if (e->kind == ExprKind::Var && e->ref == RefKind::Bound && e->name == name) return lit;
  if (e->kind == ExprKind::Binder && e->name == name) return e;
  bool changed = false;
  std::vector<ExprPtr> args;
  for (const auto& a : e->args) {
    args.push_back(subst_bound(a, name, lit));
    changed |= args.back() != a;
  }
  if (!changed) return e;
  auto r = std::make_shared<Expr>(*e);
  r->args = std::move(args);
  return r;
}

ExprPtr bound_var(const std::string& name, const TypePtr& t) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->name = name;
  e->ref = RefKind::Bound;
  e->type = t;
  return e;
}

bool guard_holds(const Expr& g, const State& m, bool& failed) {
  EvalEnv env;
  env.st[0] = &m;
  failed = false;
  try {
    return eval_bool(g, env);
  } catch (const EvalError&) {
    failed = true;
    return false;
  }
}

constexpr std::size_t reach_cap = 5'000'000;

std::set<State> reach_stmt(const Stmt& s, const std::set<State>& in);

std::set<State> reach_block(const Block& b, std::set<State> cur) {
  for (const auto& s : b) cur = reach_stmt(*s, cur);
  return cur;
}

std::set<State> loop_head(const Stmt& s, const std::set<State>& in) {
  std::set<State> head = in, frontier = in;
  while (!frontier.empty()) {
    std::set<State> body_in;
    for (const auto& m : frontier) {
      bool failed;
      if (guard_holds(*s.expr, m, failed)) body_in.insert(m);
    }
    frontier.clear();
    for (const auto& m : reach_block(s.body, body_in))
      if (head.insert(m).second) frontier.insert(m);
    if (head.size() > reach_cap) throw BudgetError("reachable state set exceeds " + std::to_string(reach_cap));
  }
  return head;
}

std::set<State> filter_guard(const Expr& g, const std::set<State>& in, bool want) {
  std::set<State> out;
  for (const auto& m : in) {
    bool failed;
    bool v = guard_holds(g, m, failed);
    if (!failed && v == want) out.insert(m);
  }
  return out;
}

std::set<State> reach_stmt(const Stmt& s, const std::set<State>& in) {
  switch (s.kind) {
    case StmtKind::Skip:
      return in;
    case StmtKind::Abort:
      return {};
    case StmtKind::Assign:
    case StmtKind::Sample: {
      std::set<State> out;
      for (const auto& m : in)
        for (const auto& [m2, p] : exec_stmt(s, m, 0).mass) out.insert(m2);
      return out;
    }
    case StmtKind::If: {
      auto a = reach_block(s.body, filter_guard(*s.expr, in, true));
      auto b = reach_block(s.els, filter_guard(*s.expr, in, false));
      a.insert(b.begin(), b.end());
      return a;
    }
    case StmtKind::While:
      return filter_guard(*s.expr, loop_head(s, in), false);
    case StmtKind::For:
      throw std::logic_error("reachability on a program that was not desugared");
  }
  return {};
}

std::string describe(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b)
    if (s->kind != StmtKind::Skip) ++n;
  if (n == 0) return "nothing";
  std::string first = print_block({b[0]}, 0);
  if (auto nl = first.find('\n'); nl != std::string::npos) first = first.substr(0, nl);
  while (!first.empty() && first.back() == ' ') first.pop_back();
  if (first.size() > 60) first = first.substr(0, 57) + "...";
  return std::to_string(b.size()) + (b.size() == 1 ? " statement `" : " statements starting with `") + first + "`";
}

bool only_skips(const Block& b) {
  for (const auto& s : b)
    if (s->kind != StmtKind::Skip) return false;
  return true;
}

// A proof node: head symbol, keyword arguments and positional children.
struct Node {
  std::string head;
  std::map<std::string, const SExpr*> kw;
  std::vector<const SExpr*> pos;
};

std::size_t to_index(const SExpr& s) {
  if (s.kind != SExpr::Kind::Symbol) throw std::invalid_argument("expected a number, got " + s.to_string());
  std::size_t used = 0;
  long v = std::stol(s.text, &used);
  if (used != s.text.size() || v < 0) throw std::invalid_argument("expected a number, got " + s.text);
  return static_cast<std::size_t>(v);
}

using Shape = std::pair<std::size_t, std::size_t>;

class Checker {
 public:
  Checker(const Judgment& j, Instance& inst, const ProofScript& script, const CheckOptions& opt,
          std::vector<Obligation>& log)
      : j_(j), in_(inst), script_(script), opt_(opt), log_(log) {
    groups_[1] = j.left->num_groups;
    groups_[2] = j.right->num_groups;
  }

  ExprPtr check(const SExpr& s0, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
                const std::set<State>& rr, const std::string& at) {
    const SExpr& s = expand(s0);
    Node n = view(s, at);
    std::string path = at.empty() ? n.head : at + "/" + n.head;
    const std::string& h = n.head;
    if (h == "skip") {
      if (!only_skips(L) || !only_skips(R))
        reject("Skip", path, "expects nothing left to prove, found " + describe(L) + " / " + describe(R));
      return post;
    }
    if (h == "assg" || h == "assg-l" || h == "assg-r") return assg(n, L, R, post, path);
    if (h == "rand") return rand(n, L, R, post, rl, rr, path);
    if (h == "rand-l" || h == "rand-r") return rand_one(n, L, R, post, path);
    if (h == "cond") return cond(n, L, R, post, rl, rr, path);
    if (h == "cond-l" || h == "cond-r") return cond_one(n, L, R, post, rl, rr, path);
    if (h == "while") return while2(n, L, R, post, rl, rr, path);
    if (h == "while-l" || h == "while-r") return while_one(n, L, R, post, rl, rr, path);
    if (h == "seq") return seq(n, L, R, post, rl, rr, path);
    if (h == "case") return case_(n, L, R, post, rl, rr, path);
    if (h == "conseq") return conseq(n, L, R, post, rl, rr, path);
    if (h == "struct") return struct_(n, L, R, post, rl, rr, path);
    reject("Script", path, "unknown rule " + h);
  }

  void implies(const ExprPtr& a, const ExprPtr& b, const std::string& rule, const std::string& path,
               const std::string& what) {
    auto r = check_implies(a, b, in_.rel, opt_.budget);
    Obligation o{path, rule, what, r.valid, ""};
    o.detail = r.valid ? std::to_string(r.explored) + " nodes" : (r.cex ? r.cex->to_string() : "");
    log_.push_back(o);
    if (!r.valid) throw Rejection{rule, path, what + " fails", r.cex};
  }

  void note(const std::string& path, const std::string& rule, const std::string& what, const std::string& detail) {
    log_.push_back({path, rule, what, true, detail});
  }

  [[noreturn]] void reject(const std::string& rule, const std::string& path, const std::string& reason) {
    log_.push_back({path, rule, reason, false, ""});
    throw Rejection{rule, path, reason, std::nullopt};
  }

 private:
  const SExpr& expand(const SExpr& s, int depth = 0) {
    if (s.head() != "use") return s;
    if (depth > 64) reject("Script", "", "macro expansion too deep");
    if (s.items.size() != 2) reject("Script", "", "(use NAME) takes one name");
    auto it = script_.defines.find(s.items[1].text);
    if (it == script_.defines.end()) reject("Script", "", "undefined macro " + s.items[1].text);
    return expand(it->second, depth + 1);
  }

  Node view(const SExpr& s, const std::string& at) {
    Node n;
    if (s.kind == SExpr::Kind::Symbol) {
      n.head = s.text;
      return n;
    }
    if (s.kind != SExpr::Kind::List || s.head().empty()) reject("Script", at, "expected a rule, got " + s.to_string());
    n.head = s.head();
    for (std::size_t i = 1; i < s.items.size(); ++i) {
      if (s.items[i].is_keyword()) {
        if (i + 1 >= s.items.size()) reject("Script", at, "keyword " + s.items[i].text + " needs a value");
        n.kw[s.items[i].text] = &s.items[i + 1];
        ++i;
      } else {
        n.pos.push_back(&s.items[i]);
      }
    }
    return n;
  }

  std::string text_of(const Node& n, const std::string& key, const std::string& path) {
    auto it = n.kw.find(key);
    if (it == n.kw.end()) reject("Script", path, n.head + " needs " + key);
    const SExpr& v = expand(*it->second);
    if (v.kind != SExpr::Kind::String) reject("Script", path, key + " expects a string");
    return v.text;
  }

  ExprPtr formula(const std::string& text, const std::string& path) {
    try {
      return parse_assertion(text, in_.rel);
    } catch (const SyntaxError& e) {
      reject("Script", path, "in formula \"" + text + "\": " + e.what());
    } catch (const TypeError& e) {
      reject("Script", path, "in formula \"" + text + "\": " + e.what());
    }
  }

  std::optional<Shape> shape(const SExpr& s0) {
    const SExpr& s = expand(s0);
    Node n = view(s, "");
    if (auto it = n.kw.find(":take"); it != n.kw.end()) {
      const SExpr& t = *it->second;
      if (t.kind != SExpr::Kind::List || t.items.size() != 2) reject("Script", "", ":take expects (L R)");
      return Shape{to_index(t.items[0]), to_index(t.items[1])};
    }
    std::size_t other = 0;
    if (auto it = n.kw.find(":other"); it != n.kw.end()) other = to_index(*it->second);
    const std::string& h = n.head;
    if (h == "skip") return Shape{0, 0};
    if (h == "assg" || h == "rand" || h == "cond" || h == "while") return Shape{1, 1};
    if (h == "assg-l" || h == "rand-l" || h == "while-l") return Shape{1, 0};
    if (h == "assg-r" || h == "rand-r" || h == "while-r") return Shape{0, 1};
    if (h == "cond-l") return Shape{1, other};
    if (h == "cond-r") return Shape{other, 1};
    if ((h == "conseq" || h == "case") && !n.pos.empty()) return shape(*n.pos[0]);
    if (h == "seq") {
      Shape sum{0, 0};
      bool known = true;
      for (const auto* c : n.pos) {
        auto sh = shape(*c);
        if (!sh) {
          known = false;
          break;
        }
        sum.first += sh->first;
        sum.second += sh->second;
      }
      if (known) return sum;
      if (auto it = n.kw.find(":at"); it != n.kw.end() && n.pos.size() == 2) {
        auto sh = shape(*n.pos[1]);
        if (!sh) return std::nullopt;
        auto at = at_pair(*it->second);
        return Shape{at.first + sh->first, at.second + sh->second};
      }
    }
    return std::nullopt;
  }

  Shape at_pair(const SExpr& t) {
    if (t.kind != SExpr::Kind::List || t.items.size() != 2) reject("Script", "", ":at expects (K1 K2)");
    return {to_index(t.items[0]), to_index(t.items[1])};
  }

  const Layout& layout(int side) const { return *in_.rel.side[side]; }

  ExprPtr assg(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::string& path) {
    bool left = n.head != "assg-r", right = n.head != "assg-l";
    const char* rule = n.head == "assg" ? "Assg" : left ? "Assg-L" : "Assg-R";
    auto single = [&](const Block& b, bool want) {
      if (!want) return only_skips(b);
      return b.size() == 1 && b[0]->kind == StmtKind::Assign;
    };
    if (!single(L, left) || !single(R, right))
      reject(rule, path,
             std::string("expects ") + (left ? "an assignment" : "nothing") + " on the left and " +
                 (right ? "an assignment" : "nothing") + " on the right, found " + describe(L) + " / " + describe(R));
    ExprPtr phi = post;
    if (right) phi = subst_target(phi, 2, *R[0], retag(R[0]->expr, 2), layout(2));
    if (left) phi = subst_target(phi, 1, *L[0], retag(L[0]->expr, 1), layout(1));
    return phi;
  }

  ExprPtr rand(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
               const std::set<State>& rr, const std::string& path) {
    if (L.size() != 1 || R.size() != 1 || L[0]->kind != StmtKind::Sample || R[0]->kind != StmtKind::Sample)
      reject("Rand", path, "expects one sampling on each side, found " + describe(L) + " / " + describe(R));
    const Stmt& a = *L[0];
    const Stmt& b = *R[0];
    ValueDist g1 = eval_dist(*a.dist), g2 = eval_dist(*b.dist);
    TypePtr t1 = a.dist->type, t2 = b.dist->type;
    std::string v = "v";
    ExprPtr f;
    std::string ftext = "id";
    auto it = n.kw.find(":f");
    if (it != n.kw.end() && !it->second->is_symbol("id")) {
      ftext = it->second->text;
      static const std::regex lam(R"(^\s*fun\s+([A-Za-z_][A-Za-z0-9_']*)\s*->([\s\S]*)$)");
      std::smatch m;
      if (!std::regex_match(ftext, m, lam)) reject("Script", path, ":f expects \"fun v -> e\" or id");
      v = m[1];
      Scope sc = in_.rel;
      sc.bound = {{v, t1}};
      try {
        auto e = check_expr(parse_expr(m[2].str()), sc);
        if (!assignable(*t2, *e->type))
          reject("Rand", path, "f returns " + type_to_string(*e->type) + ", the right sample has type " +
                                   type_to_string(*t2));
        f = fold(coerce_to(e, t2));
      } catch (const SyntaxError& e) {
        reject("Script", path, std::string("in :f: ") + e.what());
      } catch (const TypeError& e) {
        reject("Script", path, std::string("in :f: ") + e.what());
      }
    } else {
      if (!assignable(*t2, *t1))
        reject("Rand", path, "identity coupling between " + type_to_string(*t1) + " and " + type_to_string(*t2));
      f = fold(coerce_to(bound_var(v, t1), t2));
    }

    // f must be a bijection between the supports preserving mass, at every
    // reachable pair of states (projected on the variables f reads)
    std::set<VarRef> fv = free_vars(*f);
    auto project = [&](const std::set<State>& states, int side) {
      std::map<std::vector<Value>, const State*> out;
      for (const auto& m : states) {
        std::vector<Value> key;
        for (const auto& [tag, slot] : fv)
          if (tag == side) key.push_back(m.vals[static_cast<std::size_t>(slot)]);
        out.emplace(std::move(key), &m);
      }
      return out;
    };
    auto p1 = project(rl, 1), p2 = project(rr, 2);
    if (p1.size() * p2.size() > 10'000'000) throw BudgetError("too many state pairs for the f-coupling check");
    std::size_t checked = 0;
    for (const auto& [k1, m1] : p1)
      for (const auto& [k2, m2] : p2) {
        EvalEnv env;
        env.st[1] = m1;
        env.st[2] = m2;
        FCouplingResult r;
        try {
          r = check_f_coupling(g1, g2, [&](const Value& x) -> std::optional<Value> {
            env.bound = {{&v, x}};
            try {
              return eval(*f, env);
            } catch (const EvalError&) {
              return std::nullopt;
            }
          });
        } catch (const std::invalid_argument&) {
          r.reason = "f is undefined on part of the support";
        }
        if (!r.ok) {
          log_.push_back({path, "Rand", "f-coupling for f = " + ftext, false, r.reason});
          CounterExample cex;
          for (const auto& [tag, slot] : fv) {
            const State* m = tag == 1 ? m1 : m2;
            const auto& var = layout(tag).vars[static_cast<std::size_t>(slot)];
            cex.bindings.emplace_back(var.name + "{" + std::to_string(tag) + "}",
                                      format_value(m->vals[static_cast<std::size_t>(slot)], *var.type));
          }
          throw Rejection{"Rand", path, "f is not a coupling bijection: " + r.reason, cex};
        }
        ++checked;
      }
    note(path, "Rand", "f-coupling for f = " + ftext, std::to_string(checked) + " reachable state pairs");

    std::vector<ExprPtr> conj;
    for (const auto& [x, p] : g1.mass) {
      auto lit = mk_lit(x, t1);
      ExprPtr phi = subst_target(post, 1, a, lit, layout(1));
      phi = subst_target(phi, 2, b, fold(subst_bound(f, v, lit)), layout(2));
      conj.push_back(phi);
    }
    return fold(mk_and(conj));
  }

  ExprPtr rand_one(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::string& path) {
    bool left = n.head == "rand-l";
    const char* rule = left ? "Rand-L" : "Rand-R";
    const Block& mine = left ? L : R;
    const Block& other = left ? R : L;
    if (mine.size() != 1 || mine[0]->kind != StmtKind::Sample || !only_skips(other))
      reject(rule, path, std::string("expects one sampling on the ") + (left ? "left" : "right") +
                             " and nothing on the other side, found " + describe(L) + " / " + describe(R));
    const Stmt& s = *mine[0];
    int side = left ? 1 : 2;
    std::vector<ExprPtr> conj;
    for (const auto& [x, p] : eval_dist(*s.dist).mass)
      conj.push_back(subst_target(post, side, s, mk_lit(x, s.dist->type), layout(side)));
    return fold(mk_and(conj));
  }

  ExprPtr child_or_empty(const Node& n, std::size_t i, const Block& L, const Block& R, const ExprPtr& post,
                         const std::set<State>& rl, const std::set<State>& rr, const std::string& path,
                         const std::string& rule) {
    if (i < n.pos.size()) return check(*n.pos[i], L, R, post, rl, rr, path + "." + std::to_string(i + 1));
    if (only_skips(L) && only_skips(R)) return post;
    reject(rule, path, "missing premise for " + describe(L) + " / " + describe(R));
  }

  ExprPtr cond(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
               const std::set<State>& rr, const std::string& path) {
    if (L.size() != 1 || R.size() != 1 || L[0]->kind != StmtKind::If || R[0]->kind != StmtKind::If)
      reject("Cond", path, "expects one conditional on each side, found " + describe(L) + " / " + describe(R));
    const Stmt& a = *L[0];
    const Stmt& b = *R[0];
    auto p1 = child_or_empty(n, 0, a.body, b.body, post, filter_guard(*a.expr, rl, true),
                             filter_guard(*b.expr, rr, true), path, "Cond");
    auto p2 = child_or_empty(n, 1, a.els, b.els, post, filter_guard(*a.expr, rl, false),
                             filter_guard(*b.expr, rr, false), path, "Cond");
    auto e1 = retag(a.expr, 1), e2 = retag(b.expr, 2);
    return f_and(f_iff(e1, e2), f_and(f_imp(e1, p1), f_imp(f_not(e1), p2)));
  }

  ExprPtr cond_one(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
                   const std::set<State>& rr, const std::string& path) {
    bool left = n.head == "cond-l";
    const char* rule = left ? "Cond-L" : "Cond-R";
    const Block& mine = left ? L : R;
    if (mine.size() != 1 || mine[0]->kind != StmtKind::If)
      reject(rule, path, std::string("expects one conditional on the ") + (left ? "left" : "right") + ", found " +
                             describe(mine));
    const Stmt& s = *mine[0];
    const auto& mine_r = left ? rl : rr;
    auto rt = filter_guard(*s.expr, mine_r, true), rf = filter_guard(*s.expr, mine_r, false);
    ExprPtr p1, p2;
    if (left) {
      p1 = child_or_empty(n, 0, s.body, R, post, rt, rr, path, rule);
      p2 = child_or_empty(n, 1, s.els, R, post, rf, rr, path, rule);
    } else {
      p1 = child_or_empty(n, 0, L, s.body, post, rl, rt, path, rule);
      p2 = child_or_empty(n, 1, L, s.els, post, rl, rf, path, rule);
    }
    auto e = retag(s.expr, left ? 1 : 2);
    return f_and(f_imp(e, p1), f_imp(f_not(e), p2));
  }

  ExprPtr while2(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
                 const std::set<State>& rr, const std::string& path) {
    if (L.size() != 1 || R.size() != 1 || L[0]->kind != StmtKind::While || R[0]->kind != StmtKind::While)
      reject("While", path, "expects one loop on each side, found " + describe(L) + " / " + describe(R));
    const Stmt& a = *L[0];
    const Stmt& b = *R[0];
    auto inv = formula(text_of(n, ":inv", path), path);
    auto e1 = retag(a.expr, 1), e2 = retag(b.expr, 2);
    auto sync = f_iff(e1, e2);
    auto body_pre = child_or_empty(n, 0, a.body, b.body, f_and(inv, sync),
                                   filter_guard(*a.expr, loop_head(a, rl), true),
                                   filter_guard(*b.expr, loop_head(b, rr), true), path, "While");
    implies(f_and(inv, f_and(e1, e2)), body_pre, "While", path, "invariant and both guards imply the body's precondition");
    implies(f_and(inv, f_and(f_not(e1), f_not(e2))), post, "While", path, "invariant at exit implies the postcondition");
    return f_and(inv, sync);
  }

  ExprPtr while_one(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
                    const std::set<State>& rr, const std::string& path) {
    bool left = n.head == "while-l";
    const char* rule = left ? "While-L" : "While-R";
    const Block& mine = left ? L : R;
    const Block& other = left ? R : L;
    if (mine.size() != 1 || mine[0]->kind != StmtKind::While || !only_skips(other))
      reject(rule, path, std::string("expects one loop on the ") + (left ? "left" : "right") +
                             " and nothing on the other side, found " + describe(L) + " / " + describe(R));
    const Stmt& s = *mine[0];
    int side = left ? 1 : 2;
    const auto& mine_r = left ? rl : rr;
    auto inv = formula(text_of(n, ":inv", path), path);
    auto e = retag(s.expr, side);
    auto body_in = filter_guard(*s.expr, loop_head(s, mine_r), true);
    ExprPtr body_pre = left ? child_or_empty(n, 0, s.body, {}, inv, body_in, rr, path, rule)
                            : child_or_empty(n, 0, {}, s.body, inv, rl, body_in, path, rule);
    implies(f_and(inv, e), body_pre, rule, path, "invariant and guard imply the body's precondition");
    implies(f_and(inv, f_not(e)), post, rule, path, "invariant at exit implies the postcondition");
    auto ll = check_lossless(Block{mine[0]}, std::vector<State>(mine_r.begin(), mine_r.end()), opt_.fuel, opt_.tol);
    bool ok = ll.kind != LosslessKind::NotLossless;
    log_.push_back({path, rule, "loop is lossless from every reachable state", ok, ll.to_string()});
    if (!ok) throw Rejection{rule, path, "loop is not lossless: " + ll.to_string(), std::nullopt};
    return inv;
  }

  ExprPtr seq(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
              const std::set<State>& rr, const std::string& path) {
    std::size_t k = n.pos.size();
    if (k == 0) reject("Seq", path, "needs at least one premise");
    auto mid = n.kw.find(":mid");
    if (mid != n.kw.end() && k != 2) reject("Script", path, ":mid needs exactly two premises");
    if (k == 1) return check(*n.pos[0], L, R, post, rl, rr, path + ".1");
    // pieces are taken from the end; the first premise gets the rest
    std::vector<Shape> cut(k + 1);
    cut[k] = {L.size(), R.size()};
    if (auto at = n.kw.find(":at"); at != n.kw.end()) {
      if (k != 2) reject("Script", path, ":at needs exactly two premises");
      cut[1] = at_pair(*at->second);
    } else {
      for (std::size_t i = k; i-- > 1;) {
        auto sh = shape(*n.pos[i]);
        if (!sh)
          reject("Script", path + "." + std::to_string(i + 1),
                 "cannot tell how many statements this premise covers; add :take (L R) or :at on the seq");
        if (sh->first > cut[i + 1].first || sh->second > cut[i + 1].second)
          reject("Seq", path, "premise " + std::to_string(i + 1) + " needs more statements than remain");
        cut[i] = {cut[i + 1].first - sh->first, cut[i + 1].second - sh->second};
      }
    }
    cut[0] = {0, 0};
    if (cut[1].first > L.size() || cut[1].second > R.size()) reject("Seq", path, ":at is out of range");
    std::vector<Block> lb(k), rb(k);
    std::vector<std::set<State>> ls(k), rs(k);
    for (std::size_t i = 0; i < k; ++i) {
      lb[i] = Block(L.begin() + static_cast<long>(cut[i].first), L.begin() + static_cast<long>(cut[i + 1].first));
      rb[i] = Block(R.begin() + static_cast<long>(cut[i].second), R.begin() + static_cast<long>(cut[i + 1].second));
      ls[i] = i == 0 ? rl : reach_block(lb[i - 1], ls[i - 1]);
      rs[i] = i == 0 ? rr : reach_block(rb[i - 1], rs[i - 1]);
    }
    ExprPtr phi = post;
    for (std::size_t i = k; i-- > 0;) {
      phi = check(*n.pos[i], lb[i], rb[i], phi, ls[i], rs[i], path + "." + std::to_string(i + 1));
      if (i == 1 && mid != n.kw.end()) {
        if (mid->second->kind != SExpr::Kind::String) reject("Script", path, ":mid expects a string");
        auto xi = formula(mid->second->text, path);
        implies(xi, phi, "Seq", path, "midpoint implies the second premise's precondition");
        phi = xi;
      }
    }
    return phi;
  }

  ExprPtr case_(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
                const std::set<State>& rr, const std::string& path) {
    auto xi = formula(text_of(n, ":xi", path), path);
    if (n.pos.size() != 2) reject("Case", path, "needs two premises");
    if (xi->kind == ExprKind::Lit) {
      // a closed condition (metas only) leaves one branch with a false precondition
      bool on = xi->lit.as_bool();
      note(path, "Case", "condition is constant", on ? "second premise vacuous" : "first premise vacuous");
      return check(*n.pos[on ? 0 : 1], L, R, post, rl, rr, path + (on ? ".1" : ".2"));
    }
    auto p1 = check(*n.pos[0], L, R, post, rl, rr, path + ".1");
    auto p2 = check(*n.pos[1], L, R, post, rl, rr, path + ".2");
    return f_and(f_imp(xi, p1), f_imp(f_not(xi), p2));
  }

  ExprPtr conseq(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
                 const std::set<State>& rr, const std::string& path) {
    if (n.pos.size() != 1) reject("Conseq", path, "needs one premise");
    ExprPtr q = post;
    if (n.kw.count(":post")) {
      q = formula(text_of(n, ":post", path), path);
      implies(q, post, "Conseq", path, "strengthened postcondition implies the goal");
    }
    auto phi = check(*n.pos[0], L, R, q, rl, rr, path + ".1");
    if (n.kw.count(":pre")) {
      auto p = formula(text_of(n, ":pre", path), path);
      implies(p, phi, "Conseq", path, "weakened precondition implies the premise's precondition");
      phi = p;
    }
    return phi;
  }

  Block transform(const SExpr& op, Block b, int side, const std::set<State>& seeds, const std::string& path) {
    std::string h = op.head();
    auto idx = [&](std::size_t i) {
      if (i + 1 > op.items.size()) reject("Script", path, "(" + h + ") is missing an argument");
      std::size_t k = to_index(op.items[i]);
      if (k < 1 || k > b.size())
        reject("Struct", path, h + ": statement " + std::to_string(k) + " out of range (block has " +
                                   std::to_string(b.size()) + ")");
      return k - 1;
    };
    auto str = [&](std::size_t i, const char* usage) {
      if (i >= op.items.size()) reject("Script", path, usage);
      const SExpr& v = expand(op.items[i]);
      if (v.kind != SExpr::Kind::String) reject("Script", path, usage);
      return v.text;
    };
    Scope& sc = side == 1 ? in_.left : in_.right;
    const char* side_name = side == 1 ? "left" : "right";
    try {
      if (h == "swap") {
        std::size_t i = idx(1), k = idx(2);
        if (i > k) std::swap(i, k);
        if (i == k) return b;
        b = move_stmt(b, i, k);
        b = move_stmt(b, k - 1, i);
        note(path, "Struct", std::string("swap ") + side_name + " " + std::to_string(i + 1) + " " +
                                 std::to_string(k + 1), "variables disjoint");
        return b;
      }
      if (h == "move") {
        std::size_t i = idx(1), k = idx(2);
        b = move_stmt(b, i, k);
        note(path, "Struct", std::string("move ") + side_name + " " + std::to_string(i + 1) + " to " +
                                 std::to_string(k + 1), "variables disjoint");
        return b;
      }
      if (h == "split") {
        std::size_t i = idx(1);
        if (b[i]->kind != StmtKind::While) reject("Struct", path, "split: statement " + std::to_string(i + 1) + " is not a loop");
        std::string guard = str(2, "(split I \"e'\") needs a guard");
        auto e = check_bool(parse_expr(guard), sc);
        auto pieces = while_split(*b[i], e);
        b.erase(b.begin() + static_cast<long>(i));
        b.insert(b.begin() + static_cast<long>(i), pieces.begin(), pieces.end());
        note(path, "Struct", std::string("while-split ") + side_name + " " + std::to_string(i + 1), guard);
        return b;
      }
      if (h == "replace") {
        std::size_t i = idx(1), k = idx(2);
        if (k < i) reject("Struct", path, "replace: empty range");
        std::string text = str(3, "(replace I J \"stmts\") needs the new statements");
        Block fresh = check_block(desugar_block(parse_block(text)), sc, groups_[side]);
        Block old(b.begin() + static_cast<long>(i), b.begin() + static_cast<long>(k) + 1);
        auto from = reach_block(Block(b.begin(), b.begin() + static_cast<long>(i)), seeds);
        auto eq = semantic_equiv(old, fresh, std::vector<State>(from.begin(), from.end()), opt_.fuel);
        std::string what = std::string("replace ") + side_name + " " + std::to_string(i + 1) + ".." +
                           std::to_string(k + 1);
        if (!eq.equivalent) {
          log_.push_back({path, "Struct", what, false, eq.detail});
          std::optional<CounterExample> cex;
          if (eq.witness) cex = CounterExample{{{"state", format_state(*eq.witness, layout(side))}}};
          throw Rejection{"Struct", path, what + ": not equivalent (" + eq.detail + ")", cex};
        }
        note(path, "Struct", what, "equivalent on " + std::to_string(from.size()) + " reachable states");
        b.erase(b.begin() + static_cast<long>(i), b.begin() + static_cast<long>(k) + 1);
        b.insert(b.begin() + static_cast<long>(i), fresh.begin(), fresh.end());
        return b;
      }
    } catch (const SwapError& e) {
      reject("Struct", path, h + " on the " + side_name + ": " + e.what());
    } catch (const SyntaxError& e) {
      reject("Script", path, h + ": " + e.what());
    } catch (const TypeError& e) {
      reject("Script", path, h + ": " + e.what());
    }
    reject("Script", path, "unknown structural step " + op.to_string());
  }

  ExprPtr struct_(const Node& n, const Block& L, const Block& R, const ExprPtr& post, const std::set<State>& rl,
                  const std::set<State>& rr, const std::string& path) {
    if (n.pos.size() != 1) reject("Struct", path, "needs one premise");
    Block nl = L, nr = R;
    for (int side : {1, 2}) {
      auto it = n.kw.find(side == 1 ? ":left" : ":right");
      if (it == n.kw.end()) continue;
      const SExpr& ops = *it->second;
      if (ops.kind != SExpr::Kind::List) reject("Script", path, "structural steps must be lists");
      std::vector<const SExpr*> list;
      if (!ops.head().empty())
        list.push_back(&ops);
      else
        for (const auto& o : ops.items) list.push_back(&o);
      Block& b = side == 1 ? nl : nr;
      for (const auto* o : list) b = transform(*o, b, side, side == 1 ? rl : rr, path);
    }
    return check(*n.pos[0], nl, nr, post, rl, rr, path + ".1");
  }

  const Judgment& j_;
  Instance& in_;
  const ProofScript& script_;
  const CheckOptions& opt_;
  std::vector<Obligation>& log_;
  int groups_[3] = {0, 0, 0};
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scope with_metas(Scope sc, const Judgment& j, const MetaEnv& env) {
  for (const auto& [name, v] : env) {
    auto md = std::find_if(j.metas.begin(), j.metas.end(), [&](const MetaDecl& m) { return m.name == name; });
    if (md == j.metas.end()) throw std::invalid_argument("unknown meta-parameter " + name);
    Scope tsc = j.left->scope();
    for (const auto& [k, c] : sc.consts) tsc.consts.emplace(k, c);
    ConstInfo c;
    c.name = name;
    c.type = resolve_type(*parse_type(md->type), tsc);
    c.value = v;
    sc.consts[name] = c;
  }
  return sc;
}

}  // namespace

std::string format_env(const MetaEnv& env) {
  std::string s;
  for (const auto& [k, v] : env) s += (s.empty() ? "" : ", ") + k + "=" + v.to_string();
  return s.empty() ? "-" : s;
}

Instance make_instance(const Judgment& j, const MetaEnv& env) {
  Instance in;
  in.rel = with_metas(relational_scope(*j.left, *j.right), j, env);
  in.left = with_metas(j.left->scope(), j, env);
  in.left.side[0] = j.left->layout.get();
  in.right = with_metas(j.right->scope(), j, env);
  in.right.side[0] = j.right->layout.get();
  if (!j.funs.empty()) {
    Program p = parse_program("program funs\n" + j.funs + "\nbegin\nend\n");
    check_funs(p.funs, in.rel);
    for (const auto& f : p.funs) {
      in.left.funs[f.name] = in.rel.funs[f.name];
      in.right.funs[f.name] = in.rel.funs[f.name];
    }
  }
  in.pre = parse_assertion(j.pre.empty() ? "true" : j.pre, in.rel);
  in.post = parse_assertion(j.post, in.rel);
  return in;
}

std::vector<MetaEnv> instantiate_family(const Judgment& j) {
  std::vector<MetaEnv> out;
  MetaEnv cur;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == j.metas.size()) {
      if (!j.where.empty()) {
        Scope sc = with_metas(j.left->scope(), j, cur);
        auto e = fold(check_bool(parse_expr(j.where), sc));
        if (!eval_closed(*e).as_bool()) return;
      }
      out.push_back(cur);
      return;
    }
    Scope sc = with_metas(j.left->scope(), j, cur);
    auto t = resolve_type(*parse_type(j.metas[i].type), sc);
    for (const auto& v : enumerate_type(*t, 1'000'000)) {
      cur.emplace_back(j.metas[i].name, v);
      go(i + 1);
      cur.pop_back();
    }
  };
  go(0);
  return out;
}

ProofScript parse_proof_script(std::string_view text, const std::string& dir) {
  ProofScript ps;
  ps.dir = dir;
  for (auto& form : parse_sexprs(text)) {
    std::string h = form.head();
    if (h == "judgment") {
      ps.header = form;
    } else if (h == "define") {
      if (form.items.size() != 3 || form.items[1].kind != SExpr::Kind::Symbol)
        throw SExprError("line " + std::to_string(form.line) + ": (define NAME TREE)");
      ps.defines[form.items[1].text] = form.items[2];
    } else if (h == "proof") {
      if (form.items.size() != 2) throw SExprError("line " + std::to_string(form.line) + ": (proof TREE)");
      ps.proof = form.items[1];
    } else if (h == "funs") {
      for (std::size_t i = 1; i < form.items.size(); ++i) ps.funs += form.items[i].text + "\n";
    } else {
      throw SExprError("line " + std::to_string(form.line) + ": unexpected top-level form " + form.to_string());
    }
  }
  return ps;
}

ProofScript load_proof_file(const std::string& path) {
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse_proof_script(read_file(path), dir.empty() ? "." : dir);
}

Judgment judgment_from_header(const SExpr& header, const std::shared_ptr<const TypedProgram>& main,
                              const std::string& dir, const Bindings& bindings) {
  Judgment j;
  j.left = j.right = main;
  auto program = [&](const SExpr& s) -> std::shared_ptr<const TypedProgram> {
    if (s.is_symbol("self")) return main;
    auto load = [&](const std::string& p) {
      auto full = std::filesystem::path(p).is_absolute() ? p : (std::filesystem::path(dir) / p).string();
      return std::make_shared<const TypedProgram>(load_program_file(full, bindings));
    };
    if (s.kind == SExpr::Kind::String) return load(s.text);
    if (s.head() == "selfcompose" && s.items.size() >= 2) {
      auto base = s.items.size() >= 3 ? load(s.items[2].text) : main;
      return std::make_shared<const TypedProgram>(self_compose(*base, static_cast<int>(to_index(s.items[1]))));
    }
    throw SExprError("bad program in judgment: " + s.to_string());
  };
  for (std::size_t i = 1; i + 1 < header.items.size(); i += 2) {
    const auto& k = header.items[i];
    const auto& v = header.items[i + 1];
    if (k.text == ":left") {
      j.left = program(v);
    } else if (k.text == ":right") {
      j.right = program(v);
    } else if (k.text == ":meta") {
      for (const auto& m : v.items) {
        if (m.items.size() != 2) throw SExprError("meta declarations are (name \"type\")");
        j.metas.push_back({m.items[0].text, m.items[1].text});
      }
    } else if (k.text == ":where") {
      j.where = v.text;
    } else if (k.text == ":pre") {
      j.pre = v.text;
    } else if (k.text == ":post") {
      j.post = v.text;
    } else if (k.text == ":funs") {
      j.funs += v.text + "\n";
    } else {
      throw SExprError("unknown judgment field " + k.text);
    }
  }
  if (header.items.size() % 2 == 0) throw SExprError("judgment fields come in pairs");
  if (j.post.empty()) throw SExprError("judgment needs :post");
  return j;
}

std::string ProofResult::to_string() const {
  if (accepted) return "Accepted (" + std::to_string(log.size()) + " obligations)";
  std::string s = "Rejected at " + (path.empty() ? std::string("root") : path) + " by " + rule + ": " + reason;
  if (cex) s += "\n  counterexample: " + cex->to_string();
  return s;
}

ProofResult check_proof(const Judgment& j0, const MetaEnv& env, const ProofScript& script, const CheckOptions& opt) {
  Judgment j = j0;
  j.funs += script.funs;
  ProofResult res;
  try {
    if (!script.proof) throw Rejection{"Script", "", "no (proof ...) form", std::nullopt};
    Instance in = make_instance(j, env);
    auto s1 = initial_states(*j.left, opt.seed_enum);
    auto s2 = initial_states(*j.right, opt.seed_enum);
    Checker c(j, in, script, opt, res.log);
    auto phi = c.check(*script.proof, j.left->body, j.right->body, in.post, std::set<State>(s1.begin(), s1.end()),
                       std::set<State>(s2.begin(), s2.end()), "");
    c.implies(in.pre, phi, "Conseq", "", "precondition implies the derived precondition");
    res.accepted = true;
  } catch (const Rejection& r) {
    res.rule = r.rule;
    res.path = r.path;
    res.reason = r.reason;
    res.cex = r.cex;
  }
  return res;
}

FamilyResult check_proof_family(const Judgment& j, const ProofScript& script, const CheckOptions& opt) {
  FamilyResult fr;
  for (const auto& env : instantiate_family(j)) {
    auto r = check_proof(j, env, script, opt);
    fr.accepted = fr.accepted && r.accepted;
    fr.instances.emplace_back(env, std::move(r));
  }
  return fr;
}

SemanticResult validate_semantic(const Judgment& j, const MetaEnv& env, const CheckOptions& opt) {
  Instance in = make_instance(j, env);
  auto s1 = initial_states(*j.left, opt.seed_enum);
  auto s2 = initial_states(*j.right, opt.seed_enum);
  std::vector<std::optional<StateDist>> o1(s1.size()), o2(s2.size());
  SemanticResult res;
  for (std::size_t a = 0; a < s1.size(); ++a)
    for (std::size_t b = 0; b < s2.size(); ++b) {
      if (!eval_assertion(*in.pre, s1[a], s2[b])) continue;
      ++res.pairs;
      if (!o1[a]) o1[a] = exec(j.left->body, s1[a], opt.fuel);
      if (!o2[b]) o2[b] = exec(j.right->body, s2[b], opt.fuel);
      Rational slack = std::max(o1[a]->residual, o2[b]->residual);
      if (slack > res.max_slack) res.max_slack = slack;
      auto c = find_coupling(*o1[a], *o2[b],
                             [&](const State& x, const State& y) { return eval_assertion(*in.post, x, y); }, slack);
      if (!c.feasible) {
        res.holds = false;
        res.failing = {s1[a], s2[b]};
        res.detail = "no coupling: a set of left outputs has mass " + to_string(c.cut_left) +
                     " but its related right outputs only " + to_string(c.cut_right) + " (slack " +
                     to_string(slack) + ")";
        return res;
      }
    }
  return res;
}

std::set<State> reachable(const Block& b, const std::set<State>& from) { return reach_block(b, from); }

}  // namespace couplecheck
