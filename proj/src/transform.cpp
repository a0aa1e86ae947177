#include "couplecheck/transform.hpp"

#include <algorithm>

#include "couplecheck/assertion.hpp"
#include "couplecheck/eval.hpp"

namespace couplecheck {

namespace {

void expr_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Var && (e.ref == RefKind::State || e.ref == RefKind::Unresolved)) out.insert(e.name);
  for (const auto& a : e.args) expr_vars(*a, out);
}

void footprint_into(const Stmt& s, Footprint& f) {
  auto read = [&](const ExprPtr& e) {
    if (e) expr_vars(*e, f.all);
  };
  switch (s.kind) {
    case StmtKind::Skip:
    case StmtKind::Abort:
      return;
    case StmtKind::Assign:
    case StmtKind::Sample:
      f.all.insert(s.var);
      f.modified.insert(s.var);
      read(s.index);
      read(s.expr);
      return;
    case StmtKind::If:
    case StmtKind::While:
      read(s.expr);
      break;
    case StmtKind::For:
      f.all.insert(s.var);
      f.modified.insert(s.var);
      read(s.expr);
      read(s.expr2);
      break;
  }
  for (const auto& c : s.body) footprint_into(*c, f);
  for (const auto& c : s.els) footprint_into(*c, f);
}

// Renames program variables to copy i, leaving bound names alone.
ExprPtr rename_expr(const ExprPtr& e, const std::set<std::string>& vars, int i, std::vector<std::string>& bound) {
  if (!e) return e;
  auto c = std::make_shared<Expr>(*e);
  if (e->kind == ExprKind::Var && e->tag == 0 && vars.count(e->name) &&
      std::find(bound.begin(), bound.end(), e->name) == bound.end()) {
    c->name = e->name + "#" + std::to_string(i);
    c->ref = RefKind::Unresolved;
    c->slot = -1;
    return c;
  }
  if (e->kind == ExprKind::Binder) bound.push_back(e->name);
  for (auto& a : c->args) a = rename_expr(a, vars, i, bound);
  if (e->kind == ExprKind::Binder) bound.pop_back();
  return c;
}

Block rename_block(const Block& b, const std::set<std::string>& vars, int i) {
  Block out;
  std::vector<std::string> bound;
  for (const auto& s : b) {
    auto c = std::make_shared<Stmt>(*s);
    if (!c->var.empty() && vars.count(c->var)) c->var += "#" + std::to_string(i);
    c->slot = -1;
    c->index = rename_expr(s->index, vars, i, bound);
    c->expr = rename_expr(s->expr, vars, i, bound);
    c->expr2 = rename_expr(s->expr2, vars, i, bound);
    c->body = rename_block(s->body, vars, i);
    c->els = rename_block(s->els, vars, i);
    c->group = -1;
    out.push_back(c);
  }
  return out;
}

}  // namespace

Footprint var_footprint(const Stmt& s) {
  Footprint f;
  footprint_into(s, f);
  return f;
}

Footprint var_footprint(const Block& b) {
  Footprint f;
  for (const auto& s : b) footprint_into(*s, f);
  return f;
}

Program self_compose_source(const TypedProgram& p, int n) {
  if (n < 1) throw std::invalid_argument("self-composition needs n >= 1");
  Program out;
  out.name = p.name + "_x" + std::to_string(n);
  out.params = p.source.params;
  out.funs = p.source.funs;
  std::set<std::string> vars;
  for (const auto& v : p.source.vars) vars.insert(v.name);
  Block body = desugar_block(p.source.body);
  for (int i = 1; i <= n; ++i) {
    for (const auto& v : p.source.vars) {
      VarDecl d = v;
      d.name = v.name + "#" + std::to_string(i);
      out.vars.push_back(d);
    }
  }
  for (int i = 1; i <= n; ++i) {
    auto copy = rename_block(body, vars, i);
    out.body.insert(out.body.end(), copy.begin(), copy.end());
  }
  return out;
}

TypedProgram self_compose(const TypedProgram& p, int n) { return typecheck(self_compose_source(p, n), p.bindings); }

State self_compose_state(const State& m, int n) {
  State out;
  for (int i = 0; i < n; ++i) out.vals.insert(out.vals.end(), m.vals.begin(), m.vals.end());
  return out;
}

State project_copy(const State& m, std::size_t vars_per_copy, int i) {
  State out;
  auto start = m.vals.begin() + static_cast<std::ptrdiff_t>(vars_per_copy * static_cast<std::size_t>(i - 1));
  out.vals.assign(start, start + static_cast<std::ptrdiff_t>(vars_per_copy));
  return out;
}

Block while_split(const Stmt& loop, const ExprPtr& e_prime) {
  if (loop.kind != StmtKind::While) throw std::invalid_argument("while_split applies to while loops only");
  if (!e_prime->type || e_prime->type->kind != TypeKind::Bool) throw TypeError({"split condition must be bool"});
  auto first = std::make_shared<Stmt>(loop);
  first->expr = fold(mk_binary(Op::And, loop.expr, e_prime));
  first->group_end = false;
  auto second = std::make_shared<Stmt>(loop);
  second->group_start = false;
  return {first, second};
}

Block swap_stmts(const StmtPtr& s1, const StmtPtr& s2) {
  auto f1 = var_footprint(*s1);
  auto f2 = var_footprint(*s2);
  for (const auto& v : f1.all)
    if (f2.all.count(v)) throw SwapError(v);
  return {s2, s1};
}

Block move_stmt(const Block& b, std::size_t from, std::size_t to) {
  if (from >= b.size() || to >= b.size()) throw std::out_of_range("statement index out of range");
  Block out = b;
  while (from < to) {
    auto sw = swap_stmts(out[from], out[from + 1]);
    out[from] = sw[0];
    out[from + 1] = sw[1];
    ++from;
  }
  while (from > to) {
    auto sw = swap_stmts(out[from - 1], out[from]);
    out[from - 1] = sw[0];
    out[from] = sw[1];
    --from;
  }
  return out;
}

EquivResult semantic_equiv(const Block& a, const Block& b, const std::vector<State>& seeds, std::uint32_t fuel) {
  EquivResult r;
  for (const auto& m : seeds) {
    auto da = exec(a, m, fuel);
    auto db = exec(b, m, fuel);
    if (!(da == db)) {
      r.equivalent = false;
      r.witness = m;
      r.detail = "output distributions differ";
      return r;
    }
  }
  return r;
}

EquivResult semantic_equiv(const ExprPtr& phi, const Block& a, const Block& b, const std::vector<State>& seeds1,
                           const std::vector<State>& seeds2, std::uint32_t fuel) {
  EquivResult r;
  for (const auto& m1 : seeds1) {
    auto da = exec(a, m1, fuel);
    for (const auto& m2 : seeds2) {
      if (!eval_assertion(*phi, m1, m2)) continue;
      auto db = exec(b, m2, fuel);
      if (!(da == db)) {
        r.equivalent = false;
        r.witness = m1;
        r.detail = "output distributions differ";
        return r;
      }
    }
  }
  return r;
}

}  // namespace couplecheck
