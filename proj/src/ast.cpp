#include "couplecheck/ast.hpp"

namespace couplecheck {

TypeError::TypeError(std::vector<std::string> msgs)
    : std::runtime_error([&] {
        std::string s;
        for (std::size_t i = 0; i < msgs.size(); ++i) s += (i ? "\n" : "") + msgs[i];
        return s;
      }()),
      messages(std::move(msgs)) {}

ExprPtr mk_lit(Value v, TypePtr t) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Lit;
  e->lit = std::move(v);
  e->type = std::move(t);
  return e;
}

ExprPtr mk_bool(bool b) { return mk_lit(Value::boolean(b), t_bool()); }
ExprPtr mk_int(std::int64_t i) { return mk_lit(Value::integer(i), t_integer()); }

ExprPtr mk_var(std::string name, int tag) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->name = std::move(name);
  e->tag = tag;
  return e;
}

ExprPtr mk_unary(Op op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Unary;
  e->op = op;
  e->args = {std::move(a)};
  if (op == Op::Not) e->type = t_bool();
  return e;
}

ExprPtr mk_binary(Op op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Binary;
  e->op = op;
  e->args = {std::move(a), std::move(b)};
  switch (op) {
    case Op::And: case Op::Or: case Op::Xor: case Op::Implies: case Op::Iff:
    case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
      e->type = t_bool();
      break;
    default:
      break;
  }
  return e;
}

ExprPtr mk_and(std::vector<ExprPtr> conj) {
  if (conj.empty()) return mk_bool(true);
  ExprPtr acc = conj.back();
  for (std::size_t i = conj.size() - 1; i-- > 0;) acc = mk_binary(Op::And, conj[i], acc);
  return acc;
}

ExprPtr mk_cond(ExprPtr c, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Cond;
  e->type = a->type;
  e->args = {std::move(c), std::move(a), std::move(b)};
  return e;
}

StmtPtr mk_assign(std::string x, ExprPtr e) {
  auto s = std::make_shared<Stmt>();
  s->kind = StmtKind::Assign;
  s->var = std::move(x);
  s->expr = std::move(e);
  return s;
}

StmtPtr mk_sample(std::string x, DistPtr d) {
  auto s = std::make_shared<Stmt>();
  s->kind = StmtKind::Sample;
  s->var = std::move(x);
  s->dist = std::move(d);
  return s;
}

StmtPtr mk_while(ExprPtr guard, Block body) {
  auto s = std::make_shared<Stmt>();
  s->kind = StmtKind::While;
  s->expr = std::move(guard);
  s->body = std::move(body);
  return s;
}

StmtPtr mk_if(ExprPtr guard, Block then_b, Block else_b) {
  auto s = std::make_shared<Stmt>();
  s->kind = StmtKind::If;
  s->expr = std::move(guard);
  s->body = std::move(then_b);
  s->els = std::move(else_b);
  return s;
}

StmtPtr mk_skip() {
  auto s = std::make_shared<Stmt>();
  s->kind = StmtKind::Skip;
  return s;
}

namespace {

bool opt_expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return expr_equal(*a, *b);
}

bool syn_equal(const TypeSynPtr& a, const TypeSynPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->labels != b->labels || a->sizes.size() != b->sizes.size() ||
      a->elems.size() != b->elems.size())
    return false;
  for (std::size_t i = 0; i < a->sizes.size(); ++i)
    if (!opt_expr_equal(a->sizes[i], b->sizes[i])) return false;
  for (std::size_t i = 0; i < a->elems.size(); ++i)
    if (!syn_equal(a->elems[i], b->elems[i])) return false;
  return true;
}

bool dist_equal(const DistPtr& a, const DistPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->elems.size() != b->elems.size()) return false;
  if (!syn_equal(a->type_syn, b->type_syn) || !opt_expr_equal(a->bias, b->bias)) return false;
  for (std::size_t i = 0; i < a->elems.size(); ++i)
    if (!expr_equal(*a->elems[i], *b->elems[i])) return false;
  return true;
}

}  // namespace

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::Lit:
      if (!(a.lit == b.lit)) return false;
      break;
    case ExprKind::Var:
      if (a.name != b.name || a.tag != b.tag) return false;
      break;
    case ExprKind::Unary:
    case ExprKind::Binary:
      if (a.op != b.op) return false;
      break;
    case ExprKind::Proj:
      if (a.index != b.index) return false;
      break;
    case ExprKind::Call:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Builtin:
      if (a.builtin != b.builtin) return false;
      break;
    case ExprKind::Binder:
      if (a.binder != b.binder || a.name != b.name) return false;
      if (a.dom_syn || b.dom_syn) {
        if (!syn_equal(a.dom_syn, b.dom_syn)) return false;
      } else if (a.dom && b.dom && !type_equal(*a.dom, *b.dom)) {
        return false;
      }
      break;
    case ExprKind::Coerce:
      if (a.dom && b.dom && !type_equal(*a.dom, *b.dom)) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!expr_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

bool stmt_equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.var == b.var && opt_expr_equal(a.index, b.index) &&
         opt_expr_equal(a.expr, b.expr) && opt_expr_equal(a.expr2, b.expr2) && dist_equal(a.dist, b.dist) &&
         block_equal(a.body, b.body) && block_equal(a.els, b.els);
}

bool block_equal(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!stmt_equal(*a[i], *b[i])) return false;
  return true;
}

bool program_equal(const Program& a, const Program& b) {
  if (a.name != b.name || a.params.size() != b.params.size() || a.vars.size() != b.vars.size() ||
      a.funs.size() != b.funs.size())
    return false;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].name != b.params[i].name || !syn_equal(a.params[i].type, b.params[i].type) ||
        !opt_expr_equal(a.params[i].value, b.params[i].value))
      return false;
  for (std::size_t i = 0; i < a.vars.size(); ++i)
    if (a.vars[i].name != b.vars[i].name || !syn_equal(a.vars[i].type, b.vars[i].type) ||
        !opt_expr_equal(a.vars[i].init, b.vars[i].init))
      return false;
  for (std::size_t i = 0; i < a.funs.size(); ++i) {
    const auto& f = a.funs[i];
    const auto& g = b.funs[i];
    if (f.name != g.name || f.params.size() != g.params.size() || !syn_equal(f.ret, g.ret) ||
        !opt_expr_equal(f.body, g.body))
      return false;
    for (std::size_t k = 0; k < f.params.size(); ++k)
      if (f.params[k].first != g.params[k].first || !syn_equal(f.params[k].second, g.params[k].second))
        return false;
  }
  return block_equal(a.body, b.body);
}

}  // namespace couplecheck
