#include "couplecheck/typecheck.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "couplecheck/eval.hpp"
#include "couplecheck/parser.hpp"

namespace couplecheck {

namespace {

std::string where(Loc l) {
  if (l.line == 0) return "";
  return std::to_string(l.line) + ":" + std::to_string(l.col) + ": ";
}

[[noreturn]] void fail(Loc l, const std::string& msg) { throw TypeError({where(l) + msg}); }

std::shared_ptr<Expr> copy(const Expr& e) { return std::make_shared<Expr>(e); }

bool is_seq_type(const Type& t) { return t.kind == TypeKind::List || t.kind == TypeKind::Array; }

bool has_zmod(const Type& t) {
  if (t.kind == TypeKind::ZMod) return true;
  for (const auto& e : t.elems)
    if (has_zmod(*e)) return true;
  return false;
}

TypePtr join_numeric(const TypePtr& a, const TypePtr& b, Loc at) {
  if (a->kind == TypeKind::ZMod && b->kind == TypeKind::ZMod && a->n != b->n)
    fail(at, "mixing " + type_to_string(*a) + " and " + type_to_string(*b));
  if (a->kind == TypeKind::ZMod) return a;
  if (b->kind == TypeKind::ZMod) return b;
  return t_integer();
}

bool seq_assignable(const Type& to, const Type& from) {
  if (is_seq_type(to) && from.kind == TypeKind::List && from.n == 0) return true;
  return assignable(to, from);
}

std::int64_t const_int(const ExprPtr& e, Scope& scope, const char* what) {
  auto c = fold(check_expr(e, scope));
  if (c->kind != ExprKind::Lit || !c->lit.is_int()) fail(e->loc, std::string(what) + " must be a constant integer");
  return c->lit.as_int();
}

Rational rat_value(const Expr& e, Scope& scope) {
  switch (e.kind) {
    case ExprKind::Lit:
      if (e.lit.is_int()) return Rational(static_cast<long>(e.lit.as_int()));
      break;
    case ExprKind::Var: {
      if (e.tag == 0) {
        auto it = scope.consts.find(e.name);
        if (it != scope.consts.end()) {
          if (it->second.type->kind == TypeKind::Rat) return it->second.rat;
          if (it->second.value.is_int()) return Rational(static_cast<long>(it->second.value.as_int()));
        }
      }
      break;
    }
    case ExprKind::Unary:
      if (e.op == Op::Neg) return -rat_value(*e.args[0], scope);
      break;
    case ExprKind::Binary: {
      Rational a = rat_value(*e.args[0], scope), b = rat_value(*e.args[1], scope);
      switch (e.op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div:
          if (b == 0) fail(e.loc, "division by zero in rational constant");
          return a / b;
        default: break;
      }
      break;
    }
    default:
      break;
  }
  fail(e.loc, "expected a constant rational, found '" + print_expr(e) + "'");
}

struct FoldInfo {
  ExprPtr e;
  bool has_state = false;
  std::set<std::string> free_bound;
  bool closed() const { return !has_state && free_bound.empty(); }
};

bool is_lit_bool(const ExprPtr& e, bool b) {
  return e->kind == ExprKind::Lit && e->lit.is_bool() && e->lit.as_bool() == b;
}

FoldInfo fold_rec(const ExprPtr& e);

ExprPtr rebuild(const ExprPtr& e, std::vector<ExprPtr> args) {
  bool same = true;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i] != e->args[i]) same = false;
  if (same) return e;
  auto c = copy(*e);
  c->args = std::move(args);
  return c;
}

FoldInfo fold_rec(const ExprPtr& e) {
  FoldInfo out;
  if (e->kind == ExprKind::Lit) {
    out.e = e;
    return out;
  }
  if (e->kind == ExprKind::Var) {
    out.e = e;
    if (e->ref == RefKind::Bound)
      out.free_bound.insert(e->name);
    else
      out.has_state = true;
    return out;
  }
  std::vector<ExprPtr> args;
  for (const auto& a : e->args) {
    auto f = fold_rec(a);
    args.push_back(f.e);
    out.has_state = out.has_state || f.has_state;
    out.free_bound.insert(f.free_bound.begin(), f.free_bound.end());
  }
  if (e->kind == ExprKind::Binder) out.free_bound.erase(e->name);
  ExprPtr r = rebuild(e, args);
  if (out.closed()) {
    try {
      out.e = mk_lit(eval_closed(*r), r->type);
      return out;
    } catch (const EvalError&) {
      // keep the partial operation for run time
    }
  }
  auto again = [&](const ExprPtr& x) { return fold_rec(x); };
  switch (r->kind) {
    case ExprKind::Binary: {
      const auto& a = args[0];
      const auto& b = args[1];
      switch (r->op) {
        case Op::And:
          if (is_lit_bool(a, false) || is_lit_bool(b, false)) return {mk_bool(false)};
          if (is_lit_bool(a, true)) return again(b);
          if (is_lit_bool(b, true)) return again(a);
          break;
        case Op::Or:
          if (is_lit_bool(a, true) || is_lit_bool(b, true)) return {mk_bool(true)};
          if (is_lit_bool(a, false)) return again(b);
          if (is_lit_bool(b, false)) return again(a);
          break;
        case Op::Implies:
          if (is_lit_bool(a, false) || is_lit_bool(b, true)) return {mk_bool(true)};
          if (is_lit_bool(a, true)) return again(b);
          if (is_lit_bool(b, false)) return again(mk_unary(Op::Not, a));
          break;
        case Op::Iff:
          if (is_lit_bool(a, true)) return again(b);
          if (is_lit_bool(b, true)) return again(a);
          break;
        default:
          break;
      }
      break;
    }
    case ExprKind::Unary:
      if (r->op == Op::Not && args[0]->kind == ExprKind::Unary && args[0]->op == Op::Not)
        return again(args[0]->args[0]);
      break;
    case ExprKind::Cond:
      if (args[0]->kind == ExprKind::Lit) return again(coerce_to(args[0]->lit.as_bool() ? args[1] : args[2], r->type));
      break;
    case ExprKind::Index: {
      const auto& a = args[0];
      const auto& j = args[1];
      if (a->kind == ExprKind::Builtin && a->builtin == BuiltinFn::Upd && a->args[1]->kind == ExprKind::Lit &&
          j->kind == ExprKind::Lit) {
        if (a->args[1]->lit == j->lit) return again(coerce_to(a->args[2], r->type));
        auto c = copy(*r);
        c->args = {a->args[0], j};
        return again(c);
      }
      break;
    }
    case ExprKind::Builtin:
      if (r->builtin == BuiltinFn::Len && args[0]->kind == ExprKind::Builtin && args[0]->builtin == BuiltinFn::Upd) {
        auto c = copy(*r);
        c->args = {args[0]->args[0]};
        return again(c);
      }
      break;
    case ExprKind::Coerce:
      if (args[0]->type && type_equal(*args[0]->type, *r->dom)) return again(args[0]);
      break;
    default:
      break;
  }
  out.e = r;
  return out;
}

ExprPtr chk(const ExprPtr& ep, Scope& sc);

ExprPtr chk_bool(const ExprPtr& e, Scope& sc) {
  auto r = chk(e, sc);
  if (r->type->kind != TypeKind::Bool) fail(e->loc, "expected bool, found " + type_to_string(*r->type));
  return r;
}

ExprPtr chk_numeric(const ExprPtr& e, Scope& sc) {
  auto r = chk(e, sc);
  if (!is_numeric(*r->type)) fail(e->loc, "expected a number, found " + type_to_string(*r->type));
  return r;
}

// Makes the two operands of a comparison agree on residues.
void unify_compare(ExprPtr& a, ExprPtr& b, Loc at) {
  const auto& ta = *a->type;
  const auto& tb = *b->type;
  if (is_numeric(ta) && is_numeric(tb)) {
    join_numeric(a->type, b->type, at);
    return;
  }
  if (type_equal(ta, tb)) return;
  if (has_zmod(ta) && seq_assignable(ta, tb)) {
    b = coerce_to(b, a->type);
    return;
  }
  if (has_zmod(tb) && seq_assignable(tb, ta)) {
    a = coerce_to(a, b->type);
    return;
  }
  if (seq_assignable(ta, tb) || seq_assignable(tb, ta)) return;
  fail(at, "cannot compare " + type_to_string(ta) + " with " + type_to_string(tb));
}

ExprPtr chk(const ExprPtr& ep, Scope& sc) {
  const Expr& e = *ep;
  auto r = copy(e);
  switch (e.kind) {
    case ExprKind::Lit:
      if (!r->type) r->type = e.lit.is_bool() ? t_bool() : t_integer();
      return r;
    case ExprKind::Var: {
      if (e.tag != 0) {
        const Layout* lay = sc.side[e.tag];
        int slot = lay ? lay->find(e.name) : -1;
        if (slot < 0) fail(e.loc, "unknown variable " + e.name + "{" + std::to_string(e.tag) + "}");
        r->ref = RefKind::State;
        r->slot = slot;
        r->type = lay->vars[static_cast<std::size_t>(slot)].type;
        return r;
      }
      for (auto it = sc.bound.rbegin(); it != sc.bound.rend(); ++it) {
        if (it->first == e.name) {
          r->ref = RefKind::Bound;
          r->type = it->second;
          return r;
        }
      }
      if (sc.side[0]) {
        int slot = sc.side[0]->find(e.name);
        if (slot >= 0) {
          r->ref = RefKind::State;
          r->slot = slot;
          r->type = sc.side[0]->vars[static_cast<std::size_t>(slot)].type;
          return r;
        }
      }
      if (auto it = sc.consts.find(e.name); it != sc.consts.end()) {
        if (it->second.type->kind == TypeKind::Rat)
          fail(e.loc, "rational parameter " + e.name + " may only be used as a Bernoulli bias");
        auto l = copy(*mk_lit(it->second.value, it->second.type));
        l->loc = e.loc;
        return l;
      }
      if (auto it = sc.labels.find(e.name); it != sc.labels.end()) {
        auto l = copy(*mk_lit(Value::integer(it->second.index), it->second.type));
        l->loc = e.loc;
        return l;
      }
      if (sc.side[1] && (sc.side[1]->find(e.name) >= 0 || (sc.side[2] && sc.side[2]->find(e.name) >= 0)))
        fail(e.loc, "program variable " + e.name + " needs a side tag {1} or {2}");
      fail(e.loc, "unbound variable " + e.name);
    }
    case ExprKind::Unary:
      if (e.op == Op::Not) {
        r->args = {chk_bool(e.args[0], sc)};
        r->type = t_bool();
      } else {
        r->args = {chk_numeric(e.args[0], sc)};
        r->type = r->args[0]->type->kind == TypeKind::ZMod ? r->args[0]->type : t_integer();
      }
      return r;
    case ExprKind::Binary: {
      switch (e.op) {
        case Op::And: case Op::Or: case Op::Xor: case Op::Implies: case Op::Iff:
          r->args = {chk_bool(e.args[0], sc), chk_bool(e.args[1], sc)};
          r->type = t_bool();
          return r;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Mod: {
          r->args = {chk_numeric(e.args[0], sc), chk_numeric(e.args[1], sc)};
          r->type = join_numeric(r->args[0]->type, r->args[1]->type, e.loc);
          if (r->type->kind == TypeKind::ZMod && (e.op == Op::Div || e.op == Op::Mod))
            fail(e.loc, "division is not defined on " + type_to_string(*r->type));
          return r;
        }
        case Op::Pow:
          r->args = {chk_numeric(e.args[0], sc), chk_numeric(e.args[1], sc)};
          r->type = r->args[0]->type->kind == TypeKind::ZMod ? r->args[0]->type : t_integer();
          return r;
        case Op::Eq: case Op::Ne: {
          auto a = chk(e.args[0], sc), b = chk(e.args[1], sc);
          unify_compare(a, b, e.loc);
          r->args = {a, b};
          r->type = t_bool();
          return r;
        }
        case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: {
          r->args = {chk_numeric(e.args[0], sc), chk_numeric(e.args[1], sc)};
          join_numeric(r->args[0]->type, r->args[1]->type, e.loc);
          r->type = t_bool();
          return r;
        }
        case Op::Cons: {
          auto a = chk(e.args[0], sc), b = chk(e.args[1], sc);
          if (is_seq_type(*a->type)) {
            const auto& el = a->type->elems[0];
            if (!(a->type->n == 0 && a->type->kind == TypeKind::List) && !assignable(*el, *b->type))
              fail(e.loc, "cannot append " + type_to_string(*b->type) + " to " + type_to_string(*a->type));
            r->type = a->type->n == 0 ? t_list(1, b->type) : t_list(a->type->n + 1, el);
          } else if (is_seq_type(*b->type)) {
            const auto& el = b->type->elems[0];
            if (!(b->type->n == 0) && !assignable(*el, *a->type))
              fail(e.loc, "cannot prepend " + type_to_string(*a->type) + " to " + type_to_string(*b->type));
            r->type = b->type->n == 0 ? t_list(1, a->type) : t_list(b->type->n + 1, el);
          } else {
            fail(e.loc, "'::' needs a list operand");
          }
          r->args = {a, b};
          return r;
        }
        case Op::Append: {
          auto a = chk(e.args[0], sc), b = chk(e.args[1], sc);
          if (!is_seq_type(*a->type) || !is_seq_type(*b->type)) fail(e.loc, "'++' needs list operands");
          if (!seq_assignable(*a->type, *b->type) && !seq_assignable(*b->type, *a->type))
            fail(e.loc, "cannot concatenate " + type_to_string(*a->type) + " and " + type_to_string(*b->type));
          const auto& el = a->type->n == 0 ? b->type->elems[0] : a->type->elems[0];
          r->type = t_list(a->type->n + b->type->n, el);
          r->args = {a, b};
          return r;
        }
        default:
          break;
      }
      fail(e.loc, "bad operator");
    }
    case ExprKind::Cond: {
      auto c = chk_bool(e.args[0], sc);
      auto a = chk(e.args[1], sc), b = chk(e.args[2], sc);
      const auto& ta = a->type;
      const auto& tb = b->type;
      if (is_numeric(*ta) && is_numeric(*tb)) {
        r->type = join_numeric(ta, tb, e.loc);
        if (r->type->kind == TypeKind::ZMod) {
          a = coerce_to(a, r->type);
          b = coerce_to(b, r->type);
        } else if (type_equal(*ta, *tb)) {
          r->type = ta;
        }
      } else if (type_equal(*ta, *tb) || seq_assignable(*ta, *tb)) {
        r->type = ta;
      } else if (seq_assignable(*tb, *ta)) {
        r->type = tb;
      } else {
        fail(e.loc, "branches have types " + type_to_string(*ta) + " and " + type_to_string(*tb));
      }
      r->args = {c, a, b};
      return r;
    }
    case ExprKind::TupleLit: {
      std::vector<TypePtr> ts;
      r->args.clear();
      for (const auto& a : e.args) {
        r->args.push_back(chk(a, sc));
        ts.push_back(r->args.back()->type);
      }
      r->type = t_tuple(std::move(ts));
      return r;
    }
    case ExprKind::ListLit: {
      r->args.clear();
      TypePtr el;
      for (const auto& a : e.args) {
        auto c = chk(a, sc);
        if (!el) {
          el = c->type;
        } else if (is_numeric(*el) && is_numeric(*c->type)) {
          if (!type_equal(*el, *c->type)) el = join_numeric(el, c->type, a->loc);
        } else if (!assignable(*el, *c->type)) {
          fail(a->loc, "list elements of different types");
        }
        r->args.push_back(c);
      }
      r->type = t_list(static_cast<std::int64_t>(e.args.size()), el ? el : t_bool());
      return r;
    }
    case ExprKind::Index: {
      auto a = chk(e.args[0], sc);
      if (!is_seq_type(*a->type)) fail(e.loc, "indexing a non-list of type " + type_to_string(*a->type));
      r->args = {a, chk_numeric(e.args[1], sc)};
      r->type = a->type->elems[0];
      return r;
    }
    case ExprKind::Proj: {
      auto a = chk(e.args[0], sc);
      if (a->type->kind != TypeKind::Tuple) fail(e.loc, "projection from non-tuple " + type_to_string(*a->type));
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= a->type->elems.size())
        fail(e.loc, "projection index out of range");
      r->args = {a};
      r->type = a->type->elems[static_cast<std::size_t>(e.index)];
      return r;
    }
    case ExprKind::Call: {
      auto it = sc.funs.find(e.name);
      if (it == sc.funs.end()) fail(e.loc, "unknown function " + e.name);
      const auto& f = it->second;
      if (f->params.size() != e.args.size())
        fail(e.loc, e.name + " expects " + std::to_string(f->params.size()) + " arguments");
      r->args.clear();
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        auto a = chk(e.args[i], sc);
        if (!seq_assignable(*f->params[i].second, *a->type))
          fail(e.args[i]->loc, "argument " + std::to_string(i + 1) + " of " + e.name + ": expected " +
                                   type_to_string(*f->params[i].second) + ", found " + type_to_string(*a->type));
        r->args.push_back(coerce_to(a, f->params[i].second));
      }
      r->fun = f;
      r->type = f->ret;
      return r;
    }
    case ExprKind::Builtin: {
      r->args.clear();
      switch (e.builtin) {
        case BuiltinFn::Len: {
          if (e.args.size() != 1) fail(e.loc, "len expects 1 argument");
          auto a = chk(e.args[0], sc);
          if (!is_seq_type(*a->type)) fail(e.loc, "len of non-list");
          r->args = {a};
          r->type = t_integer();
          return r;
        }
        case BuiltinFn::Upd: {
          if (e.args.size() != 3) fail(e.loc, "upd expects 3 arguments");
          auto a = chk(e.args[0], sc);
          if (!is_seq_type(*a->type)) fail(e.loc, "upd of non-list");
          auto i = chk_numeric(e.args[1], sc);
          auto v = chk(e.args[2], sc);
          if (!seq_assignable(*a->type->elems[0], *v->type)) fail(e.loc, "upd with a value of the wrong type");
          r->args = {a, i, coerce_to(v, a->type->elems[0])};
          r->type = a->type;
          return r;
        }
        case BuiltinFn::Fill: {
          if (e.args.size() != 2) fail(e.loc, "fill expects 2 arguments");
          auto n = const_int(e.args[0], sc, "fill length");
          if (n < 0) fail(e.loc, "negative fill length");
          auto v = chk(e.args[1], sc);
          r->args = {mk_int(n), v};
          r->type = t_array(n, v->type);
          return r;
        }
      }
      break;
    }
    case ExprKind::Binder: {
      if (e.binder == BinderKind::Tabulate) {
        auto bound = fold(chk_numeric(e.args[1], sc));
        std::int64_t cap;
        if (bound->kind == ExprKind::Lit)
          cap = bound->lit.as_int();
        else if (bound->kind == ExprKind::Builtin && bound->builtin == BuiltinFn::Len)
          cap = bound->args[0]->type->n;
        else
          fail(e.loc, "comprehension bound must be a constant or len(...)");
        sc.bound.emplace_back(e.name, t_integer());
        ExprPtr body;
        try {
          body = chk(e.args[0], sc);
        } catch (...) {
          sc.bound.pop_back();
          throw;
        }
        sc.bound.pop_back();
        r->dom = t_integer();
        r->args = {body, bound};
        r->type = t_list(std::max<std::int64_t>(cap, 0), body->type);
        return r;
      }
      TypePtr dom = e.dom ? e.dom : resolve_type(*e.dom_syn, sc);
      if (!is_finite(*dom)) fail(e.loc, "quantifier over infinite type");
      r->dom = dom;
      try {
        r->dom_values = std::make_shared<const std::vector<Value>>(enumerate_type(*dom, 1'000'000));
      } catch (const std::length_error&) {
        fail(e.loc, "quantifier domain " + type_to_string(*dom) + " too large");
      }
      sc.bound.emplace_back(e.name, dom);
      ExprPtr body;
      try {
        body = chk(e.args[0], sc);
      } catch (...) {
        sc.bound.pop_back();
        throw;
      }
      sc.bound.pop_back();
      if (e.binder == BinderKind::Sum) {
        if (!is_numeric(*body->type)) fail(e.loc, "bigsum body must be numeric");
        r->type = t_integer();
      } else {
        if (body->type->kind != TypeKind::Bool) fail(e.loc, "quantifier body must be bool");
        r->type = t_bool();
      }
      r->args = {body};
      return r;
    }
    case ExprKind::Coerce:
      r->args = {chk(e.args[0], sc)};
      r->type = e.dom;
      return r;
  }
  fail(e.loc, "unsupported expression");
}

DistPtr check_dist(const DistExpr& d, const TypePtr& target, Scope& sc) {
  auto r = std::make_shared<DistExpr>(d);
  r->type = target;
  r->support.clear();
  switch (d.kind) {
    case DistKind::UniformType: {
      auto t = resolve_type(*d.type_syn, sc);
      if (!is_finite(*t)) fail(d.loc, "uniform over infinite type");
      if (!assignable(*target, *t))
        fail(d.loc, "cannot sample " + type_to_string(*t) + " into " + type_to_string(*target));
      for (const auto& v : enumerate_type(*t, 10'000'000)) {
        auto c = coerce(*target, v);
        if (!c) fail(d.loc, "value " + format_value(v, *t) + " does not fit " + type_to_string(*target));
        r->support.push_back(*c);
      }
      break;
    }
    case DistKind::UniformSet: {
      std::set<Value> seen;
      for (const auto& el : d.elems) {
        auto c = fold(chk(el, sc));
        if (c->kind != ExprKind::Lit) fail(el->loc, "uniform set elements must be constants");
        if (!seq_assignable(*target, *c->type))
          fail(el->loc, "element of type " + type_to_string(*c->type) + " does not fit " + type_to_string(*target));
        auto v = coerce(*target, c->lit);
        if (!v) fail(el->loc, "element " + c->lit.to_string() + " does not fit " + type_to_string(*target));
        if (!seen.insert(*v).second) fail(el->loc, "duplicate element " + format_value(*v, *target) + " in uniform set");
        r->support.push_back(*v);
      }
      break;
    }
    case DistKind::Bernoulli: {
      if (target->kind != TypeKind::Bool) fail(d.loc, "flip samples a bool, target has type " + type_to_string(*target));
      r->p = rat_value(*d.bias, sc);
      if (r->p <= 0 || r->p >= 1) fail(d.loc, "Bernoulli parameter " + to_string(r->p) + " outside (0,1)");
      r->support = {Value::boolean(false), Value::boolean(true)};
      break;
    }
  }
  return r;
}

StmtPtr check_stmt(const Stmt& s, Scope& sc, int& next_group);

Block check_stmts(const Block& b, Scope& sc, int& next_group, std::vector<std::string>* errs) {
  Block out;
  for (const auto& s : b) {
    if (!errs) {
      out.push_back(check_stmt(*s, sc, next_group));
      continue;
    }
    try {
      out.push_back(check_stmt(*s, sc, next_group));
    } catch (const TypeError& e) {
      errs->insert(errs->end(), e.messages.begin(), e.messages.end());
    }
  }
  return out;
}

TypePtr target_type(const Stmt& s, Scope& sc, int& slot, ExprPtr& index) {
  slot = sc.side[0]->find(s.var);
  if (slot < 0) fail(s.loc, "assignment to undeclared variable " + s.var);
  TypePtr t = sc.side[0]->vars[static_cast<std::size_t>(slot)].type;
  if (s.index) {
    if (!is_seq_type(*t)) fail(s.loc, s.var + " is not a list");
    index = chk_numeric(s.index, sc);
    index = fold(index);
    return t->elems[0];
  }
  return t;
}

StmtPtr check_stmt(const Stmt& s, Scope& sc, int& next_group) {
  auto r = std::make_shared<Stmt>(s);
  switch (s.kind) {
    case StmtKind::Skip:
    case StmtKind::Abort:
      return r;
    case StmtKind::Assign: {
      ExprPtr idx;
      auto t = target_type(s, sc, r->slot, idx);
      r->index = idx;
      auto e = chk(s.expr, sc);
      if (!seq_assignable(*t, *e->type))
        fail(s.loc, "type mismatch: cannot assign " + type_to_string(*e->type) + " to " + s.var +
                        (s.index ? "[...]" : "") + " : " + type_to_string(*t));
      // the coercion checks the target carrier at run time
      r->expr = fold(coerce_to(e, t));
      return r;
    }
    case StmtKind::Sample: {
      ExprPtr idx;
      auto t = target_type(s, sc, r->slot, idx);
      r->index = idx;
      r->dist = check_dist(*s.dist, t, sc);
      return r;
    }
    case StmtKind::If:
      r->expr = fold(chk_bool(s.expr, sc));
      r->body = check_stmts(s.body, sc, next_group, nullptr);
      r->els = check_stmts(s.els, sc, next_group, nullptr);
      return r;
    case StmtKind::While:
      r->expr = fold(chk_bool(s.expr, sc));
      if (r->group < 0) r->group = next_group++;
      r->body = check_stmts(s.body, sc, next_group, nullptr);
      return r;
    case StmtKind::For: {
      int slot = sc.side[0]->find(s.var);
      if (slot < 0) fail(s.loc, "undeclared loop counter " + s.var);
      if (!is_numeric(*sc.side[0]->vars[static_cast<std::size_t>(slot)].type))
        fail(s.loc, "loop counter " + s.var + " must be numeric");
      r->slot = slot;
      r->expr = fold(chk_numeric(s.expr, sc));
      r->expr2 = fold(chk_numeric(s.expr2, sc));
      r->body = check_stmts(s.body, sc, next_group, nullptr);
      return r;
    }
  }
  return r;
}

void add_label_types(const TypePtr& t, Scope& sc, Loc at) {
  if (t->kind == TypeKind::Enum) {
    for (std::size_t i = 0; i < t->labels.size(); ++i) {
      auto it = sc.labels.find(t->labels[i]);
      if (it != sc.labels.end() && !type_equal(*it->second.type, *t))
        fail(at, "label " + t->labels[i] + " belongs to two different enums");
      sc.labels[t->labels[i]] = {t, static_cast<std::int64_t>(i)};
    }
  }
  for (const auto& e : t->elems) add_label_types(e, sc, at);
}

}  // namespace

ExprPtr coerce_to(const ExprPtr& e, const TypePtr& t) {
  if (e->type && type_equal(*e->type, *t)) return e;
  if (e->kind == ExprKind::Lit) {
    if (auto c = coerce(*t, e->lit)) return mk_lit(*c, t);
  }
  auto c = std::make_shared<Expr>();
  c->kind = ExprKind::Coerce;
  c->loc = e->loc;
  c->dom = t;
  c->type = t;
  c->args = {e};
  return c;
}

ExprPtr fold(const ExprPtr& e) { return fold_rec(e).e; }

bool is_closed(const Expr& e) {
  auto p = std::make_shared<Expr>(e);
  return fold_rec(p).closed();
}

ExprPtr check_expr(const ExprPtr& e, Scope& scope) { return fold(chk(e, scope)); }

ExprPtr check_bool(const ExprPtr& e, Scope& scope) { return fold(chk_bool(e, scope)); }

TypePtr resolve_type(const TypeSyn& t, Scope& sc) {
  auto size = [&](std::size_t i, const char* what) {
    Scope consts_only;
    consts_only.consts = sc.consts;
    consts_only.funs = sc.funs;
    return const_int(t.sizes[i], consts_only, what);
  };
  TypePtr out;
  switch (t.kind) {
    case TypeKind::Bool: out = t_bool(); break;
    case TypeKind::Integer: out = t_integer(); break;
    case TypeKind::Rat: out = t_rat(); break;
    case TypeKind::Range: {
      auto n = size(0, "range size");
      if (n < 1) fail(t.sizes[0]->loc, "range size must be positive");
      out = t_range(n);
      break;
    }
    case TypeKind::ZMod: {
      auto n = size(0, "modulus");
      if (n < 2) fail(t.sizes[0]->loc, "modulus must be at least 2");
      out = t_zmod(n);
      break;
    }
    case TypeKind::Int: {
      auto lo = size(0, "lower bound"), hi = size(1, "upper bound");
      if (lo > hi) fail(t.sizes[0]->loc, "empty integer interval");
      out = t_int(lo, hi);
      break;
    }
    case TypeKind::List:
    case TypeKind::Array: {
      auto n = size(0, "length");
      if (n < 0 || (t.kind == TypeKind::List && n < 1)) fail(t.sizes[0]->loc, "bad list length");
      auto el = resolve_type(*t.elems[0], sc);
      out = t.kind == TypeKind::List ? t_list(n, el) : t_array(n, el);
      break;
    }
    case TypeKind::Tuple: {
      std::vector<TypePtr> es;
      for (const auto& e : t.elems) es.push_back(resolve_type(*e, sc));
      out = t_tuple(std::move(es));
      break;
    }
    case TypeKind::Enum:
      out = t_enum(t.labels);
      break;
  }
  add_label_types(out, sc, {});
  return out;
}

void check_funs(const std::vector<FunDecl>& funs, Scope& sc) {
  for (const auto& f : funs) {
    auto def = std::make_shared<FunDef>();
    def->name = f.name;
    for (const auto& [n, t] : f.params) def->params.emplace_back(n, resolve_type(*t, sc));
    def->ret = resolve_type(*f.ret, sc);
    Scope inner = sc;
    inner.side[0] = inner.side[1] = inner.side[2] = nullptr;
    inner.bound = def->params;
    auto body = chk(f.body, inner);
    if (!seq_assignable(*def->ret, *body->type))
      fail(f.loc, "body of " + f.name + " has type " + type_to_string(*body->type) + ", declared " +
                      type_to_string(*def->ret));
    def->body = fold(coerce_to(body, def->ret));
    sc.funs[f.name] = def;
  }
}

Block check_block(const Block& b, Scope& scope, int& next_group) { return check_stmts(b, scope, next_group, nullptr); }

Scope TypedProgram::scope() const {
  Scope sc;
  for (const auto& c : consts) sc.consts[c.name] = c;
  sc.funs = funs;
  sc.labels = labels;
  return sc;
}

TypedProgram typecheck(const Program& p, const Bindings& bindings) {
  TypedProgram tp;
  tp.source = p;
  tp.bindings = bindings;
  tp.name = p.name;
  std::vector<std::string> errs;
  Scope sc;
  auto guard = [&](auto&& fn) {
    try {
      fn();
    } catch (const TypeError& e) {
      errs.insert(errs.end(), e.messages.begin(), e.messages.end());
    } catch (const SyntaxError& e) {
      errs.push_back(e.what());
    }
  };
  for (const auto& d : p.params) {
    guard([&] {
      ConstInfo c;
      c.name = d.name;
      c.type = resolve_type(*d.type, sc);
      ExprPtr val;
      auto it = bindings.find(d.name);
      if (it != bindings.end())
        val = parse_expr(it->second);
      else
        val = d.value;
      if (!val) fail(d.loc, "parameter " + d.name + " is unbound (use --bind " + d.name + "=...)");
      if (c.type->kind == TypeKind::Rat) {
        c.rat = rat_value(*val, sc);
      } else {
        auto v = fold(chk(val, sc));
        if (v->kind != ExprKind::Lit) fail(d.loc, "parameter " + d.name + " needs a constant value");
        if (!seq_assignable(*c.type, *v->type))
          fail(d.loc, "parameter " + d.name + " : " + type_to_string(*c.type) + " given " + type_to_string(*v->type));
        auto cv = coerce(*c.type, v->lit);
        if (!cv) fail(d.loc, "value of parameter " + d.name + " outside " + type_to_string(*c.type));
        c.value = *cv;
      }
      sc.consts[c.name] = c;
      tp.consts.push_back(c);
    });
  }
  if (!errs.empty()) throw TypeError(errs);
  for (const auto& f : p.funs) guard([&] { check_funs({f}, sc); });
  auto layout = std::make_shared<Layout>();
  for (const auto& v : p.vars) {
    guard([&] {
      auto t = resolve_type(*v.type, sc);
      if (!is_finite(*t)) fail(v.loc, "variable " + v.name + " must have a finite type");
      if (sc.consts.count(v.name)) fail(v.loc, "duplicate declaration of '" + v.name + "'");
      auto init = fold(chk(v.init, sc));
      if (init->kind != ExprKind::Lit) fail(v.init->loc, "initializer of " + v.name + " must be constant");
      if (!seq_assignable(*t, *init->type))
        fail(v.init->loc, "type mismatch: initializer of " + v.name + " has type " + type_to_string(*init->type));
      auto c = coerce(*t, init->lit);
      if (!c) fail(v.init->loc, "initializer of " + v.name + " outside " + type_to_string(*t));
      layout->add(v.name, t);
      tp.init.vals.push_back(*c);
    });
  }
  if (!errs.empty()) throw TypeError(errs);
  sc.side[0] = layout.get();
  int groups = 0;
  tp.body = check_stmts(p.body, sc, groups, &errs);
  if (!errs.empty()) throw TypeError(errs);
  tp.layout = layout;
  tp.funs = sc.funs;
  tp.labels = sc.labels;
  tp.num_groups = groups;
  return tp;
}

Block desugar_block(const Block& b) {
  Block out;
  for (const auto& s : b) {
    if (s->kind == StmtKind::For) {
      auto init = std::make_shared<Stmt>();
      init->kind = StmtKind::Assign;
      init->loc = s->loc;
      init->var = s->var;
      init->expr = s->expr;
      auto counter = mk_var(s->var);
      auto step = std::make_shared<Stmt>();
      step->kind = StmtKind::Assign;
      step->loc = s->loc;
      step->var = s->var;
      step->expr = mk_binary(Op::Add, counter, mk_int(1));
      auto loop = std::make_shared<Stmt>();
      loop->kind = StmtKind::While;
      loop->loc = s->loc;
      loop->expr = mk_binary(Op::Le, counter, s->expr2);
      loop->body = desugar_block(s->body);
      loop->body.push_back(step);
      out.push_back(init);
      out.push_back(loop);
      continue;
    }
    if (s->body.empty() && s->els.empty()) {
      out.push_back(s);
      continue;
    }
    auto c = std::make_shared<Stmt>(*s);
    c->body = desugar_block(s->body);
    c->els = desugar_block(s->els);
    out.push_back(c);
  }
  return out;
}

TypedProgram desugar(const TypedProgram& tp) {
  Program p = tp.source;
  p.body = desugar_block(p.body);
  return typecheck(p, tp.bindings);
}

TypedProgram load_program(std::string_view text, const Bindings& bindings) {
  return desugar(typecheck(parse_program(text), bindings));
}

TypedProgram load_program_file(const std::string& path, const Bindings& bindings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str(), bindings);
}

std::string format_state(const State& s, const Layout& layout) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.vals.size() && i < layout.vars.size(); ++i) {
    if (i) out += ", ";
    out += layout.vars[i].name + "=" + format_value(s.vals[i], *layout.vars[i].type);
  }
  return out + "}";
}

}  // namespace couplecheck
