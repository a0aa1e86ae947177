#include "couplecheck/eval.hpp"

#include "couplecheck/typecheck.hpp"

namespace couplecheck {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  if (b == 0) throw EvalError("division by zero");
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  if (b == 0) throw EvalError("modulo by zero");
  std::int64_t r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

namespace {

std::int64_t modulus_of(const Expr& e) {
  return e.type && e.type->kind == TypeKind::ZMod ? e.type->n : 0;
}

std::int64_t ipow(std::int64_t b, std::int64_t x, std::int64_t mod) {
  if (x < 0) throw EvalError("negative exponent");
  std::int64_t r = 1;
  if (mod) b = floor_mod(b, mod);
  while (x) {
    if (x & 1) r = mod ? static_cast<std::int64_t>((__int128)r * b % mod) : r * b;
    b = mod ? static_cast<std::int64_t>((__int128)b * b % mod) : b * b;
    x >>= 1;
  }
  return r;
}

int cmp_values(const Expr& a, const Expr& b, const Value& x, const Value& y) {
  std::int64_t m = modulus_of(a) ? modulus_of(a) : modulus_of(b);
  if (m && x.is_int() && y.is_int()) {
    auto p = floor_mod(x.as_int(), m), q = floor_mod(y.as_int(), m);
    return p < q ? -1 : p > q ? 1 : 0;
  }
  auto c = x <=> y;
  return c < 0 ? -1 : c > 0 ? 1 : 0;
}

std::size_t checked_index(const Value& list, const Value& idx) {
  auto i = idx.as_int();
  if (i < 0 || static_cast<std::size_t>(i) >= list.elems().size())
    throw EvalError("index " + std::to_string(i) + " out of range for " + list.to_string());
  return static_cast<std::size_t>(i);
}

}  // namespace

Value eval(const Expr& e, EvalEnv& env) {
  switch (e.kind) {
    case ExprKind::Lit:
      return e.lit;
    case ExprKind::Var:
      if (e.ref == RefKind::State) {
        const State* s = env.st[e.tag];
        if (!s) throw EvalError("no state for " + e.name);
        return s->vals[static_cast<std::size_t>(e.slot)];
      }
      if (e.ref == RefKind::Bound) {
        for (auto it = env.bound.rbegin(); it != env.bound.rend(); ++it)
          if (*it->first == e.name) return it->second;
      }
      throw EvalError("unbound name " + e.name);
    case ExprKind::Unary: {
      Value a = eval(*e.args[0], env);
      if (e.op == Op::Not) return Value::boolean(!a.as_bool());
      std::int64_t m = modulus_of(e);
      return Value::integer(m ? floor_mod(-a.as_int(), m) : -a.as_int());
    }
    case ExprKind::Binary: {
      // short-circuit connectives so guards like i < len(l) && l[i] = 0 work
      switch (e.op) {
        case Op::And:
          return Value::boolean(eval_bool(*e.args[0], env) && eval_bool(*e.args[1], env));
        case Op::Or:
          return Value::boolean(eval_bool(*e.args[0], env) || eval_bool(*e.args[1], env));
        case Op::Implies:
          return Value::boolean(!eval_bool(*e.args[0], env) || eval_bool(*e.args[1], env));
        default:
          break;
      }
      Value a = eval(*e.args[0], env);
      Value b = eval(*e.args[1], env);
      std::int64_t m = modulus_of(e);
      auto wrap = [m](std::int64_t v) { return Value::integer(m ? floor_mod(v, m) : v); };
      switch (e.op) {
        case Op::Add: return wrap(a.as_int() + b.as_int());
        case Op::Sub: return wrap(a.as_int() - b.as_int());
        case Op::Mul:
          return m ? Value::integer(static_cast<std::int64_t>((__int128)floor_mod(a.as_int(), m) * floor_mod(b.as_int(), m) % m))
                   : Value::integer(a.as_int() * b.as_int());
        case Op::Div: return wrap(floor_div(a.as_int(), b.as_int()));
        case Op::Mod: return wrap(floor_mod(a.as_int(), b.as_int()));
        case Op::Pow: return Value::integer(ipow(a.as_int(), b.as_int(), m));
        case Op::Xor: return Value::boolean(a.as_bool() != b.as_bool());
        case Op::Iff: return Value::boolean(a.as_bool() == b.as_bool());
        case Op::Eq: return Value::boolean(cmp_values(*e.args[0], *e.args[1], a, b) == 0);
        case Op::Ne: return Value::boolean(cmp_values(*e.args[0], *e.args[1], a, b) != 0);
        case Op::Lt: return Value::boolean(cmp_values(*e.args[0], *e.args[1], a, b) < 0);
        case Op::Le: return Value::boolean(cmp_values(*e.args[0], *e.args[1], a, b) <= 0);
        case Op::Gt: return Value::boolean(cmp_values(*e.args[0], *e.args[1], a, b) > 0);
        case Op::Ge: return Value::boolean(cmp_values(*e.args[0], *e.args[1], a, b) >= 0);
        case Op::Cons: {
          bool snoc = e.args[0]->type && (e.args[0]->type->kind == TypeKind::List || e.args[0]->type->kind == TypeKind::Array);
          if (snoc) {
            auto v = a.elems();
            v.push_back(b);
            return Value::list(std::move(v));
          }
          std::vector<Value> v{a};
          v.insert(v.end(), b.elems().begin(), b.elems().end());
          return Value::list(std::move(v));
        }
        case Op::Append: {
          auto v = a.elems();
          v.insert(v.end(), b.elems().begin(), b.elems().end());
          return Value::list(std::move(v));
        }
        default:
          break;
      }
      throw EvalError("bad binary operator");
    }
    case ExprKind::Cond:
      return eval_bool(*e.args[0], env) ? eval(*e.args[1], env) : eval(*e.args[2], env);
    case ExprKind::TupleLit:
    case ExprKind::ListLit: {
      std::vector<Value> v;
      v.reserve(e.args.size());
      for (const auto& a : e.args) v.push_back(eval(*a, env));
      return e.kind == ExprKind::TupleLit ? Value::tuple(std::move(v)) : Value::list(std::move(v));
    }
    case ExprKind::Index: {
      Value a = eval(*e.args[0], env);
      Value i = eval(*e.args[1], env);
      return a.elems()[checked_index(a, i)];
    }
    case ExprKind::Proj: {
      Value a = eval(*e.args[0], env);
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= a.elems().size()) throw EvalError("bad projection");
      return a.elems()[static_cast<std::size_t>(e.index)];
    }
    case ExprKind::Call: {
      if (!e.fun) throw EvalError("unknown function " + e.name);
      std::vector<std::pair<const std::string*, Value>> frame;
      for (std::size_t i = 0; i < e.args.size(); ++i) frame.emplace_back(&e.fun->params[i].first, eval(*e.args[i], env));
      std::swap(frame, env.bound);
      try {
        Value r = eval(*e.fun->body, env);
        std::swap(frame, env.bound);
        auto c = coerce(*e.fun->ret, r);
        if (!c) throw EvalError(e.name + " returned " + r.to_string() + " outside " + type_to_string(*e.fun->ret));
        return *c;
      } catch (...) {
        std::swap(frame, env.bound);
        throw;
      }
    }
    case ExprKind::Builtin:
      switch (e.builtin) {
        case BuiltinFn::Len:
          return Value::integer(static_cast<std::int64_t>(eval(*e.args[0], env).elems().size()));
        case BuiltinFn::Upd: {
          Value a = eval(*e.args[0], env);
          Value i = eval(*e.args[1], env);
          auto idx = checked_index(a, i);
          auto v = a.elems();
          v[idx] = eval(*e.args[2], env);
          return Value::list(std::move(v));
        }
        case BuiltinFn::Fill: {
          auto n = eval(*e.args[0], env).as_int();
          if (n < 0) throw EvalError("negative fill length");
          return Value::list(std::vector<Value>(static_cast<std::size_t>(n), eval(*e.args[1], env)));
        }
      }
      break;
    case ExprKind::Binder: {
      if (e.binder == BinderKind::Tabulate) {
        auto n = eval(*e.args[1], env).as_int();
        std::vector<Value> out;
        env.bound.emplace_back(&e.name, Value());
        try {
          for (std::int64_t j = 0; j < n; ++j) {
            env.bound.back().second = Value::integer(j);
            out.push_back(eval(*e.args[0], env));
          }
        } catch (...) {
          env.bound.pop_back();
          throw;
        }
        env.bound.pop_back();
        return Value::list(std::move(out));
      }
      std::vector<Value> fresh;
      if (!e.dom_values) fresh = enumerate_type(*e.dom);
      const auto& dom = e.dom_values ? *e.dom_values : fresh;
      env.bound.emplace_back(&e.name, Value());
      std::size_t slot = env.bound.size() - 1;
      auto finish = [&](Value v) {
        env.bound.pop_back();
        return v;
      };
      try {
        switch (e.binder) {
          case BinderKind::Forall:
            for (const auto& v : dom) {
              env.bound[slot].second = v;
              if (!eval_bool(*e.args[0], env)) return finish(Value::boolean(false));
            }
            return finish(Value::boolean(true));
          case BinderKind::Exists:
            for (const auto& v : dom) {
              env.bound[slot].second = v;
              if (eval_bool(*e.args[0], env)) return finish(Value::boolean(true));
            }
            return finish(Value::boolean(false));
          case BinderKind::Sum: {
            std::int64_t s = 0;
            for (const auto& v : dom) {
              env.bound[slot].second = v;
              s += eval(*e.args[0], env).as_int();
            }
            return finish(Value::integer(s));
          }
          case BinderKind::XorAll: {
            bool s = false;
            for (const auto& v : dom) {
              env.bound[slot].second = v;
              s = s != eval_bool(*e.args[0], env);
            }
            return finish(Value::boolean(s));
          }
          case BinderKind::Tabulate:
            break;
        }
      } catch (...) {
        env.bound.pop_back();
        throw;
      }
      break;
    }
    case ExprKind::Coerce: {
      Value v = eval(*e.args[0], env);
      auto c = coerce(*e.dom, v);
      if (!c) throw EvalError("value " + v.to_string() + " does not fit " + type_to_string(*e.dom));
      return *c;
    }
  }
  throw EvalError("cannot evaluate expression");
}

bool eval_bool(const Expr& e, EvalEnv& env) { return eval(e, env).as_bool(); }

Value eval_closed(const Expr& e) {
  EvalEnv env;
  return eval(e, env);
}

}  // namespace couplecheck
