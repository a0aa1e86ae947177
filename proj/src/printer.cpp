#include "couplecheck/parser.hpp"

namespace couplecheck {

namespace {

int prec(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binder:
    case ExprKind::Cond:
      return 0;
    case ExprKind::Binary:
      switch (e.op) {
        case Op::Iff: return 1;
        case Op::Implies: return 2;
        case Op::Or: return 3;
        case Op::Xor: return 4;
        case Op::And: return 5;
        case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return 6;
        case Op::Cons: case Op::Append: return 7;
        case Op::Add: case Op::Sub: return 8;
        case Op::Mul: case Op::Div: case Op::Mod: return 9;
        case Op::Pow: return 10;
        default: return 11;
      }
    case ExprKind::Unary:
      return 11;
    case ExprKind::Lit:
      return e.lit.is_int() && e.lit.as_int() < 0 ? 11 : 13;
    case ExprKind::Coerce:
      return prec(*e.args[0]);
    default:
      return 13;
  }
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Pow: return "^";
    case Op::Neg: return "-";
    case Op::Not: return "!";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Xor: return "xor";
    case Op::Implies: return "=>";
    case Op::Iff: return "<=>";
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Cons: return "::";
    case Op::Append: return "++";
  }
  return "?";
}

bool right_assoc(Op op) { return op == Op::Implies || op == Op::Cons || op == Op::Append || op == Op::Pow; }

std::string lit_text(const Value& v, const TypePtr& t) {
  if (t) {
    if (v.kind() == Value::Kind::Tuple || v.kind() == Value::Kind::List || t->kind == TypeKind::Enum)
      return format_value(v, *t);
  }
  return v.to_string();
}

std::string pr(const Expr& e, int ctx);

std::string args_text(const std::vector<ExprPtr>& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + pr(*args[i], 0);
  return s;
}

std::string pr(const Expr& e, int ctx) {
  int p = prec(e);
  std::string s;
  switch (e.kind) {
    case ExprKind::Lit:
      s = lit_text(e.lit, e.type);
      break;
    case ExprKind::Var:
      s = e.name;
      if (e.tag) s += "{" + std::to_string(e.tag) + "}";
      break;
    case ExprKind::Unary: {
      std::string inner = pr(*e.args[0], 11);
      if (e.op == Op::Neg && !inner.empty() && inner[0] == '-') inner = "(" + inner + ")";
      s = std::string(op_text(e.op)) + inner;
      break;
    }
    case ExprKind::Binary: {
      bool ra = right_assoc(e.op);
      bool nonassoc = p == 6;
      int lctx = ra || nonassoc ? p + 1 : p;
      int rctx = ra ? p : p + 1;
      std::string l = pr(*e.args[0], lctx);
      std::string r = pr(*e.args[1], rctx);
      s = l + " " + op_text(e.op) + " " + r;
      break;
    }
    case ExprKind::Cond:
      s = "if " + pr(*e.args[0], 0) + " then " + pr(*e.args[1], 0) + " else " + pr(*e.args[2], 0);
      break;
    case ExprKind::TupleLit:
      s = "(" + args_text(e.args) + ")";
      break;
    case ExprKind::ListLit:
      s = "[" + args_text(e.args) + "]";
      break;
    case ExprKind::Index:
      s = pr(*e.args[0], 12) + "[" + pr(*e.args[1], 0) + "]";
      break;
    case ExprKind::Proj:
      s = pr(*e.args[0], 12) + "." + std::to_string(e.index);
      break;
    case ExprKind::Call:
    case ExprKind::Builtin:
      s = e.name + "(" + args_text(e.args) + ")";
      break;
    case ExprKind::Binder: {
      if (e.binder == BinderKind::Tabulate) {
        s = "[" + pr(*e.args[0], 0) + " | " + e.name + " < " + pr(*e.args[1], 0) + "]";
        break;
      }
      static const char* kw[] = {"forall", "exists", "bigsum", "bigxor"};
      std::string dom = e.dom_syn ? print_type_syn(*e.dom_syn) : e.dom ? type_to_string(*e.dom) : "?";
      s = std::string(kw[static_cast<int>(e.binder)]) + " " + e.name + " : " + dom + ", " + pr(*e.args[0], 0);
      break;
    }
    case ExprKind::Coerce:
      return pr(*e.args[0], ctx);
  }
  if (p < ctx) return "(" + s + ")";
  return s;
}

void pad(std::string& out, int indent) { out.append(static_cast<std::size_t>(indent) * 2, ' '); }

void print_stmt(std::string& out, const Stmt& s, int indent) {
  pad(out, indent);
  switch (s.kind) {
    case StmtKind::Skip:
      out += "skip;\n";
      return;
    case StmtKind::Abort:
      out += "abort;\n";
      return;
    case StmtKind::Assign:
    case StmtKind::Sample:
      out += s.var;
      if (s.index) out += "[" + print_expr(*s.index) + "]";
      if (s.kind == StmtKind::Assign)
        out += " := " + print_expr(*s.expr) + ";\n";
      else
        out += " <$ " + print_dist(*s.dist) + ";\n";
      return;
    case StmtKind::If:
      out += "if " + print_expr(*s.expr) + " {\n" + print_block(s.body, indent + 1);
      pad(out, indent);
      out += "}";
      if (!s.els.empty()) {
        out += " else {\n" + print_block(s.els, indent + 1);
        pad(out, indent);
        out += "}";
      }
      out += "\n";
      return;
    case StmtKind::While:
      out += "while " + print_expr(*s.expr) + " {\n" + print_block(s.body, indent + 1);
      pad(out, indent);
      out += "}\n";
      return;
    case StmtKind::For:
      out += "for " + s.var + " = " + print_expr(*s.expr) + " to " + print_expr(*s.expr2) + " {\n" +
             print_block(s.body, indent + 1);
      pad(out, indent);
      out += "}\n";
      return;
  }
}

}  // namespace

std::string print_type_syn(const TypeSyn& t) {
  switch (t.kind) {
    case TypeKind::Bool: return "bool";
    case TypeKind::Integer: return "integer";
    case TypeKind::Rat: return "rat";
    case TypeKind::Range: return "range(" + print_expr(*t.sizes[0]) + ")";
    case TypeKind::ZMod: return "zmod(" + print_expr(*t.sizes[0]) + ")";
    case TypeKind::Int: return "int(" + print_expr(*t.sizes[0]) + ", " + print_expr(*t.sizes[1]) + ")";
    case TypeKind::List: return "list(" + print_expr(*t.sizes[0]) + ", " + print_type_syn(*t.elems[0]) + ")";
    case TypeKind::Array: return "array(" + print_expr(*t.sizes[0]) + ", " + print_type_syn(*t.elems[0]) + ")";
    case TypeKind::Tuple: {
      std::string s = "tuple(";
      for (std::size_t i = 0; i < t.elems.size(); ++i) s += (i ? ", " : "") + print_type_syn(*t.elems[i]);
      return s + ")";
    }
    case TypeKind::Enum: {
      std::string s = "enum{";
      for (std::size_t i = 0; i < t.labels.size(); ++i) s += (i ? ", " : "") + t.labels[i];
      return s + "}";
    }
  }
  return "?";
}

std::string print_expr(const Expr& e) { return pr(e, 0); }

std::string print_dist(const DistExpr& d) {
  switch (d.kind) {
    case DistKind::UniformType:
      if (d.type_syn) return "uniform(" + print_type_syn(*d.type_syn) + ")";
      return "uniform(" + (d.type ? type_to_string(*d.type) : std::string("?")) + ")";
    case DistKind::UniformSet: {
      std::string s = "uniform{";
      for (std::size_t i = 0; i < d.elems.size(); ++i) s += (i ? ", " : "") + print_expr(*d.elems[i]);
      return s + "}";
    }
    case DistKind::Bernoulli:
      return "flip(" + (d.bias ? print_expr(*d.bias) : to_string(d.p)) + ")";
  }
  return "?";
}

std::string print_block(const Block& b, int indent) {
  std::string out;
  for (const auto& s : b) print_stmt(out, *s, indent);
  return out;
}

std::string print_program(const Program& p) {
  std::string out = "program " + p.name + "\n";
  for (const auto& d : p.params) {
    out += "param " + d.name + " : " + print_type_syn(*d.type);
    if (d.value) out += " = " + print_expr(*d.value);
    out += ";\n";
  }
  for (const auto& f : p.funs) {
    out += "fun " + f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i)
      out += (i ? ", " : "") + f.params[i].first + " : " + print_type_syn(*f.params[i].second);
    out += ") : " + print_type_syn(*f.ret) + " = " + print_expr(*f.body) + ";\n";
  }
  for (const auto& v : p.vars) out += "var " + v.name + " : " + print_type_syn(*v.type) + " = " + print_expr(*v.init) + ";\n";
  out += "begin\n" + print_block(p.body, 1) + "end\n";
  return out;
}

}  // namespace couplecheck
