#include "couplecheck/parser.hpp"

#include <cctype>
#include <set>

namespace couplecheck {

namespace {

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Loc loc;
};

const char* const kSymbols[] = {"<=>", ":=", "<$", "=>", "<=", ">=", "==", "!=", "&&", "||", "::", "++", "->"};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.loc = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      // copy tags of a self-composed program: x#2
      if (j + 1 < src.size() && src[j] == '#' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(t);
      continue;
    }
    bool matched = false;
    for (const char* s : kSymbols) {
      std::string_view sv(s);
      if (src.substr(i, sv.size()) == sv) {
        t.kind = Tok::Sym;
        t.text = std::string(sv);
        advance(sv.size());
        out.push_back(t);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("+-*/%^=<>!()[]{},;:.|").find(c) == std::string_view::npos)
      throw SyntaxError(std::string("unexpected character '") + c + "'", t.loc);
    t.kind = Tok::Sym;
    t.text = std::string(1, c);
    advance(1);
    out.push_back(t);
  }
  Token end;
  end.kind = Tok::End;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

const std::set<std::string> kKeywords = {"program", "param", "var",  "fun",    "begin",  "end",    "skip",
                                         "abort",   "if",    "then", "else",   "while",  "for",    "to",
                                         "true",    "false", "forall", "exists", "bigsum", "bigxor", "xor",
                                         "uniform", "flip"};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Program program() {
    Program p;
    expect_kw("program");
    p.name = ident("program name");
    std::set<std::string> declared;
    auto declare = [&](const std::string& name, Loc at) {
      if (!declared.insert(name).second) throw SyntaxError("duplicate declaration of '" + name + "'", at);
    };
    while (!at_kw("begin")) {
      if (at_kw("param")) {
        ParamDecl d;
        d.loc = next().loc;
        d.name = ident("parameter name");
        declare(d.name, d.loc);
        expect(":");
        d.type = type();
        if (accept("=")) d.value = expr();
        accept(";");
        p.params.push_back(std::move(d));
      } else if (at_kw("var")) {
        VarDecl d;
        d.loc = next().loc;
        d.name = ident("variable name");
        declare(d.name, d.loc);
        expect(":");
        d.type = type();
        expect("=");
        d.init = expr();
        accept(";");
        p.vars.push_back(std::move(d));
      } else if (at_kw("fun")) {
        FunDecl f;
        f.loc = next().loc;
        f.name = ident("function name");
        declare(f.name, f.loc);
        expect("(");
        if (!at(")")) {
          do {
            std::string a = ident("parameter name");
            expect(":");
            f.params.emplace_back(a, type());
          } while (accept(","));
        }
        expect(")");
        expect(":");
        f.ret = type();
        expect("=");
        f.body = expr();
        accept(";");
        p.funs.push_back(std::move(f));
      } else {
        fail("expected 'param', 'var', 'fun' or 'begin'");
      }
    }
    expect_kw("begin");
    p.body = stmts_until_kw("end");
    expect_kw("end");
    expect_end();
    return p;
  }

  ExprPtr whole_expr() {
    auto e = expr();
    expect_end();
    return e;
  }

  Block whole_block() {
    Block b;
    while (peek().kind != Tok::End) b.push_back(stmt());
    return b;
  }

  TypeSynPtr whole_type() {
    auto t = type();
    expect_end();
    return t;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(msg + ", found " + got, t.loc);
  }

  bool at(const char* sym) const { return peek().kind == Tok::Sym && peek().text == sym; }
  bool at_kw(const char* kw) const { return peek().kind == Tok::Ident && peek().text == kw; }
  bool accept(const char* sym) {
    if (!at(sym)) return false;
    ++pos_;
    return true;
  }
  bool accept_kw(const char* kw) {
    if (!at_kw(kw)) return false;
    ++pos_;
    return true;
  }
  void expect(const char* sym) {
    if (!accept(sym)) fail(std::string("expected '") + sym + "'");
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw)) fail(std::string("expected '") + kw + "'");
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("expected end of input");
  }
  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) fail(std::string("expected ") + what);
    return next().text;
  }

  std::shared_ptr<Expr> node(ExprKind k, Loc at) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->loc = at;
    return e;
  }

  TypeSynPtr type() {
    auto t = std::make_shared<TypeSyn>();
    Loc at = peek().loc;
    if (peek().kind != Tok::Ident) fail("expected a type");
    std::string k = next().text;
    if (k == "bool") {
      t->kind = TypeKind::Bool;
    } else if (k == "integer") {
      t->kind = TypeKind::Integer;
    } else if (k == "rat") {
      t->kind = TypeKind::Rat;
    } else if (k == "range" || k == "zmod") {
      t->kind = k == "range" ? TypeKind::Range : TypeKind::ZMod;
      expect("(");
      t->sizes.push_back(expr());
      expect(")");
    } else if (k == "int") {
      t->kind = TypeKind::Int;
      expect("(");
      t->sizes.push_back(expr());
      expect(",");
      t->sizes.push_back(expr());
      expect(")");
    } else if (k == "list" || k == "array") {
      t->kind = k == "list" ? TypeKind::List : TypeKind::Array;
      expect("(");
      t->sizes.push_back(expr());
      expect(",");
      t->elems.push_back(type());
      expect(")");
    } else if (k == "tuple") {
      t->kind = TypeKind::Tuple;
      expect("(");
      do t->elems.push_back(type());
      while (accept(","));
      expect(")");
    } else if (k == "enum") {
      t->kind = TypeKind::Enum;
      expect("{");
      do t->labels.push_back(ident("enum label"));
      while (accept(","));
      expect("}");
      std::set<std::string> seen(t->labels.begin(), t->labels.end());
      if (seen.size() != t->labels.size()) throw SyntaxError("duplicate enum label", at);
    } else {
      --pos_;
      fail("expected a type");
    }
    return t;
  }

  Block stmts_until_kw(const char* kw) {
    Block b;
    while (!at_kw(kw)) {
      if (peek().kind == Tok::End) fail(std::string("expected '") + kw + "'");
      b.push_back(stmt());
    }
    return b;
  }

  Block braced() {
    expect("{");
    Block b;
    while (!at("}")) {
      if (peek().kind == Tok::End) fail("expected '}'");
      b.push_back(stmt());
    }
    expect("}");
    return b;
  }

  StmtPtr stmt() {
    auto s = std::make_shared<Stmt>();
    s->loc = peek().loc;
    if (accept_kw("skip")) {
      s->kind = StmtKind::Skip;
      expect(";");
    } else if (accept_kw("abort")) {
      s->kind = StmtKind::Abort;
      expect(";");
    } else if (accept_kw("if")) {
      s->kind = StmtKind::If;
      s->expr = expr();
      s->body = braced();
      if (accept_kw("else")) {
        if (at_kw("if"))
          s->els.push_back(stmt());
        else
          s->els = braced();
      }
    } else if (accept_kw("while")) {
      s->kind = StmtKind::While;
      s->expr = expr();
      s->body = braced();
    } else if (accept_kw("for")) {
      s->kind = StmtKind::For;
      s->var = ident("loop counter");
      expect("=");
      s->expr = expr();
      expect_kw("to");
      s->expr2 = expr();
      s->body = braced();
    } else {
      s->var = ident("statement");
      if (accept("[")) {
        s->index = expr();
        expect("]");
      }
      if (accept(":=")) {
        s->kind = StmtKind::Assign;
        s->expr = expr();
      } else if (accept("<$")) {
        s->kind = StmtKind::Sample;
        s->dist = dist();
      } else {
        fail("expected ':=' or '<$'");
      }
      expect(";");
    }
    return s;
  }

  DistPtr dist() {
    auto d = std::make_shared<DistExpr>();
    d->loc = peek().loc;
    if (accept_kw("uniform")) {
      if (accept("(")) {
        d->kind = DistKind::UniformType;
        d->type_syn = type();
        expect(")");
      } else {
        expect("{");
        d->kind = DistKind::UniformSet;
        do d->elems.push_back(expr());
        while (accept(","));
        expect("}");
      }
    } else if (accept_kw("flip")) {
      d->kind = DistKind::Bernoulli;
      expect("(");
      d->bias = expr();
      expect(")");
    } else {
      fail("expected a distribution (uniform or flip)");
    }
    return d;
  }

 public:
  ExprPtr expr() {
    Loc at = peek().loc;
    for (auto [kw, bk] : {std::pair{"forall", BinderKind::Forall}, std::pair{"exists", BinderKind::Exists},
                          std::pair{"bigsum", BinderKind::Sum}, std::pair{"bigxor", BinderKind::XorAll}}) {
      if (accept_kw(kw)) {
        auto e = node(ExprKind::Binder, at);
        e->binder = bk;
        e->name = ident("bound variable");
        expect(":");
        e->dom_syn = type();
        expect(",");
        e->args.push_back(expr());
        return e;
      }
    }
    if (accept_kw("if")) {
      auto e = node(ExprKind::Cond, at);
      e->args.push_back(expr());
      expect_kw("then");
      e->args.push_back(expr());
      expect_kw("else");
      e->args.push_back(expr());
      return e;
    }
    return iff();
  }

 private:
  ExprPtr bin(Op op, ExprPtr a, ExprPtr b, Loc at) {
    auto e = node(ExprKind::Binary, at);
    e->op = op;
    e->args = {std::move(a), std::move(b)};
    return e;
  }

  // operands that may themselves be binders or conditionals on the right
  ExprPtr rhs(ExprPtr (Parser::*lower)()) {
    if (at_kw("forall") || at_kw("exists") || at_kw("bigsum") || at_kw("bigxor") || at_kw("if")) return expr();
    return (this->*lower)();
  }

  ExprPtr iff() {
    auto a = implies();
    while (at("<=>")) {
      Loc at = next().loc;
      a = bin(Op::Iff, a, rhs(&Parser::implies), at);
    }
    return a;
  }
  ExprPtr implies() {
    auto a = disj();
    if (at("=>")) {
      Loc at = next().loc;
      return bin(Op::Implies, a, rhs(&Parser::implies), at);
    }
    return a;
  }
  ExprPtr disj() {
    auto a = exor();
    while (at("||")) {
      Loc at = next().loc;
      a = bin(Op::Or, a, rhs(&Parser::exor), at);
    }
    return a;
  }
  ExprPtr exor() {
    auto a = conj();
    while (at_kw("xor")) {
      Loc at = next().loc;
      a = bin(Op::Xor, a, rhs(&Parser::conj), at);
    }
    return a;
  }
  ExprPtr conj() {
    auto a = cmp();
    while (at("&&")) {
      Loc at = next().loc;
      a = bin(Op::And, a, rhs(&Parser::cmp), at);
    }
    return a;
  }
  ExprPtr cmp() {
    auto a = cons();
    static const std::pair<const char*, Op> ops[] = {{"==", Op::Eq}, {"=", Op::Eq}, {"!=", Op::Ne}, {"<=", Op::Le},
                                                     {">=", Op::Ge}, {"<", Op::Lt}, {">", Op::Gt}};
    for (auto [s, op] : ops) {
      if (at(s)) {
        Loc at = next().loc;
        return bin(op, a, rhs(&Parser::cons), at);
      }
    }
    return a;
  }
  ExprPtr cons() {
    auto a = add();
    if (at("::") || at("++")) {
      Op op = peek().text == "::" ? Op::Cons : Op::Append;
      Loc at = next().loc;
      return bin(op, a, rhs(&Parser::cons), at);
    }
    return a;
  }
  ExprPtr add() {
    auto a = mul();
    while (at("+") || at("-")) {
      Op op = peek().text == "+" ? Op::Add : Op::Sub;
      Loc at = next().loc;
      a = bin(op, a, mul(), at);
    }
    return a;
  }
  ExprPtr mul() {
    auto a = pow();
    while (at("*") || at("/") || at("%")) {
      Op op = peek().text == "*" ? Op::Mul : peek().text == "/" ? Op::Div : Op::Mod;
      Loc at = next().loc;
      a = bin(op, a, pow(), at);
    }
    return a;
  }
  ExprPtr pow() {
    auto a = unary();
    if (at("^")) {
      Loc at = next().loc;
      return bin(Op::Pow, a, pow(), at);
    }
    return a;
  }
  ExprPtr unary() {
    Loc at = peek().loc;
    if (accept("-")) {
      bool literal = peek().kind == Tok::Int;
      auto a = unary();
      if (literal && a->kind == ExprKind::Lit && a->lit.is_int()) {
        auto e = node(ExprKind::Lit, at);
        e->lit = Value::integer(-a->lit.as_int());
        return e;
      }
      auto e = node(ExprKind::Unary, at);
      e->op = Op::Neg;
      e->args.push_back(a);
      return e;
    }
    if (accept("!")) {
      auto e = node(ExprKind::Unary, at);
      e->op = Op::Not;
      e->args.push_back(unary());
      return e;
    }
    return postfix();
  }
  ExprPtr postfix() {
    auto a = primary();
    while (true) {
      Loc here = peek().loc;
      if (accept("[")) {
        auto e = node(ExprKind::Index, here);
        e->args = {a, expr()};
        expect("]");
        a = e;
      } else if (at(".") && peek(1).kind == Tok::Int) {
        next();
        auto e = node(ExprKind::Proj, here);
        e->index = std::stoi(next().text);
        e->args = {a};
        a = e;
      } else {
        return a;
      }
    }
  }
  ExprPtr primary() {
    const Token& t = peek();
    Loc here = t.loc;
    if (t.kind == Tok::Int) {
      auto e = node(ExprKind::Lit, here);
      try {
        e->lit = Value::integer(std::stoll(next().text));
      } catch (const std::out_of_range&) {
        throw SyntaxError("integer literal out of range", here);
      }
      return e;
    }
    if (accept_kw("true") || accept_kw("false")) {
      auto e = node(ExprKind::Lit, here);
      e->lit = Value::boolean(toks_[pos_ - 1].text == "true");
      return e;
    }
    if (at_kw("if") || at_kw("forall") || at_kw("exists") || at_kw("bigsum") || at_kw("bigxor")) return expr();
    if (accept("(")) {
      auto first = expr();
      if (accept(")")) return first;
      auto e = node(ExprKind::TupleLit, here);
      e->args.push_back(first);
      while (accept(",")) e->args.push_back(expr());
      expect(")");
      return e;
    }
    if (accept("[")) {
      auto e = node(ExprKind::ListLit, here);
      if (!at("]")) {
        auto first = expr();
        if (accept("|")) {
          auto t = node(ExprKind::Binder, here);
          t->binder = BinderKind::Tabulate;
          t->name = ident("bound variable");
          expect("<");
          auto bound = expr();
          expect("]");
          t->args = {first, bound};
          return t;
        }
        e->args.push_back(first);
        while (accept(",")) e->args.push_back(expr());
        expect("]");
        return e;
      }
      expect("]");
      return e;
    }
    if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
      std::string name = next().text;
      if (at("{") && peek(1).kind == Tok::Int && (peek(1).text == "1" || peek(1).text == "2") &&
          peek(2).kind == Tok::Sym && peek(2).text == "}") {
        next();
        int tag = std::stoi(next().text);
        next();
        auto e = node(ExprKind::Var, here);
        e->name = name;
        e->tag = tag;
        return e;
      }
      if (accept("(")) {
        std::shared_ptr<Expr> e;
        if (name == "len" || name == "upd" || name == "fill") {
          e = node(ExprKind::Builtin, here);
          e->builtin = name == "len" ? BuiltinFn::Len : name == "upd" ? BuiltinFn::Upd : BuiltinFn::Fill;
        } else {
          e = node(ExprKind::Call, here);
        }
        e->name = name;
        if (!at(")")) {
          do e->args.push_back(expr());
          while (accept(","));
        }
        expect(")");
        return e;
      }
      auto e = node(ExprKind::Var, here);
      e->name = name;
      return e;
    }
    fail("expected an expression");
  }
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }
ExprPtr parse_expr(std::string_view text) { return Parser(text).whole_expr(); }
Block parse_block(std::string_view text) { return Parser(text).whole_block(); }
TypeSynPtr parse_type(std::string_view text) { return Parser(text).whole_type(); }

}  // namespace couplecheck
