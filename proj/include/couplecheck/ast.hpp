#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "couplecheck/rational.hpp"
#include "couplecheck/types.hpp"
#include "couplecheck/value.hpp"

namespace couplecheck {

struct Loc {
  int line = 0;
  int col = 0;
};

struct SyntaxError : std::runtime_error {
  SyntaxError(const std::string& msg, Loc at)
      : std::runtime_error(std::to_string(at.line) + ":" + std::to_string(at.col) + ": " + msg), loc(at) {}
  Loc loc;
};

struct TypeError : std::runtime_error {
  explicit TypeError(std::vector<std::string> msgs);
  std::vector<std::string> messages;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
struct TypeSyn;
using TypeSynPtr = std::shared_ptr<const TypeSyn>;
struct FunDef;

// Type syntax as written; sizes may mention parameters and are resolved
// once parameters are bound.
struct TypeSyn {
  TypeKind kind = TypeKind::Bool;
  std::vector<ExprPtr> sizes;  // range(n) zmod(n) int(lo,hi) list(n,_) array(n,_)
  std::vector<TypeSynPtr> elems;
  std::vector<std::string> labels;
};

enum class Op {
  Add, Sub, Mul, Div, Mod, Pow,
  Neg, Not,
  And, Or, Xor, Implies, Iff,
  Eq, Ne, Lt, Le, Gt, Ge,
  Cons, Append
};

enum class ExprKind { Lit, Var, Unary, Binary, Cond, TupleLit, ListLit, Index, Proj, Call, Builtin, Binder, Coerce };
enum class BuiltinFn { Len, Upd, Fill };
// Tabulate is the list comprehension [body | j < bound], args = {body, bound}
enum class BinderKind { Forall, Exists, Sum, XorAll, Tabulate };
enum class RefKind { Unresolved, State, Const, Bound };

struct Expr {
  ExprKind kind = ExprKind::Lit;
  Loc loc;
  Op op = Op::Add;
  BuiltinFn builtin = BuiltinFn::Len;
  BinderKind binder = BinderKind::Forall;
  Value lit;
  std::string name;  // variable, function or binder variable
  int tag = 0;       // 0 in program text, 1/2 in relational assertions
  RefKind ref = RefKind::Unresolved;
  int slot = -1;
  int index = 0;  // tuple projection
  std::vector<ExprPtr> args;
  TypeSynPtr dom_syn;  // binder domain as written
  TypePtr dom;         // binder domain, or coercion target
  std::shared_ptr<const std::vector<Value>> dom_values;
  TypePtr type;        // set by the type checker
  std::shared_ptr<const FunDef> fun;
};

struct FunDef {
  std::string name;
  std::vector<std::pair<std::string, TypePtr>> params;
  TypePtr ret;
  ExprPtr body;
};

enum class DistKind { UniformType, UniformSet, Bernoulli };

struct DistExpr {
  DistKind kind = DistKind::UniformType;
  Loc loc;
  TypeSynPtr type_syn;
  std::vector<ExprPtr> elems;
  ExprPtr bias;  // Bernoulli parameter as written
  // resolved
  TypePtr type;
  std::vector<Value> support;
  Rational p;
};
using DistPtr = std::shared_ptr<const DistExpr>;

enum class StmtKind { Skip, Abort, Assign, Sample, If, While, For };

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::Skip;
  Loc loc;
  std::string var;   // target, or For counter
  int slot = -1;
  ExprPtr index;     // x[i] := e
  ExprPtr expr;      // rhs, guard, or For lower bound
  ExprPtr expr2;     // For upper bound
  DistPtr dist;
  Block body;
  Block els;
  // Loops in one fuel group share a single iteration budget; While-Split
  // puts its two pieces in the group of the loop it splits.
  int group = -1;
  bool group_start = true;
  bool group_end = true;
};

struct ParamDecl {
  std::string name;
  TypeSynPtr type;
  ExprPtr value;  // optional default
  Loc loc;
};

struct VarDecl {
  std::string name;
  TypeSynPtr type;
  ExprPtr init;
  Loc loc;
};

struct FunDecl {
  std::string name;
  std::vector<std::pair<std::string, TypeSynPtr>> params;
  TypeSynPtr ret;
  ExprPtr body;
  Loc loc;
};

struct Program {
  std::string name;
  std::vector<ParamDecl> params;
  std::vector<FunDecl> funs;
  std::vector<VarDecl> vars;
  Block body;
};

// constructors used by the parser, the transformations and the tests
ExprPtr mk_lit(Value v, TypePtr t = nullptr);
ExprPtr mk_bool(bool b);
ExprPtr mk_int(std::int64_t i);
ExprPtr mk_var(std::string name, int tag = 0);
ExprPtr mk_unary(Op op, ExprPtr a);
ExprPtr mk_binary(Op op, ExprPtr a, ExprPtr b);
ExprPtr mk_and(std::vector<ExprPtr> conj);
ExprPtr mk_cond(ExprPtr c, ExprPtr a, ExprPtr b);

StmtPtr mk_assign(std::string x, ExprPtr e);
StmtPtr mk_sample(std::string x, DistPtr d);
StmtPtr mk_while(ExprPtr guard, Block body);
StmtPtr mk_if(ExprPtr guard, Block then_b, Block else_b);
StmtPtr mk_skip();

bool expr_equal(const Expr& a, const Expr& b);
bool stmt_equal(const Stmt& a, const Stmt& b);
bool block_equal(const Block& a, const Block& b);
bool program_equal(const Program& a, const Program& b);

}  // namespace couplecheck
