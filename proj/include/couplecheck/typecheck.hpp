#pragma once

#include <map>
#include <string>
#include <vector>

#include "couplecheck/ast.hpp"
#include "couplecheck/state.hpp"

namespace couplecheck {

struct ConstInfo {
  std::string name;
  TypePtr type;
  Value value;    // unless rat
  Rational rat;   // rat parameters only
};

// parameter / meta-parameter name -> value text
using Bindings = std::map<std::string, std::string>;

struct LabelInfo {
  TypePtr type;
  std::int64_t index = 0;
};

// Name resolution context shared by programs and relational assertions.
// side[0] resolves untagged variables (program text), side[1]/side[2]
// resolve x{1}/x{2}.
struct Scope {
  const Layout* side[3] = {nullptr, nullptr, nullptr};
  std::map<std::string, ConstInfo> consts;
  std::map<std::string, std::shared_ptr<const FunDef>> funs;
  std::map<std::string, LabelInfo> labels;
  std::vector<std::pair<std::string, TypePtr>> bound;
};

struct TypedProgram {
  Program source;
  Bindings bindings;
  std::string name;
  LayoutPtr layout;
  std::vector<ConstInfo> consts;
  std::map<std::string, std::shared_ptr<const FunDef>> funs;
  std::map<std::string, LabelInfo> labels;
  State init;
  Block body;
  int num_groups = 0;

  Scope scope() const;  // consts, funs and labels, no variables
};

// Unbound parameters without defaults are errors. Throws TypeError listing
// every problem found.
TypedProgram typecheck(const Program& p, const Bindings& bindings = {});

// Replaces every `for` by the equivalent counter loop.
TypedProgram desugar(const TypedProgram& tp);
Block desugar_block(const Block& b);

// parse + typecheck + desugar
TypedProgram load_program(std::string_view text, const Bindings& bindings = {});
TypedProgram load_program_file(const std::string& path, const Bindings& bindings = {});

// Expression checking; the result is a fresh annotated tree with constants
// inlined and closed subterms folded.
ExprPtr check_expr(const ExprPtr& e, Scope& scope);
ExprPtr check_bool(const ExprPtr& e, Scope& scope);
TypePtr resolve_type(const TypeSyn& t, Scope& scope);

// Typechecks statements against a layout (used for Struct replacements).
Block check_block(const Block& b, Scope& scope, int& next_group);

// Constant folding on annotated trees.
ExprPtr fold(const ExprPtr& e);

// Wraps e into a coercion to t unless it already has that type.
ExprPtr coerce_to(const ExprPtr& e, const TypePtr& t);

bool is_closed(const Expr& e);

// Typechecks function declarations in order and adds them to scope.funs.
void check_funs(const std::vector<FunDecl>& funs, Scope& scope);

}  // namespace couplecheck
