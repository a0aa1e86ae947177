#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "couplecheck/typecheck.hpp"

namespace couplecheck {

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relational scope over two layouts. Consts, funs and labels are taken
// from the programs; meta-parameters are added as consts.
Scope relational_scope(const TypedProgram& left, const TypedProgram& right);

// EqMem, or EqMem p x q on self-compositions, over the variables the two
// layouts share by base name. Copy i of x is named x#i; x itself stands
// for copy 1 in an uncomposed program.
ExprPtr eqmem(const Layout& left, const Layout& right, std::optional<std::pair<int, int>> pq = std::nullopt);

// Parses a relational formula, expands the EqMem / eqmem(p, q) macros and
// typechecks it in `rel`.
ExprPtr parse_assertion(std::string_view text, Scope& rel);
ExprPtr expand_macros(const ExprPtr& e, const Layout& left, const Layout& right);

// A formula is true on a pair of states when it evaluates to true without
// a run-time error.
bool eval_assertion(const Expr& phi, const State& m1, const State& m2);

// Tags every state variable of a (typed) program expression with `side`.
ExprPtr retag(const ExprPtr& e, int side);

// phi[e / x<side>], where e is a typed expression over tagged variables.
ExprPtr subst(const ExprPtr& phi, int side, int slot, const ExprPtr& e);

// phi[upd(x, i, e) / x] for an indexed target, otherwise plain subst; the
// index is a program expression and gets tagged here.
ExprPtr subst_target(const ExprPtr& phi, int side, const Stmt& target, const ExprPtr& e, const Layout& layout);

using VarRef = std::pair<int, int>;  // (tag, slot)
std::set<VarRef> free_vars(const Expr& e);

struct CounterExample {
  std::vector<std::pair<std::string, std::string>> bindings;  // "x{1}" -> value
  std::string to_string() const;
};

struct ImplicationResult {
  bool valid = false;
  std::optional<CounterExample> cex;
  std::uint64_t explored = 0;
};

// Exhaustive search over the carriers of the free tagged variables, with
// pruning on antecedent conjuncts and propagation of `x = e` conjuncts.
// Throws BudgetError beyond `budget` search nodes.
ImplicationResult check_implies(const ExprPtr& phi, const ExprPtr& psi, const Scope& rel,
                                std::uint64_t budget = 10'000'000);

std::vector<ExprPtr> conjuncts(const ExprPtr& e);

}  // namespace couplecheck
