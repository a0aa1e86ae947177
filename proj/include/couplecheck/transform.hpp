#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "couplecheck/semantics.hpp"
#include "couplecheck/typecheck.hpp"

namespace couplecheck {

struct Footprint {
  std::set<std::string> all;
  std::set<std::string> modified;
};

Footprint var_footprint(const Stmt& s);
Footprint var_footprint(const Block& b);

// n disjoint copies of the (desugared) program run in sequence; copy i of
// variable x is x#i, parameters and functions are shared.
Program self_compose_source(const TypedProgram& p, int n);
TypedProgram self_compose(const TypedProgram& p, int n);
State self_compose_state(const State& m, int n);
// the i-th copy (1-based) of a self-composed state
State project_copy(const State& m, std::size_t vars_per_copy, int i);

// while (e && e') body; while e body -- sharing the loop's fuel group.
// `e_prime` must be typed against the program's variables.
Block while_split(const Stmt& loop, const ExprPtr& e_prime);

struct SwapError : std::runtime_error {
  SwapError(const std::string& var)
      : std::runtime_error("statements share variable " + var), shared(var) {}
  std::string shared;
};

// s2; s1 -- requires var(s1) and var(s2) to be disjoint
Block swap_stmts(const StmtPtr& s1, const StmtPtr& s2);
// Moves statement `from` to position `to` (0-based) by adjacent swaps.
Block move_stmt(const Block& b, std::size_t from, std::size_t to);

struct EquivResult {
  bool equivalent = true;
  std::optional<State> witness;  // a seed where the outputs differ
  std::string detail;
};

// Compares the exact output distributions (masses, residual and error) of
// the two blocks from every seed.
EquivResult semantic_equiv(const Block& a, const Block& b, const std::vector<State>& seeds, std::uint32_t fuel);

// Relational form: every pair of seeds satisfying phi.
EquivResult semantic_equiv(const ExprPtr& phi, const Block& a, const Block& b, const std::vector<State>& seeds1,
                           const std::vector<State>& seeds2, std::uint32_t fuel);

}  // namespace couplecheck
