#pragma once

#include <string>
#include <utility>
#include <vector>

#include "couplecheck/ast.hpp"
#include "couplecheck/state.hpp"

namespace couplecheck {

struct EvalEnv {
  const State* st[3] = {nullptr, nullptr, nullptr};
  std::vector<std::pair<const std::string*, Value>> bound;
};

// Throws EvalError on partial operations (index out of range, division by
// zero, failed coercion) and on unresolved names.
Value eval(const Expr& e, EvalEnv& env);
bool eval_bool(const Expr& e, EvalEnv& env);

// Closed expressions only.
Value eval_closed(const Expr& e);

std::int64_t floor_div(std::int64_t a, std::int64_t b);
std::int64_t floor_mod(std::int64_t a, std::int64_t b);

}  // namespace couplecheck
