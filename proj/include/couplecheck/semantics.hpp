#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "couplecheck/state.hpp"
#include "couplecheck/subdist.hpp"
#include "couplecheck/typecheck.hpp"

namespace couplecheck {

using StateDist = SubDist<State>;
using ValueDist = SubDist<Value>;

// The output distribution of a sampling instruction; proper by construction.
ValueDist eval_dist(const DistExpr& d);

// Programs must be desugared. Each loop runs at most `fuel` iterations of
// its group per entry; mass still inside a loop after that is residual.
StateDist exec(const Block& b, const State& m, std::uint32_t fuel);
StateDist exec_dist(const Block& b, const StateDist& mu, std::uint32_t fuel);
StateDist exec_stmt(const Stmt& s, const State& m, std::uint32_t fuel);

StateDist run_program(const TypedProgram& tp, std::uint32_t fuel);

// Canonical initial state only, or every store over the layout.
std::vector<State> initial_states(const TypedProgram& tp, bool enumerate_all);

enum class LosslessKind { Exact, Within, NotLossless };

struct LosslessResult {
  LosslessKind kind = LosslessKind::Exact;
  Rational residual = 0;
  Rational deficit = 0;  // 1 - weight - residual: abort and error mass
  std::string to_string() const;
};

LosslessResult check_lossless(const TypedProgram& tp, std::uint32_t fuel, const Rational& tol, bool enumerate_all = false);
LosslessResult check_lossless(const Block& b, const std::vector<State>& from, std::uint32_t fuel, const Rational& tol);

}  // namespace couplecheck
