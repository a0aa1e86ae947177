#pragma once

#include <string>
#include <string_view>

#include "couplecheck/ast.hpp"

namespace couplecheck {

Program parse_program(std::string_view text);

// Standalone fragments: assertion formulas, replacement statements, types.
ExprPtr parse_expr(std::string_view text);
Block parse_block(std::string_view text);
TypeSynPtr parse_type(std::string_view text);

std::string print_type_syn(const TypeSyn& t);
std::string print_expr(const Expr& e);
std::string print_dist(const DistExpr& d);
std::string print_block(const Block& b, int indent = 1);
std::string print_program(const Program& p);

}  // namespace couplecheck
