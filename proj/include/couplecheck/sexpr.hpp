#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace couplecheck {

struct SExpr {
  enum class Kind { Symbol, String, List } kind = Kind::Symbol;
  std::string text;  // symbol or string contents
  std::vector<SExpr> items;
  int line = 0;

  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
  bool is_keyword() const { return kind == Kind::Symbol && !text.empty() && text[0] == ':'; }
  // head symbol of a list, or ""
  std::string head() const {
    return kind == Kind::List && !items.empty() && items[0].kind == Kind::Symbol ? items[0].text : "";
  }
  std::string to_string() const;
};

struct SExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All top-level forms; `;` starts a comment.
std::vector<SExpr> parse_sexprs(std::string_view text);

}  // namespace couplecheck
