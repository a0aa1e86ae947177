#include "couplecheck/sexpr.hpp"

#include <cctype>

namespace couplecheck {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  bool at_end() {
    skip();
    return i_ >= s_.size();
  }

  SExpr read() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of input");
    SExpr e;
    e.line = line_;
    char c = s_[i_];
    if (c == '(') {
      ++i_;
      e.kind = SExpr::Kind::List;
      while (true) {
        skip();
        if (i_ >= s_.size()) fail("unclosed '('");
        if (s_[i_] == ')') {
          ++i_;
          return e;
        }
        e.items.push_back(read());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') {
      ++i_;
      e.kind = SExpr::Kind::String;
      while (true) {
        if (i_ >= s_.size()) fail("unterminated string");
        char d = s_[i_++];
        if (d == '"') return e;
        if (d == '\n') ++line_;
        if (d == '\\' && i_ < s_.size()) d = s_[i_++];
        e.text += d;
      }
    }
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')' &&
           s_[i_] != '"' && s_[i_] != ';')
      e.text += s_[i_++];
    return e;
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == '\n') {
        ++line_;
        ++i_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
      } else if (c == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }
  [[noreturn]] void fail(const std::string& msg) { throw SExprError("line " + std::to_string(line_) + ": " + msg); }

  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1;
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader r(text);
  std::vector<SExpr> out;
  while (!r.at_end()) out.push_back(r.read());
  return out;
}

std::string SExpr::to_string() const {
  switch (kind) {
    case Kind::Symbol:
      return text;
    case Kind::String: {
      std::string s = "\"";
      for (char c : text) {
        if (c == '"' || c == '\\') s += '\\';
        s += c;
      }
      return s + "\"";
    }
    case Kind::List: {
      std::string s = "(";
      for (std::size_t i = 0; i < items.size(); ++i) s += (i ? " " : "") + items[i].to_string();
      return s + ")";
    }
  }
  return "";
}

}  // namespace couplecheck
