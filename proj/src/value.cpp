#include "couplecheck/value.hpp"

#include <functional>

namespace couplecheck {

Value Value::boolean(bool b) {
  Value v;
  v.kind_ = Kind::Bool;
  v.scalar_ = b ? 1 : 0;
  return v;
}

Value Value::integer(std::int64_t i) {
  Value v;
  v.kind_ = Kind::Int;
  v.scalar_ = i;
  return v;
}

Value Value::tuple(std::vector<Value> elems) {
  Value v;
  v.kind_ = Kind::Tuple;
  v.elems_ = std::make_shared<const std::vector<Value>>(std::move(elems));
  return v;
}

Value Value::list(std::vector<Value> elems) {
  Value v;
  v.kind_ = Kind::List;
  v.elems_ = std::make_shared<const std::vector<Value>>(std::move(elems));
  return v;
}

bool Value::as_bool() const {
  if (kind_ != Kind::Bool) throw EvalError("expected a boolean, got " + to_string());
  return scalar_ != 0;
}

std::int64_t Value::as_int() const {
  if (kind_ != Kind::Int) throw EvalError("expected an integer, got " + to_string());
  return scalar_;
}

const std::vector<Value>& Value::elems() const {
  if (!is_seq()) throw EvalError("expected a tuple or list, got " + to_string());
  return *elems_;
}

std::size_t Value::hash() const {
  std::size_t h = std::hash<std::int64_t>()(scalar_) * 31 + static_cast<std::size_t>(kind_);
  if (is_seq())
    for (const auto& e : *elems_) h = h * 1000003u ^ e.hash();
  return h;
}

std::string Value::to_string() const {
  switch (kind_) {
    case Kind::Bool:
      return scalar_ ? "true" : "false";
    case Kind::Int:
      return std::to_string(scalar_);
    case Kind::Tuple:
    case Kind::List: {
      std::string s = kind_ == Kind::Tuple ? "(" : "[";
      for (std::size_t i = 0; i < elems_->size(); ++i) {
        if (i) s += ", ";
        s += (*elems_)[i].to_string();
      }
      s += kind_ == Kind::Tuple ? ")" : "]";
      return s;
    }
  }
  return "?";
}

bool operator==(const Value& a, const Value& b) { return (a <=> b) == 0; }

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
  if (!a.is_seq()) return a.scalar_ <=> b.scalar_;
  if (a.elems_ == b.elems_) return std::strong_ordering::equal;
  const auto& x = *a.elems_;
  const auto& y = *b.elems_;
  // shorter lists first, matching the enumeration order of bounded lists
  if (x.size() != y.size()) return x.size() <=> y.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto c = x[i] <=> y[i];
    if (c != 0) return c;
  }
  return std::strong_ordering::equal;
}

}  // namespace couplecheck
