#include "couplecheck/types.hpp"

#include <limits>
#include <stdexcept>

namespace couplecheck {

namespace {

TypePtr make(Type t) { return std::make_shared<const Type>(std::move(t)); }

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) return std::numeric_limits<std::uint64_t>::max();
  return a + b;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
  std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

void sequences(const std::vector<Value>& elem_vals, std::size_t len, std::vector<Value>& out, bool as_list) {
  std::vector<std::size_t> idx(len, 0);
  while (true) {
    std::vector<Value> cur;
    cur.reserve(len);
    for (auto i : idx) cur.push_back(elem_vals[i]);
    out.push_back(as_list ? Value::list(std::move(cur)) : Value::tuple(std::move(cur)));
    std::size_t k = len;
    while (k > 0) {
      --k;
      if (++idx[k] < elem_vals.size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (len == 0) return;
  }
}

}  // namespace

TypePtr t_bool() {
  static const TypePtr t = make({TypeKind::Bool});
  return t;
}
TypePtr t_range(std::int64_t n) { return make({TypeKind::Range, 0, n - 1, n}); }
TypePtr t_int(std::int64_t lo, std::int64_t hi) { return make({TypeKind::Int, lo, hi, 0}); }
TypePtr t_zmod(std::int64_t n) { return make({TypeKind::ZMod, 0, n - 1, n}); }
TypePtr t_enum(std::vector<std::string> labels) {
  Type t{TypeKind::Enum};
  t.labels = std::move(labels);
  return make(std::move(t));
}
TypePtr t_tuple(std::vector<TypePtr> elems) {
  Type t{TypeKind::Tuple};
  t.elems = std::move(elems);
  return make(std::move(t));
}
TypePtr t_list(std::int64_t max_len, TypePtr elem) {
  Type t{TypeKind::List};
  t.n = max_len;
  t.elems = {std::move(elem)};
  return make(std::move(t));
}
TypePtr t_array(std::int64_t len, TypePtr elem) {
  Type t{TypeKind::Array};
  t.n = len;
  t.elems = {std::move(elem)};
  return make(std::move(t));
}
TypePtr t_integer() {
  static const TypePtr t = make({TypeKind::Integer});
  return t;
}
TypePtr t_rat() {
  static const TypePtr t = make({TypeKind::Rat});
  return t;
}

bool type_equal(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TypeKind::Bool:
    case TypeKind::Integer:
    case TypeKind::Rat:
      return true;
    case TypeKind::Range:
    case TypeKind::ZMod:
      return a.n == b.n;
    case TypeKind::Int:
      return a.lo == b.lo && a.hi == b.hi;
    case TypeKind::Enum:
      return a.labels == b.labels;
    case TypeKind::Tuple:
      if (a.elems.size() != b.elems.size()) return false;
      for (std::size_t i = 0; i < a.elems.size(); ++i)
        if (!type_equal(*a.elems[i], *b.elems[i])) return false;
      return true;
    case TypeKind::List:
    case TypeKind::Array:
      return a.n == b.n && type_equal(*a.elems[0], *b.elems[0]);
  }
  return false;
}

bool is_finite(const Type& t) {
  switch (t.kind) {
    case TypeKind::Integer:
    case TypeKind::Rat:
      return false;
    case TypeKind::Tuple:
    case TypeKind::List:
    case TypeKind::Array:
      for (const auto& e : t.elems)
        if (!is_finite(*e)) return false;
      return true;
    default:
      return true;
  }
}

bool is_numeric(const Type& t) {
  return t.kind == TypeKind::Range || t.kind == TypeKind::Int || t.kind == TypeKind::ZMod ||
         t.kind == TypeKind::Integer;
}

std::string type_to_string(const Type& t) {
  switch (t.kind) {
    case TypeKind::Bool:
      return "bool";
    case TypeKind::Range:
      return "range(" + std::to_string(t.n) + ")";
    case TypeKind::Int:
      return "int(" + std::to_string(t.lo) + ", " + std::to_string(t.hi) + ")";
    case TypeKind::ZMod:
      return "zmod(" + std::to_string(t.n) + ")";
    case TypeKind::Enum: {
      std::string s = "enum{";
      for (std::size_t i = 0; i < t.labels.size(); ++i) s += (i ? ", " : "") + t.labels[i];
      return s + "}";
    }
    case TypeKind::Tuple: {
      std::string s = "tuple(";
      for (std::size_t i = 0; i < t.elems.size(); ++i) s += (i ? ", " : "") + type_to_string(*t.elems[i]);
      return s + ")";
    }
    case TypeKind::List:
      return "list(" + std::to_string(t.n) + ", " + type_to_string(*t.elems[0]) + ")";
    case TypeKind::Array:
      return "array(" + std::to_string(t.n) + ", " + type_to_string(*t.elems[0]) + ")";
    case TypeKind::Integer:
      return "integer";
    case TypeKind::Rat:
      return "rat";
  }
  return "?";
}

std::uint64_t domain_size(const Type& t) {
  switch (t.kind) {
    case TypeKind::Bool:
      return 2;
    case TypeKind::Range:
    case TypeKind::ZMod:
      return static_cast<std::uint64_t>(t.n);
    case TypeKind::Int:
      return static_cast<std::uint64_t>(t.hi - t.lo + 1);
    case TypeKind::Enum:
      return t.labels.size();
    case TypeKind::Tuple: {
      std::uint64_t s = 1;
      for (const auto& e : t.elems) s = sat_mul(s, domain_size(*e));
      return s;
    }
    case TypeKind::List: {
      std::uint64_t e = domain_size(*t.elems[0]), total = 0, pw = 1;
      for (std::int64_t k = 0; k <= t.n; ++k) {
        total = sat_add(total, pw);
        pw = sat_mul(pw, e);
      }
      return total;
    }
    case TypeKind::Array: {
      std::uint64_t e = domain_size(*t.elems[0]), pw = 1;
      for (std::int64_t k = 0; k < t.n; ++k) pw = sat_mul(pw, e);
      return pw;
    }
    case TypeKind::Integer:
    case TypeKind::Rat:
      return std::numeric_limits<std::uint64_t>::max();
  }
  return 0;
}

std::vector<Value> enumerate_type(const Type& t, std::uint64_t cap) {
  if (!is_finite(t)) throw std::length_error("cannot enumerate infinite type " + type_to_string(t));
  if (domain_size(t) > cap)
    throw std::length_error("carrier of " + type_to_string(t) + " exceeds the enumeration cap");
  std::vector<Value> out;
  switch (t.kind) {
    case TypeKind::Bool:
      return {Value::boolean(false), Value::boolean(true)};
    case TypeKind::Range:
    case TypeKind::ZMod:
      for (std::int64_t i = 0; i < t.n; ++i) out.push_back(Value::integer(i));
      return out;
    case TypeKind::Int:
      for (std::int64_t i = t.lo; i <= t.hi; ++i) out.push_back(Value::integer(i));
      return out;
    case TypeKind::Enum:
      for (std::size_t i = 0; i < t.labels.size(); ++i) out.push_back(Value::integer(static_cast<std::int64_t>(i)));
      return out;
    case TypeKind::Tuple: {
      std::vector<std::vector<Value>> parts;
      for (const auto& e : t.elems) parts.push_back(enumerate_type(*e, cap));
      std::vector<std::size_t> idx(parts.size(), 0);
      for (const auto& p : parts)
        if (p.empty()) return out;
      while (true) {
        std::vector<Value> cur;
        for (std::size_t i = 0; i < parts.size(); ++i) cur.push_back(parts[i][idx[i]]);
        out.push_back(Value::tuple(std::move(cur)));
        std::size_t k = parts.size();
        bool done = true;
        while (k > 0) {
          --k;
          if (++idx[k] < parts[k].size()) {
            done = false;
            break;
          }
          idx[k] = 0;
        }
        if (done) return out;
      }
    }
    case TypeKind::List: {
      auto ev = enumerate_type(*t.elems[0], cap);
      for (std::int64_t len = 0; len <= t.n; ++len) {
        if (len > 0 && ev.empty()) break;
        sequences(ev, static_cast<std::size_t>(len), out, true);
      }
      return out;
    }
    case TypeKind::Array: {
      auto ev = enumerate_type(*t.elems[0], cap);
      if (t.n > 0 && ev.empty()) return out;
      sequences(ev, static_cast<std::size_t>(t.n), out, true);
      return out;
    }
    default:
      break;
  }
  return out;
}

bool contains(const Type& t, const Value& v) {
  switch (t.kind) {
    case TypeKind::Bool:
      return v.is_bool();
    case TypeKind::Range:
    case TypeKind::ZMod:
      return v.is_int() && v.as_int() >= 0 && v.as_int() < t.n;
    case TypeKind::Int:
      return v.is_int() && v.as_int() >= t.lo && v.as_int() <= t.hi;
    case TypeKind::Enum:
      return v.is_int() && v.as_int() >= 0 && v.as_int() < static_cast<std::int64_t>(t.labels.size());
    case TypeKind::Integer:
      return v.is_int();
    case TypeKind::Rat:
      return false;
    case TypeKind::Tuple: {
      if (v.kind() != Value::Kind::Tuple || v.elems().size() != t.elems.size()) return false;
      for (std::size_t i = 0; i < t.elems.size(); ++i)
        if (!contains(*t.elems[i], v.elems()[i])) return false;
      return true;
    }
    case TypeKind::List:
    case TypeKind::Array: {
      if (v.kind() != Value::Kind::List) return false;
      auto len = static_cast<std::int64_t>(v.elems().size());
      if (t.kind == TypeKind::List ? len > t.n : len != t.n) return false;
      for (const auto& e : v.elems())
        if (!contains(*t.elems[0], e)) return false;
      return true;
    }
  }
  return false;
}

std::optional<Value> coerce(const Type& t, const Value& v) {
  switch (t.kind) {
    case TypeKind::ZMod:
      if (!v.is_int()) return std::nullopt;
      return Value::integer(floor_mod(v.as_int(), t.n));
    case TypeKind::Tuple: {
      if (v.kind() != Value::Kind::Tuple || v.elems().size() != t.elems.size()) return std::nullopt;
      std::vector<Value> out;
      for (std::size_t i = 0; i < t.elems.size(); ++i) {
        auto e = coerce(*t.elems[i], v.elems()[i]);
        if (!e) return std::nullopt;
        out.push_back(std::move(*e));
      }
      return Value::tuple(std::move(out));
    }
    case TypeKind::List:
    case TypeKind::Array: {
      if (v.kind() != Value::Kind::List) return std::nullopt;
      auto len = static_cast<std::int64_t>(v.elems().size());
      if (t.kind == TypeKind::List ? len > t.n : len != t.n) return std::nullopt;
      if (contains(t, v)) return v;
      std::vector<Value> out;
      for (const auto& e : v.elems()) {
        auto c = coerce(*t.elems[0], e);
        if (!c) return std::nullopt;
        out.push_back(std::move(*c));
      }
      return Value::list(std::move(out));
    }
    default:
      if (!contains(t, v)) return std::nullopt;
      return v;
  }
}

bool assignable(const Type& to, const Type& from) {
  if (is_numeric(to) && is_numeric(from)) {
    // residues do not silently widen into plain integer variables of another modulus
    if (from.kind == TypeKind::ZMod && to.kind == TypeKind::ZMod) return from.n == to.n;
    return true;
  }
  if (to.kind != from.kind) {
    bool seqs = (to.kind == TypeKind::List || to.kind == TypeKind::Array) &&
                (from.kind == TypeKind::List || from.kind == TypeKind::Array);
    if (!seqs) return false;
  }
  switch (to.kind) {
    case TypeKind::Bool:
      return true;
    case TypeKind::Enum:
      return to.labels == from.labels;
    case TypeKind::Tuple:
      if (to.elems.size() != from.elems.size()) return false;
      for (std::size_t i = 0; i < to.elems.size(); ++i)
        if (!assignable(*to.elems[i], *from.elems[i])) return false;
      return true;
    case TypeKind::List:
    case TypeKind::Array:
      // the empty literal [] fits every sequence type
      if (from.kind == TypeKind::List && from.n == 0) return true;
      return assignable(*to.elems[0], *from.elems[0]);
    default:
      return false;
  }
}

std::string format_value(const Value& v, const Type& t) {
  switch (t.kind) {
    case TypeKind::Enum:
      if (v.is_int() && v.as_int() >= 0 && v.as_int() < static_cast<std::int64_t>(t.labels.size()))
        return t.labels[static_cast<std::size_t>(v.as_int())];
      break;
    case TypeKind::Tuple:
      if (v.kind() == Value::Kind::Tuple && v.elems().size() == t.elems.size()) {
        std::string s = "(";
        for (std::size_t i = 0; i < t.elems.size(); ++i)
          s += (i ? ", " : "") + format_value(v.elems()[i], *t.elems[i]);
        return s + ")";
      }
      break;
    case TypeKind::List:
    case TypeKind::Array:
      if (v.kind() == Value::Kind::List) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.elems().size(); ++i)
          s += (i ? ", " : "") + format_value(v.elems()[i], *t.elems[0]);
        return s + "]";
      }
      break;
    default:
      break;
  }
  return v.to_string();
}

}  // namespace couplecheck
