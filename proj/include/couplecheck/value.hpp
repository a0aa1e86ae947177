#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace couplecheck {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integers also carry ZMod residues and enum label indices. Lists and
// tuples share an immutable element vector.
class Value {
 public:
  enum class Kind : std::uint8_t { Bool, Int, Tuple, List };

  Value() = default;

  static Value boolean(bool b);
  static Value integer(std::int64_t i);
  static Value tuple(std::vector<Value> elems);
  static Value list(std::vector<Value> elems);

  Kind kind() const { return kind_; }
  bool is_bool() const { return kind_ == Kind::Bool; }
  bool is_int() const { return kind_ == Kind::Int; }
  bool is_seq() const { return kind_ == Kind::Tuple || kind_ == Kind::List; }

  bool as_bool() const;
  std::int64_t as_int() const;
  const std::vector<Value>& elems() const;

  std::size_t hash() const;
  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  Kind kind_ = Kind::Bool;
  std::int64_t scalar_ = 0;
  std::shared_ptr<const std::vector<Value>> elems_;
};

}  // namespace couplecheck

template <>
struct std::hash<couplecheck::Value> {
  std::size_t operator()(const couplecheck::Value& v) const noexcept { return v.hash(); }
};
