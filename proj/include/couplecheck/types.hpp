#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "couplecheck/value.hpp"

namespace couplecheck {

// Integer is the unbounded type of arithmetic intermediates; Rat only types
// parameters (Bernoulli biases). Neither is a state type.
enum class TypeKind { Bool, Range, Int, ZMod, Enum, Tuple, List, Array, Integer, Rat };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  TypeKind kind = TypeKind::Bool;
  std::int64_t lo = 0;  // Int lower bound
  std::int64_t hi = 0;  // Int upper bound
  std::int64_t n = 0;   // Range size, ZMod modulus, List max length, Array length
  std::vector<std::string> labels;
  std::vector<TypePtr> elems;  // Tuple components; element type for List/Array
};

TypePtr t_bool();
TypePtr t_range(std::int64_t n);
TypePtr t_int(std::int64_t lo, std::int64_t hi);
TypePtr t_zmod(std::int64_t n);
TypePtr t_enum(std::vector<std::string> labels);
TypePtr t_tuple(std::vector<TypePtr> elems);
TypePtr t_list(std::int64_t max_len, TypePtr elem);
TypePtr t_array(std::int64_t len, TypePtr elem);
TypePtr t_integer();
TypePtr t_rat();

bool type_equal(const Type& a, const Type& b);
bool is_finite(const Type& t);
bool is_numeric(const Type& t);  // Range, Int, ZMod, Integer
std::string type_to_string(const Type& t);

// Saturates at UINT64_MAX.
std::uint64_t domain_size(const Type& t);

// Deterministic, duplicate-free. Lists are ordered by length, then
// lexicographically. Throws std::length_error above `cap` values.
std::vector<Value> enumerate_type(const Type& t, std::uint64_t cap = 50'000'000);

bool contains(const Type& t, const Value& v);

// Moves v into the carrier of t: integers are reduced for ZMod, bounds and
// lengths are checked. nullopt when v does not fit.
std::optional<Value> coerce(const Type& t, const Value& v);

// Whether a value of type `from` may be stored in a variable of type `to`
// (possibly failing at run time).
bool assignable(const Type& to, const Type& from);

std::string format_value(const Value& v, const Type& t);

}  // namespace couplecheck
