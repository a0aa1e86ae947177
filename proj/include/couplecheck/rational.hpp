#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace couplecheck {

using Rational = mpq_class;
using BigInt = mpz_class;

// Accepts "p", "-p" and "p/q"; throws std::invalid_argument otherwise.
Rational parse_rational(std::string_view text);

// "n" for integers, "p/q" otherwise.
std::string to_string(const Rational& q);

Rational power(const Rational& base, unsigned exponent);

// for display only
double approx(const Rational& q);

}  // namespace couplecheck
