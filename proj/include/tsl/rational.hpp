#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace tsl {

using Rational = mpq_class;

/// Parses "p/q" or an integer literal; the result is canonicalized.
/// Throws ValidationError on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& r);

double to_double(const Rational& r);

} // namespace tsl
