#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace hail {

using Rational = boost::multiprecision::cpp_rational;

/// The exact rational a double's shortest round-trip spelling denotes
/// (0.7 -> 7/10, not the binary value 0.6999999999999999555...).
Rational decimal_rational(double v);

/// Smallest-denominator fraction (denominator up to `max_denominator`) that
/// rounds to exactly v, so a printed 5/12 reads back as 5/12. Falls back to
/// decimal_rational when no such fraction exists.
Rational simplest_fraction(double v, long max_denominator = 1L << 24);

/// 1 - v evaluated on the decimal spelling of v, rounded once to double.
/// decimal_complement(0.7) == 0.3, whereas 1.0 - 0.7 == 0.30000000000000004.
double decimal_complement(double v);

}  // namespace hail
