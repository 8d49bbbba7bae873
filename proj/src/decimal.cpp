#include "hail/decimal.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>

#include "hail/errors.hpp"

namespace hail {

Rational decimal_rational(double v) {
    require(std::isfinite(v), "decimal_rational: value must be finite");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific);
    const std::string s(buf, res.ptr);
    const auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    const int exponent = std::stoi(s.substr(e + 1));
    const bool negative = !mantissa.empty() && mantissa[0] == '-';
    if (negative) mantissa.erase(0, 1);
    int frac_digits = 0;
    if (const auto dot = mantissa.find('.'); dot != std::string::npos) {
        frac_digits = static_cast<int>(mantissa.size() - dot - 1);
        mantissa.erase(dot, 1);
    }
    using boost::multiprecision::cpp_int;
    cpp_int num(mantissa);
    if (negative) num = -num;
    const int shift = exponent - frac_digits;
    const cpp_int ten_pow = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::abs(shift)));
    return shift >= 0 ? Rational(num * ten_pow) : Rational(num, ten_pow);
}

Rational simplest_fraction(double v, long max_denominator) {
    require(std::isfinite(v), "simplest_fraction: value must be finite");
    if (v < 0) return -simplest_fraction(-v, max_denominator);
    using boost::multiprecision::cpp_int;
    // continued-fraction convergents of the exact binary value
    Rational x(v);
    cpp_int h_prev = 0, h = 1, k_prev = 1, k = 0;
    for (;;) {
        const cpp_int a = boost::multiprecision::numerator(x) / boost::multiprecision::denominator(x);
        const cpp_int h_next = a * h + h_prev, k_next = a * k + k_prev;
        if (k_next > max_denominator) break;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        const Rational candidate(h, k);
        if (candidate.convert_to<double>() == v) return candidate;
        const Rational rest = x - Rational(a);
        if (rest == 0) break;
        x = 1 / rest;
    }
    return decimal_rational(v);
}

double decimal_complement(double v) { return Rational(1 - decimal_rational(v)).convert_to<double>(); }

}  // namespace hail
