#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace reachkit {

// The only numeric scalar in the system. mpq_class keeps values canonical
// (gcd(|num|, den) = 1, den > 0) after every operation.
using Rational = mpq_class;
using RatVec = std::vector<Rational>;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Accepts "p", "-p", "p/q" with arbitrary-precision integers. No decimals.
Rational parse_rational(const std::string& text);

// "p" when the denominator is 1, else "p/q".
std::string to_string(const Rational& value);

// Bit length of the numerator plus bit length of the denominator
// (mpz_sizeinbase base 2; 0 counts as one bit).
std::size_t rational_bits(const Rational& value);

std::size_t vector_bits(const RatVec& values);

std::string to_string(const RatVec& values, const std::string& sep = ", ");

}  // namespace reachkit
