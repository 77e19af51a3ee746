#pragma once

#include "opnkit/arith.hpp"

#include <gmpxx.h>

#include <string>

namespace opnkit {

/// A closed interval [lo, hi] of exact rationals enclosing a real quantity.
/// Endpoints come from MPFR results rounded outward, so they are dyadic and
/// the enclosure is rigorous.
struct RationalInterval {
  mpq_class lo;
  mpq_class hi;

  static RationalInterval exact(const mpq_class& v) { return {v, v}; }

  bool contains(const mpq_class& v) const { return lo <= v && v <= hi; }
};

RationalInterval operator+(const RationalInterval& a, const RationalInterval& b);
RationalInterval operator-(const RationalInterval& a, const RationalInterval& b);
RationalInterval operator*(const RationalInterval& a, const RationalInterval& b);
RationalInterval operator*(const Natural& k, const RationalInterval& a);

inline constexpr unsigned kDefaultLogPrecision = 128;

/// Enclosures of log2(x), ln(x) and sqrt(x) for x >= 1.
RationalInterval log2_interval(const Natural& x, unsigned precision = kDefaultLogPrecision);
RationalInterval ln_interval(const Natural& x, unsigned precision = kDefaultLogPrecision);
RationalInterval sqrt_interval(const Natural& x, unsigned precision = kDefaultLogPrecision);

enum class Certainty { yes, no, undecided };

/// a < b decided from the enclosures alone.
Certainty certainly_less(const RationalInterval& a, const RationalInterval& b);

/// "num/den" (or "num") for a rational.
std::string rational_string(const mpq_class& v);

/// Lossy, for human-facing summaries only.
double approx(const mpq_class& v);

}  // namespace opnkit
