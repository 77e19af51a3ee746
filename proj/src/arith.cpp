#include "opnkit/arith.hpp"
#include "opnkit/errors.hpp"

#include <algorithm>
#include <climits>

namespace opnkit {

Factorization::Factorization(std::vector<PrimePower> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& pp = pairs_[i];
    if (pp.exponent < 1) throw DomainError("factorization exponent must be >= 1");
    if (i > 0 && !(pairs_[i - 1].prime < pp.prime)) {
      throw DomainError("factorization primes must be strictly increasing");
    }
    if (!is_prime(pp.prime)) throw DomainError("factorization entry " + pp.prime.get_str() + " is not prime");
  }
}

Natural Factorization::value() const {
  Natural v = 1;
  for (const auto& [p, e] : pairs_) v *= pow(p, to_ulong_checked(e, "exponent"));
  return v;
}

ExactRational::ExactRational(const Natural& numerator, const Natural& denominator) {
  if (denominator < 1) throw DomainError("rational denominator must be >= 1");
  if (numerator < 0) throw DomainError("rational numerator must be >= 0");
  const Natural g = gcd(numerator, denominator);
  num_ = numerator / g;
  den_ = denominator / g;
  if (num_ == 0) den_ = 1;
}

mpq_class ExactRational::to_mpq() const { return mpq_class(num_, den_); }

std::string ExactRational::to_string() const {
  if (den_ == 1) return num_.get_str();
  return num_.get_str() + "/" + den_.get_str();
}

Natural gcd(const Natural& a, const Natural& b) {
  Natural g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

Natural lcm(const Natural& a, const Natural& b) {
  Natural l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

Natural pow(const Natural& base, unsigned long exponent) {
  Natural r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exponent);
  return r;
}

Natural powm(const Natural& base, const Natural& exponent, const Natural& modulus) {
  Natural r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exponent.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

Natural isqrt(const Natural& n) {
  if (n < 0) throw DomainError("isqrt of a negative value");
  Natural r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

Natural isqrt_ceil(const Natural& n) {
  Natural r = isqrt(n);
  if (r * r < n) ++r;
  return r;
}

unsigned long to_ulong_checked(const Natural& n, const char* what) {
  if (n < 0 || !n.fits_ulong_p()) {
    throw DomainError(std::string(what) + " is out of range: " + n.get_str());
  }
  return n.get_ui();
}

Natural parse_natural(const std::string& text) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw DomainError("expected a nonnegative decimal integer, got '" + text + "'");
  }
  return Natural(text, 10);
}

Natural sigma_prime_power(const Natural& p, unsigned long e) {
  if (e == ULONG_MAX) throw DomainError("sigma_prime_power: exponent too large");
  return repunit(p, e + 1);
}

Natural sigma(const Factorization& f) {
  Natural s = 1;
  for (const auto& [p, e] : f.pairs()) s *= sigma_prime_power(p, to_ulong_checked(e, "exponent"));
  return s;
}

Natural divisor_sum_naive(const Natural& n, std::uint64_t cap) {
  if (n < 1) throw DomainError("divisor_sum_naive: n must be >= 1");
  if (n > cap) {
    throw RefusalError("divisor_sum_naive is a test oracle capped at " + std::to_string(cap) + "; got " + n.get_str());
  }
  const std::uint64_t v = n.get_ui();
  std::uint64_t total = 0;
  for (std::uint64_t d = 1; d * d <= v; ++d) {
    if (v % d == 0) total += d * d == v ? d : d + v / d;
  }
  return Natural(static_cast<unsigned long>(total));
}

bool is_perfect(const Natural& n) {
  if (n < 1) throw DomainError("is_perfect: n must be >= 1");
  return sigma(factorize(n)) == 2 * n;
}

Natural repunit(const Natural& p, unsigned long n) {
  if (p <= 1) throw DomainError("repunit: base must be >= 2");
  if (n < 1) throw DomainError("repunit: length must be >= 1");
  Natural r = (pow(p, n) - 1) / (p - 1);
  return r;
}

Natural euler_phi(const Factorization& f) {
  Natural phi = 1;
  for (const auto& [p, e] : f.pairs()) phi *= pow(p, to_ulong_checked(e, "exponent") - 1) * (p - 1);
  return phi;
}

Natural mult_order(const Natural& p, const Natural& n) {
  if (n < 2) throw DomainError("mult_order: modulus must be >= 2");
  return mult_order(p, n, factorize(n));
}

Natural mult_order(const Natural& p, const Natural& n, const Factorization& n_factors) {
  if (n < 2) throw DomainError("mult_order: modulus must be >= 2");
  if (gcd(p, n) != 1) {
    throw DomainError("mult_order: gcd(" + p.get_str() + ", " + n.get_str() + ") != 1");
  }
  const Natural base = ((p % n) + n) % n;
  // Start from phi(n) and strip prime factors while p^(e/r) stays 1.
  Natural e = euler_phi(n_factors);
  const Factorization phi_factors = factorize(e);
  for (const auto& [r, k] : phi_factors.pairs()) {
    for (unsigned long i = 0; i < to_ulong_checked(k, "exponent"); ++i) {
      const Natural candidate = e / r;
      if (powm(base, candidate, n) == 1) {
        e = candidate;
      } else {
        break;
      }
    }
  }
  // Post-condition: p^e = 1 and p^(e/r) != 1 for every prime r | e.
  if (powm(base, e, n) != 1) throw InconsistencyError("mult_order: p^e != 1");
  const Factorization e_factors = factorize(e);
  for (const auto& [r, k] : e_factors.pairs()) {
    if (powm(base, e / r, n) == 1) throw InconsistencyError("mult_order: order is not minimal");
  }
  return e;
}

Natural largest_prime_factor(const Natural& t) {
  if (t <= 1) throw DomainError("largest_prime_factor: t must be >= 2");
  return factorize(t).pairs().back().prime;
}

unsigned long valuation(const Natural& p, const Natural& n) {
  if (n < 1) throw DomainError("valuation: n must be >= 1");
  if (!is_prime(p)) throw DomainError("valuation: " + p.get_str() + " is not prime");
  Natural rest = n;
  return mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
}

}  // namespace opnkit
