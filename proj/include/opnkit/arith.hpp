#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace opnkit {

/// Arbitrary-precision nonnegative integer. Every quantity in the toolkit is
/// carried exactly; nothing in this header rounds.
using Natural = mpz_class;

struct PrimePower {
  Natural prime;
  Natural exponent;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Canonical factorization: primes strictly increasing, exponents >= 1.
/// The empty sequence represents 1.
class Factorization {
 public:
  Factorization() = default;

  /// Validates the canonical-form invariants (sorted, prime, exponent >= 1).
  explicit Factorization(std::vector<PrimePower> pairs);

  const std::vector<PrimePower>& pairs() const& { return pairs_; }
  std::vector<PrimePower> pairs() && { return std::move(pairs_); }
  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }

  Natural value() const;

  friend bool operator==(const Factorization&, const Factorization&) = default;

 private:
  std::vector<PrimePower> pairs_;
};

/// numerator/denominator in lowest terms, denominator >= 1.
class ExactRational {
 public:
  ExactRational() = default;
  ExactRational(const Natural& numerator, const Natural& denominator);

  const Natural& numerator() const { return num_; }
  const Natural& denominator() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  mpq_class to_mpq() const;
  /// "n" when integral, otherwise "n/d".
  std::string to_string() const;

  friend bool operator==(const ExactRational&, const ExactRational&) = default;

 private:
  Natural num_ = 0;
  Natural den_ = 1;
};

// ---- primality and factoring -------------------------------------------------

/// Deterministic Miller-Rabin below 3.3e24 (prime bases 2..41); above that
/// range GMP's BPSW test, which is deterministic run-to-run.
bool is_prime(const Natural& n);

/// Odd primes (and 2) up to `limit`, sieved.
std::vector<std::uint32_t> primes_up_to(std::uint32_t limit);

struct EcmTier {
  std::uint32_t b1;
  unsigned curves;
};

struct FactorOptions {
  /// Composite cofactors left after trial division larger than this are
  /// refused rather than attacked.
  unsigned cofactor_bit_budget = 256;
  std::uint32_t trial_division_cutoff = 1'000'000;
  /// Known divisor of p - 1 for every prime p sought (e.g. n for the
  /// primitive part of a^n - 1). Folded into the p - 1 stage.
  Natural p_minus_1_hint = 1;
  /// ECM curves run after rho and p - 1, in order; B2 = 100 * B1.
  std::vector<EcmTier> ecm_schedule = {{2'000, 25}, {11'000, 90}};
};

/// Default options, with OPNKIT_BIT_BUDGET (if set) overriding the budget.
FactorOptions default_factor_options();

/// Throws DomainError for n = 0 and RefusalError when the budget is exceeded
/// or the rho/ECM effort runs out before a cofactor splits.
Factorization factorize(const Natural& n);
Factorization factorize(const Natural& n, const FactorOptions& options);

// ---- divisor sums -----------------------------------------------------------

Natural sigma(const Factorization& f);
/// sigma(p^e) = 1 + p + ... + p^e.
Natural sigma_prime_power(const Natural& p, unsigned long e);

inline constexpr std::uint64_t kNaiveDivisorSumCap = 10'000'000;

/// Direct divisor enumeration. Test oracle only; refuses n above `cap`.
Natural divisor_sum_naive(const Natural& n, std::uint64_t cap = kNaiveDivisorSumCap);

bool is_perfect(const Natural& n);

// ---- structured integers ----------------------------------------------------

/// u_n(p) = 1 + p + ... + p^(n-1).
Natural repunit(const Natural& p, unsigned long n);

/// Least e >= 1 with p^e = 1 (mod n).
Natural mult_order(const Natural& p, const Natural& n);
/// Same, reusing a known factorization of n.
Natural mult_order(const Natural& p, const Natural& n, const Factorization& n_factors);

Natural largest_prime_factor(const Natural& t);

/// Largest e with p^e | n. Requires p prime (checked) and n >= 1.
unsigned long valuation(const Natural& p, const Natural& n);

/// Euler totient from a factorization.
Natural euler_phi(const Factorization& f);

Natural lcm(const Natural& a, const Natural& b);
Natural gcd(const Natural& a, const Natural& b);
Natural pow(const Natural& base, unsigned long exponent);
Natural powm(const Natural& base, const Natural& exponent, const Natural& modulus);

/// Largest r with r^2 <= n.
Natural isqrt(const Natural& n);
/// Smallest r with r^2 >= n.
Natural isqrt_ceil(const Natural& n);

/// Parses a decimal string; throws DomainError on anything else.
Natural parse_natural(const std::string& text);
unsigned long to_ulong_checked(const Natural& n, const char* what);

}  // namespace opnkit
