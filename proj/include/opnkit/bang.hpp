#pragma once

#include "opnkit/arith.hpp"

#include <string>
#include <vector>

namespace opnkit {

/// Primitive prime divisors of a^n - 1: primes dividing a^n - 1 and no
/// a^m - 1 with 1 <= m < n.
struct BangWitness {
  Natural a;
  unsigned long n = 0;
  std::vector<Natural> primitive_primes;  // increasing
  bool exists = false;
  /// Bits of a^n - 1 and of the primitive part that was actually factored.
  std::size_t value_bits = 0;
  std::size_t primitive_part_bits = 0;
};

/// Throws DomainError for a < 2 or n < 2, and RefusalError when the
/// primitive part of a^n - 1 cannot be factored within the bit budget.
BangWitness primitive_prime_divisors(const Natural& a, unsigned long n);
BangWitness primitive_prime_divisors(const Natural& a, unsigned long n, const FactorOptions& options);

/// The part of a^n - 1 composed exactly of its primitive primes (with
/// multiplicity), obtained by stripping every prime shared with a^(n/r) - 1
/// for each prime r | n.
Natural primitive_part(const Natural& a, unsigned long n);

enum class ZBranch { congruent, order };

std::string to_string(ZBranch branch);

struct ZPrimePowerTerm {
  Natural r;
  unsigned long delta = 0;
  Natural prime_power;  // r^delta
  Natural z;
  ZBranch branch = ZBranch::order;
};

/// z_p(m) together with its per-prime-power terms.
struct ZOrderSpec {
  Natural p;
  Natural m;
  Natural z_value;
  std::vector<ZPrimePowerTerm> per_prime_power;
};

/// r^delta when p = 1 (mod r), otherwise the multiplicative order of p
/// modulo r^delta. p must be an odd prime, r a prime distinct from p.
Natural z_prime_power(const Natural& p, const Natural& r, unsigned long delta);
ZBranch z_prime_power_branch(const Natural& p, const Natural& r);

/// lcm of z_p(r^delta) over r^delta || m; z_p(1) = 1.
ZOrderSpec z_composite(const Natural& p, const Natural& m);

/// A solution of (p^(lambda+1) - 1)/(p - 1) = m q^beta with gcd(m, q) = 1.
struct RepunitSolution {
  Natural p;
  unsigned long lambda = 0;
  Natural m;
  Natural q;
  unsigned long beta = 0;

  friend bool operator==(const RepunitSolution&, const RepunitSolution&) = default;
};

/// Throws DomainError unless the equation holds exactly with p, q odd primes
/// and gcd(m, q) = 1.
void validate(const RepunitSolution& sol);

struct ExponentBoundVerdict {
  bool applicable = false;
  /// Vacuously true when not applicable.
  bool holds = false;
  /// lambda + 1 <= m^2 evaluated regardless of applicability.
  bool inequality = false;
  /// applicable && !holds: the exponent bound failed where it is claimed.
  bool contradiction = false;
  std::string reason;
};

/// Checks lambda + 1 <= m^2. The bound is claimed only for m >= 2 with
/// 4 not dividing m (both primes odd); outside that range the verdict is
/// recorded as not applicable.
ExponentBoundVerdict exponent_bound_check(const RepunitSolution& sol);

}  // namespace opnkit
