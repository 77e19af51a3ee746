#include "opnkit/bang.hpp"
#include "opnkit/errors.hpp"

#include <algorithm>

namespace opnkit {
namespace {

std::vector<unsigned long> divisors_of(unsigned long n) {
  std::vector<unsigned long> out;
  for (unsigned long d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    out.push_back(d);
    if (d != n / d) out.push_back(n / d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<unsigned long> prime_divisors_of(unsigned long n) {
  std::vector<unsigned long> out;
  for (unsigned long d = 2; d * d <= n; ++d) {
    if (n % d) continue;
    out.push_back(d);
    while (n % d == 0) n /= d;
  }
  if (n > 1) out.push_back(n);
  return out;
}

void require_odd_prime(const Natural& p, const char* what) {
  if (p == 2 || !is_prime(p)) throw DomainError(std::string(what) + " must be an odd prime, got " + p.get_str());
}

}  // namespace

Natural primitive_part(const Natural& a, unsigned long n) {
  if (a < 2) throw DomainError("primitive_part: a must be >= 2");
  if (n < 1) throw DomainError("primitive_part: n must be >= 1");
  Natural rest = pow(a, n) - 1;
  for (unsigned long r : prime_divisors_of(n)) {
    const Natural shared = pow(a, n / r) - 1;
    for (;;) {
      const Natural g = gcd(rest, shared);
      if (g == 1) break;
      rest /= g;
    }
  }
  return rest;
}

BangWitness primitive_prime_divisors(const Natural& a, unsigned long n) {
  return primitive_prime_divisors(a, n, default_factor_options());
}

BangWitness primitive_prime_divisors(const Natural& a, unsigned long n, const FactorOptions& options) {
  if (a < 2) throw DomainError("primitive_prime_divisors: a must be >= 2");
  if (n < 2) throw DomainError("primitive_prime_divisors: n must be >= 2");

  BangWitness w;
  w.a = a;
  w.n = n;
  const Natural value = pow(a, n) - 1;
  w.value_bits = mpz_sizeinbase(value.get_mpz_t(), 2);
  const Natural part = primitive_part(a, n);
  w.primitive_part_bits = mpz_sizeinbase(part.get_mpz_t(), 2);

  // Primes of the primitive part are 1 mod n, apart from at most one prime
  // dividing n, so 2n divides p - 1 for the ones that need splitting.
  FactorOptions hinted = options;
  hinted.p_minus_1_hint = lcm(hinted.p_minus_1_hint, Natural(2 * n));
  Factorization f;
  try {
    f = factorize(part, hinted);
  } catch (const RefusalError& e) {
    throw RefusalError("primitive_prime_divisors(" + a.get_str() + ", " + std::to_string(n) + "): " + e.what());
  }

  // Confirm primitivity directly against every proper divisor m of n.
  const auto divisors = divisors_of(n);
  for (const auto& [prime, e] : f.pairs()) {
    if (value % prime != 0) throw InconsistencyError("primitive part has a prime not dividing a^n - 1");
    for (unsigned long m : divisors) {
      if (m == n) continue;
      if (powm(a, Natural(m), prime) == 1) {
        throw InconsistencyError(prime.get_str() + " divides a^" + std::to_string(m) + " - 1 but survived stripping");
      }
    }
    w.primitive_primes.push_back(prime);
  }
  w.exists = !w.primitive_primes.empty();
  return w;
}

std::string to_string(ZBranch branch) {
  return branch == ZBranch::congruent ? "congruent-case" : "order-case";
}

ZBranch z_prime_power_branch(const Natural& p, const Natural& r) {
  return p % r == 1 ? ZBranch::congruent : ZBranch::order;
}

Natural z_prime_power(const Natural& p, const Natural& r, unsigned long delta) {
  require_odd_prime(p, "z_prime_power: p");
  if (!is_prime(r)) throw DomainError("z_prime_power: r must be prime, got " + r.get_str());
  if (delta < 1) throw DomainError("z_prime_power: delta must be >= 1");
  if (p == r) throw DomainError("z_prime_power: p = r, the order is undefined");
  const Natural rd = pow(r, delta);
  if (z_prime_power_branch(p, r) == ZBranch::congruent) return rd;
  return mult_order(p, rd, Factorization({{r, Natural(delta)}}));
}

ZOrderSpec z_composite(const Natural& p, const Natural& m) {
  require_odd_prime(p, "z_composite: p");
  if (m < 1) throw DomainError("z_composite: m must be >= 1");
  if (gcd(p, m) != 1) throw DomainError("z_composite: gcd(p, m) != 1");

  ZOrderSpec spec;
  spec.p = p;
  spec.m = m;
  spec.z_value = 1;
  for (const auto& [r, e] : factorize(m).pairs()) {
    ZPrimePowerTerm term;
    term.r = r;
    term.delta = to_ulong_checked(e, "delta");
    term.prime_power = pow(r, term.delta);
    term.z = z_prime_power(p, r, term.delta);
    term.branch = z_prime_power_branch(p, r);
    spec.z_value = lcm(spec.z_value, term.z);
    spec.per_prime_power.push_back(std::move(term));
  }
  return spec;
}

void validate(const RepunitSolution& sol) {
  require_odd_prime(sol.p, "repunit solution p");
  require_odd_prime(sol.q, "repunit solution q");
  if (sol.lambda < 1) throw DomainError("repunit solution lambda must be >= 1");
  if (sol.m < 1) throw DomainError("repunit solution m must be >= 1");
  if (sol.m % sol.q == 0) throw DomainError("repunit solution requires gcd(m, q) = 1");
  if (repunit(sol.p, sol.lambda + 1) != sol.m * pow(sol.q, sol.beta)) {
    throw DomainError("(" + sol.p.get_str() + "^" + std::to_string(sol.lambda + 1) + " - 1)/(" + sol.p.get_str() +
                      " - 1) != " + sol.m.get_str() + " * " + sol.q.get_str() + "^" + std::to_string(sol.beta));
  }
}

ExponentBoundVerdict exponent_bound_check(const RepunitSolution& sol) {
  validate(sol);
  ExponentBoundVerdict v;
  v.inequality = Natural(sol.lambda) + 1 <= sol.m * sol.m;
  if (sol.m < 2) {
    v.applicable = false;
    v.reason = "m < 2";
  } else if (sol.m % 4 == 0) {
    v.applicable = false;
    v.reason = "4 | m";
  } else {
    v.applicable = true;
    v.reason = "m >= 2, 4 does not divide m, p and q odd";
  }
  v.holds = !v.applicable || v.inequality;
  v.contradiction = v.applicable && !v.inequality;
  return v;
}

}  // namespace opnkit
