#pragma once

#include "opnkit/arith.hpp"
#include "opnkit/bang.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace opnkit {

/// (q, beta) with c = q^beta, q prime, beta >= 1; nullopt otherwise.
std::optional<std::pair<Natural, unsigned long>> as_prime_power(const Natural& c);

struct RepunitBounds {
  Natural p_max;
  unsigned long lambda_max = 0;
};

/// Every (p, lambda, q, beta) with p <= p_max an odd prime,
/// 1 <= lambda <= lambda_max and repunit(p, lambda + 1) = m q^beta where q is
/// an odd prime not dividing m and beta >= 1. Sorted by (p, lambda).
std::vector<RepunitSolution> solve_repunit_mq(const Natural& m, const RepunitBounds& bounds);

/// How the right-hand side q^beta is read. `square_base` is (q^2)^beta,
/// i.e. only even q-adic exponents are admissible.
enum class PowerReading { prime_power, square_base };

std::string to_string(PowerReading reading);

struct ResidueRow {
  Natural residue;             // p mod q^2
  unsigned long valuation = 0;  // q-adic valuation of repunit(p, lambda+1) fixed by the class
  bool undetermined = false;   // q^2 divides the class value; valuation could be >= 2
};

struct ResidualCheck {
  unsigned long beta = 0;  // exponent in the chosen reading
  Natural target;          // the right-hand side value
  bool eliminated = true;
  std::string outcome;
  std::optional<Natural> solution_p;
};

struct DirectSweep {
  Natural p_bound;
  unsigned long primes_checked = 0;
  unsigned long max_valuation = 0;
  std::vector<Natural> solutions;
};

enum class RefutationConclusion { no_solutions, solutions_listed, inconclusive };

std::string to_string(RefutationConclusion c);

/// Residue-class proof that 1 + p + ... + p^lambda = q^beta has no prime
/// solutions, cross-checked by a direct sweep of primes p <= p_search_bound.
struct RefutationCertificate {
  unsigned long lambda = 0;
  Natural q;
  PowerReading reading = PowerReading::prime_power;
  /// Largest q-adic valuation any residue class allows. Meaningless when
  /// `capped` is false.
  unsigned long beta_cap = 0;
  bool capped = true;
  std::vector<ResidueRow> residue_table;
  std::vector<ResidualCheck> residual_checks;
  DirectSweep direct_sweep;
  RefutationConclusion conclusion = RefutationConclusion::inconclusive;
};

/// lambda >= 1, q an odd prime. Throws DomainError for an even q.
RefutationCertificate refute_prime_power_eq(unsigned long lambda, const Natural& q, const Natural& p_search_bound,
                                            PowerReading reading = PowerReading::prime_power);

/// For a pure component (m = 1), the divisor p^(lambda-1) that alpha + 1 must
/// be a multiple of whenever p^lambda divides repunit(q, alpha + 1). Also
/// re-derives that p exactly divides q^beta - 1 and q^ord_p(q) - 1; a failure
/// there raises InconsistencyError.
Natural pure_component_alpha_modulus(const RepunitSolution& sol);

/// Whether p^lambda divides repunit(q, alpha + 1). When it does, asserts
/// p^(lambda-1) | alpha + 1 and raises InconsistencyError otherwise.
bool pure_component_condition_holds(const RepunitSolution& sol, const Natural& q, unsigned long alpha);

struct SearchBox {
  Natural K;
  unsigned long gamma = 0;
  Natural p_bound;

  friend bool operator==(const SearchBox&, const SearchBox&) = default;
};

struct SearchCertificate {
  SearchBox parameter_box;
  std::vector<RepunitSolution> solutions;  // m = 1 throughout
  bool exhaustive = false;
  unsigned long cells_enumerated = 0;
  std::string toolkit_version;
};

/// Enumerates every cell (q odd prime <= K, 2 <= lambda <= gamma, p odd prime
/// <= p_bound, p != q) and collects all solutions of repunit(p, lambda+1) =
/// q^beta. Work is split by q over `workers` threads; the result does not
/// depend on the worker count.
SearchCertificate bounded_prime_power_search(const SearchBox& box, unsigned workers = 1);

}  // namespace opnkit
