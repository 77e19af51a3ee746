#pragma once

#include "opnkit/arith.hpp"
#include "opnkit/bang.hpp"
#include "opnkit/log_bounds.hpp"

#include <optional>
#include <string>
#include <vector>

namespace opnkit {

struct Component {
  Natural p;
  unsigned long lambda = 0;

  friend bool operator==(const Component&, const Component&) = default;
};

/// A hypothetical odd perfect number N = q^alpha * prod p_i^lambda_i with a
/// designated special prime q.
struct OpnCandidate {
  Natural q;
  std::vector<Component> components;
  /// Caller-supplied exponent of q. When absent the value forced by
  /// perfectness (the sum of the beta_i) is used.
  std::optional<unsigned long> alpha;
  /// The components are the full list of primes other than q.
  bool complete = false;
};

/// Throws DomainError unless all primes are odd, pairwise distinct and
/// distinct from q, every lambda_i >= 1 and there is at least one component.
void validate(const OpnCandidate& c);

struct DecompositionEntry {
  Natural p;
  unsigned long lambda = 0;
  Natural m;  // cofactor of sigma(p^lambda) prime to q
  unsigned long beta = 0;

  friend bool operator==(const DecompositionEntry&, const DecompositionEntry&) = default;
};

/// sigma(p_i^lambda_i) = m_i q^beta_i for every component. Entries with
/// m_i >= 2 come first (indices 0..k-1, ordered by (beta, p)); pure entries
/// (m_i = 1) follow, ordered by p.
struct Decomposition {
  Natural q;
  std::vector<DecompositionEntry> entries;
  std::size_t k = 0;
  Natural m = 1;       // product of the m_i over bounded entries
  Natural M = 1;       // product of p_i^lambda_i over pure entries
  Natural Lambda = 1;  // lcm of lambda_i + 1 over bounded entries
  unsigned long alpha = 0;  // sum of all beta_i

  std::size_t s() const { return entries.size(); }
};

Decomposition decompose(const OpnCandidate& c);

/// The exponent actually used for q: the caller's alpha, or the forced one.
unsigned long effective_alpha(const OpnCandidate& c, const Decomposition& d);

// ---- index statistic --------------------------------------------------------

struct IndexReport {
  Natural N;
  Natural q;
  unsigned long alpha = 0;
  ExactRational value;  // sigma(N / q^alpha) / q^alpha
  bool is_integer = false;
  bool divides_2N = false;
  bool is_perfect_input = false;
};

/// q prime dividing N. Throws DomainError otherwise.
IndexReport index_statistic(const Natural& N, const Natural& q);

/// sigma(N / q^alpha) / q^alpha computed directly, against m q^(sum beta - alpha)
/// from the decomposition.
bool index_identity_check(const OpnCandidate& c);

/// p_i^Lambda = 1 (mod q^beta_i) for every bounded entry with beta_i >= 1.
bool lambda_congruence_check(const Decomposition& d);

// ---- bounds -----------------------------------------------------------------

/// log2 of base^exponent, with the exponent exact and log2(base) enclosed.
struct Log2Power {
  Natural base;
  Natural exponent;
  RationalInterval log2_value;
};

enum class BetaBoundBranch { q_divides_m, four_divides_m, bounds, no_bounded_entries };

std::string to_string(BetaBoundBranch b);

struct BetaBoundCheck {
  std::size_t index = 0;  // 1-based position among bounded entries
  Natural p;
  unsigned long beta = 0;
  RationalInterval log2_q_power;  // beta * log2(q)
  Log2Power bound;                 // (2Mqm)^((m^2+1)^i)
  Log2Power small_index_bound;     // (20Mq)^(25^i)
  Certainty below_bound = Certainty::undecided;
};

struct BetaBounds {
  BetaBoundBranch branch = BetaBoundBranch::bounds;
  std::vector<BetaBoundCheck> checks;
  /// Structural preconditions of the nonvanishing step.
  bool four_divides_2M_q_minus_1 = false;
  bool four_divides_m = false;
};

/// Bounds q^beta_i < (2Mqm)^((m^2+1)^i) for the bounded entries, in log2
/// space. Requires k >= 1.
BetaBounds beta_bounds(const Decomposition& d);

struct AlphaLowerBound {
  Natural required_divisor;  // prod over pure entries of p^(lambda-1)
  Natural floor;             // ceil(sqrt(M))
};

AlphaLowerBound alpha_lower_bound(const Decomposition& d);

/// log2 of 4^(4^(s+1)), i.e. 2 * 4^(s+1).
Natural heath_brown_bound(unsigned long s);

/// (sqrt(M) - 27) ln 3 < 26 ln(20 M), decided with rigorous enclosures.
bool m_threshold_predicate(const Natural& M);

/// Largest M satisfying m_threshold_predicate, found by bisection. Throws
/// InconsistencyError if it is not below 2 * 10^5.
Natural m_threshold_solver();

struct BoundReport {
  BetaBounds beta;
  Natural heath_brown_log2;
  AlphaLowerBound alpha_floor;
  Natural m_threshold;
};

/// All bound machinery for one candidate; beta bounds are reported with
/// branch no_bounded_entries when k = 0.
BoundReport bound_report(const Decomposition& d);

// ---- small-index chain --------------------------------------------------------

struct ChainStep {
  std::string name;
  std::string detail;
  bool contradiction = false;
};

struct QClassification {
  bool forced_q_in_3_5 = false;
  /// q > 5 and the chain reached a contradiction.
  bool rejected = false;
  Natural M_bound_used;
  std::vector<ChainStep> chain_trace;
};

/// Replays the argument forcing q in {3, 5} when the index m is at most 5.
/// Throws DomainError for m > 5.
QClassification small_index_q_classifier(const Decomposition& d);

// ---- sieve ------------------------------------------------------------------

struct Violation {
  std::string constraint_id;
  std::string detail;
  std::string anchor;
};

struct ViolationReport {
  bool violated = false;
  std::vector<Violation> violations;
};

struct SieveConfig {
  unsigned long min_s = 8;
  std::optional<Natural> K;
};

/// Runs every necessary condition against the candidate. Findings go into
/// the report; InconsistencyError is raised only when a proven fact fails.
ViolationReport candidate_check(const OpnCandidate& c, const SieveConfig& config = {});

}  // namespace opnkit
