// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include "opnkit/arith.hpp"
#include "opnkit/bang.hpp"
#include "opnkit/canonical_json.hpp"
#include "opnkit/diophantine.hpp"
#include "opnkit/errors.hpp"
#include "opnkit/opn_model.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>

using namespace opnkit;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= limit_seconds) {
    r.ok = false;
    r.detail += " (over time limit)";
  }
  if (!r.ok) ++failures;
  std::printf("%s %2d %-34s %8.2fs / %.0fs  %s\n", r.ok ? "PASS" : "FAIL", id, name, secs, limit_seconds,
              r.detail.c_str());
  std::fflush(stdout);
}

// The same brute-force divisor sum as divisor_sum_naive, kept separate so the
// comparison does not share code with the library.
std::uint64_t oracle_sigma(std::uint64_t n) {
  std::uint64_t s = 0;
  for (std::uint64_t d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      s += d;
      if (d * d != n) s += n / d;
    }
  }
  return s;
}

// ord_p(a) = n, from a^n = 1 and a^(n/r) != 1 for each prime r | n.
bool order_is(unsigned long a, unsigned long n, const Natural& p) {
  if (powm(Natural(a), Natural(n), p) != 1) return false;
  for (const auto& [r, e] : factorize(Natural(n)).pairs()) {
    if (powm(Natural(a), Natural(n) / r, p) == 1) return false;
  }
  return true;
}

Outcome even_perfect_table() {
  for (unsigned long p : {2UL, 3UL, 5UL, 7UL, 13UL, 17UL, 19UL, 31UL}) {
    const Natural mersenne = pow(Natural(2), p) - 1;
    const Natural N = pow(Natural(2), p - 1) * mersenne;
    const auto at2 = index_statistic(N, 2);
    const auto atm = index_statistic(N, mersenne);
    if (at2.value.to_string() != "2" || atm.value.to_string() != "1")
      return {false, "p = " + std::to_string(p) + ": " + at2.value.to_string() + ", " + atm.value.to_string()};
  }
  return {true, "8 exponents"};
}

Outcome sigma_oracle() {
  for (std::uint64_t n = 1; n <= 100'000; ++n) {
    const Natural s = sigma(factorize(Natural(n)));
    if (s != Natural(std::to_string(oracle_sigma(n))) || s != divisor_sum_naive(Natural(n)))
      return {false, "n = " + std::to_string(n)};
  }
  return {true, "n <= 100000"};
}

Outcome bang_suite() {
  unsigned checked = 0, refused = 0;
  for (unsigned long a = 2; a <= 30; ++a) {
    for (unsigned long n = 7; n <= 60; ++n) {
      BangWitness w;
      try {
        w = primitive_prime_divisors(a, n);
      } catch (const RefusalError&) {
        ++refused;
        continue;
      }
      ++checked;
      if (!w.exists || w.primitive_primes.empty())
        return {false, "no primitive prime for (" + std::to_string(a) + ", " + std::to_string(n) + ")"};
      for (const auto& p : w.primitive_primes) {
        if (p % n != 1 || !is_prime(p) || !order_is(a, n, p))
          return {false, "bad prime " + p.get_str() + " for (" + std::to_string(a) + ", " + std::to_string(n) + ")"};
      }
    }
  }
  const auto w26 = primitive_prime_divisors(2, 6);
  if (w26.exists || !w26.primitive_primes.empty()) return {false, "(2, 6) has a primitive prime"};
  return {true, std::to_string(checked) + " pairs checked, " + std::to_string(refused) +
                    " outside the factoring budget, (2, 6) has none"};
}

Outcome exponent_bound_sweep() {
  unsigned long solutions = 0, violations = 0;
  for (unsigned long m = 2; m <= 50; ++m) {
    if (m % 4 == 0) continue;
    for (const auto& s : solve_repunit_mq(Natural(m), {500, 49})) {
      if (s.q > 500) continue;
      ++solutions;
      validate(s);
      const auto v = exponent_bound_check(s);
      if (!v.applicable || !v.holds || Natural(s.lambda + 1) > Natural(m * m)) ++violations;
    }
  }
  return {violations == 0, std::to_string(solutions) + " solutions, " + std::to_string(violations) + " violations"};
}

std::vector<RefutationCertificate> terminal_refutations(const Natural& p_bound) {
  std::vector<RefutationCertificate> out;
  for (auto [lambda, q] : {std::pair{2UL, 3UL}, {4UL, 3UL}, {2UL, 5UL}, {4UL, 5UL}})
    out.push_back(refute_prime_power_eq(lambda, q, p_bound));
  out.push_back(refute_prime_power_eq(4, 5, p_bound, PowerReading::square_base));
  return out;
}

Outcome terminal_equations() {
  std::string caps;
  for (const auto& c : terminal_refutations(1'000'000)) {
    caps += " " + std::to_string(c.lambda) + "/" + c.q.get_str() + (c.reading == PowerReading::square_base ? "sq" : "") +
            ":" + std::to_string(c.beta_cap);
    if (c.conclusion != RefutationConclusion::no_solutions || !c.capped || c.beta_cap > 1 ||
        !c.direct_sweep.solutions.empty() || c.direct_sweep.p_bound != 1'000'000 ||
        c.direct_sweep.max_valuation > c.beta_cap)
      return {false, "lambda = " + std::to_string(c.lambda) + ", q = " + c.q.get_str()};
  }
  return {true, "beta caps" + caps + ", swept p <= 10^6"};
}

Outcome threshold() {
  const Natural a = m_threshold_solver();
  const Natural b = m_threshold_solver();
  const bool ok = a == b && a < 200'000 && a > 100'000 && m_threshold_predicate(a) && !m_threshold_predicate(a + 1);
  return {ok, "M = " + a.get_str()};
}

Outcome pure_component() {
  const auto sols = solve_repunit_mq(1, {10, 6});
  const RepunitSolution target{3, 4, 1, 11, 2};
  if (std::find(sols.begin(), sols.end(), target) == sols.end()) return {false, "(3, 4, 11, 2) not found"};
  if (pure_component_alpha_modulus(target) != 27) return {false, "modulus != 27"};
  unsigned long hits = 0, mismatches = 0;
  const Natural p_lambda = pow(Natural(3), 4);
  for (unsigned long alpha = 0; alpha + 1 <= 10'000; ++alpha) {
    const bool holds = pure_component_condition_holds(target, 11, alpha);
    const bool direct = repunit(Natural(11), alpha + 1) % p_lambda == 0;
    if (holds != direct || (holds && (alpha + 1) % 27 != 0)) ++mismatches;
    if (holds) ++hits;
  }
  return {mismatches == 0 && hits > 0,
          std::to_string(hits) + " alphas hit, all with 27 | alpha + 1, " + std::to_string(mismatches) + " mismatches"};
}

Outcome bounded_search() {
  const auto none = bounded_prime_power_search({5, 4, 10'000});
  if (!none.exhaustive || !none.solutions.empty()) return {false, "K = 5 box not clean"};
  const auto some = bounded_prime_power_search({13, 4, 10'000});
  const RepunitSolution want{3, 2, 1, 13, 1};
  if (std::find(some.solutions.begin(), some.solutions.end(), want) == some.solutions.end())
    return {false, "K = 13 misses (3, 2, 13, 1)"};
  return {true, "K = 5: " + std::to_string(none.cells_enumerated) + " cells, 0 solutions; K = 13: " +
                    std::to_string(some.solutions.size()) + " solutions"};
}

Outcome heath_brown() {
  for (unsigned long s : {0UL, 1UL, 8UL}) {
    if (heath_brown_bound(s) != 2 * pow(Natural(4), s + 1)) return {false, "s = " + std::to_string(s)};
  }
  return {true, "s in {0, 1, 8}"};
}

Outcome sieve_smoke() {
  std::mt19937_64 rng(20261019);
  const auto primes = primes_up_to(200);
  std::vector<unsigned long> odd(primes.begin() + 1, primes.end());
  unsigned long violated = 0, anchorless = 0;
  for (int i = 0; i < 1000; ++i) {
    std::shuffle(odd.begin(), odd.end(), rng);
    OpnCandidate c;
    c.q = odd[0];
    const std::size_t count = 1 + rng() % 8;
    for (std::size_t j = 1; j <= count; ++j) c.components.push_back({odd[j], 1 + rng() % 6});
    if (rng() % 2) c.alpha = 1 + rng() % 12;
    c.complete = rng() % 4 == 0;
    SieveConfig cfg;
    cfg.min_s = 1 + rng() % 9;
    const auto report = candidate_check(c, cfg);  // InconsistencyError propagates as a failure
    if (report.violated) ++violated;
    for (const auto& v : report.violations)
      if (v.anchor.empty()) ++anchorless;
  }
  return {anchorless == 0, "1000 candidates, " + std::to_string(violated) + " rejected, " +
                               std::to_string(anchorless) + " findings without an anchor"};
}

Outcome determinism() {
  const unsigned n = std::max(4U, std::thread::hardware_concurrency());
  std::string first, second;
  for (const auto& c : terminal_refutations(1'000'000)) first += canonical_dump(encode(c));
  for (const auto& c : terminal_refutations(1'000'000)) second += canonical_dump(encode(c));
  if (first != second) return {false, "refutation payloads differ"};
  for (const SearchBox& box : {SearchBox{5, 4, 10'000}, SearchBox{13, 4, 10'000}}) {
    const auto one = canonical_dump(encode(bounded_prime_power_search(box, 1)));
    const auto many = canonical_dump(encode(bounded_prime_power_search(box, n)));
    if (one != many) return {false, "search payloads differ at K = " + box.K.get_str()};
  }
  return {true, "1 vs " + std::to_string(n) + " workers, digests identical"};
}

}  // namespace

int main() {
  criterion(1, "even-perfect index table", 1, even_perfect_table);
  criterion(2, "sigma against divisor-sum oracle", 30, sigma_oracle);
  criterion(3, "primitive prime divisors", 120, bang_suite);
  criterion(4, "exponent bound sweep", 120, exponent_bound_sweep);
  criterion(5, "terminal equation refutation", 60, terminal_equations);
  criterion(6, "M threshold", 1, threshold);
  criterion(7, "pure component alpha condition", 60, pure_component);
  criterion(8, "bounded prime-power search", 60, bounded_search);
  criterion(9, "Heath-Brown bound", 1, heath_brown);
  criterion(10, "sieve smoke test", 120, sieve_smoke);
  criterion(11, "determinism", 120, determinism);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
