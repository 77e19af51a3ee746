#include "opnkit/errors.hpp"
#include "opnkit/opn_model.hpp"

#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

using namespace opnkit;

namespace {

OpnCandidate candidate(unsigned long q, std::vector<std::pair<unsigned long, unsigned long>> comps,
                       std::optional<unsigned long> alpha = std::nullopt) {
  OpnCandidate c;
  c.q = q;
  for (auto [p, l] : comps) c.components.push_back({p, l});
  c.alpha = alpha;
  return c;
}

// A decomposition assembled by hand, for bound formulas whose inputs cannot
// all come from one real candidate.
Decomposition synthetic(unsigned long q, unsigned long m, const Natural& M, std::size_t k, std::size_t pure) {
  Decomposition d;
  d.q = q;
  d.m = m;
  d.M = M;
  d.k = k;
  for (std::size_t i = 0; i < k; ++i) d.entries.push_back({Natural(1000 + i), 1, Natural(m), 1});
  for (std::size_t i = 0; i < pure; ++i) d.entries.push_back({Natural(2000 + i), 2, Natural(1), 1});
  return d;
}

Natural pow_nat(unsigned long b, unsigned long e) { return pow(Natural(b), e); }

}  // namespace

TEST_CASE("decompose examples") {
  const auto d1 = decompose(candidate(13, {{3, 2}}));
  REQUIRE(d1.entries.size() == 1);
  CHECK(d1.entries[0] == DecompositionEntry{3, 2, 1, 1});
  CHECK(d1.k == 0);
  CHECK(d1.M == 9);
  CHECK(d1.m == 1);
  CHECK(d1.Lambda == 1);
  CHECK(d1.alpha == 1);

  const auto d2 = decompose(candidate(3, {{5, 1}}));
  CHECK(d2.entries[0] == DecompositionEntry{5, 1, 2, 1});
  CHECK(d2.k == 1);
  CHECK(d2.M == 1);
  CHECK(d2.m == 2);
  CHECK(d2.Lambda == 2);
  CHECK(d2.alpha == 1);

  const auto d3 = decompose(candidate(3, {{7, 1}}));
  CHECK(d3.entries[0] == DecompositionEntry{7, 1, 8, 0});
  CHECK(d3.k == 1);
}

TEST_CASE("decompose orders bounded entries by beta then p") {
  // sigma(5) = 2*3, sigma(11) = 4*3, sigma(7) = 8, sigma(17) = 2*3^2.
  const auto d = decompose(candidate(3, {{17, 1}, {11, 1}, {7, 1}, {5, 1}}));
  REQUIRE(d.k == 4);
  CHECK(d.entries[0].p == 7);
  CHECK(d.entries[1].p == 5);
  CHECK(d.entries[2].p == 11);
  CHECK(d.entries[3].p == 17);
  CHECK(d.alpha == 4);
}

TEST_CASE("candidate validation") {
  CHECK_THROWS_AS(decompose(candidate(3, {{5, 1}, {5, 2}})), DomainError);
  CHECK_THROWS_AS(decompose(candidate(3, {{3, 1}})), DomainError);
  CHECK_THROWS_AS(decompose(candidate(2, {{5, 1}})), DomainError);
  CHECK_THROWS_AS(decompose(candidate(3, {{2, 1}})), DomainError);
  CHECK_THROWS_AS(decompose(candidate(3, {{9, 1}})), DomainError);
  CHECK_THROWS_AS(decompose(candidate(3, {{5, 0}})), DomainError);
  CHECK_THROWS_AS(decompose(candidate(3, {})), DomainError);
}

TEST_CASE("decomposition reproduces the product of sigma values") {
  std::mt19937 rng(7);
  const auto primes = primes_up_to(200);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::uint32_t> pool(primes.begin() + 1, primes.end());
    std::shuffle(pool.begin(), pool.end(), rng);
    const unsigned long q = pool[0];
    const std::size_t count = 1 + rng() % 6;
    std::vector<std::pair<unsigned long, unsigned long>> comps;
    Natural product = 1;
    for (std::size_t i = 1; i <= count; ++i) {
      const unsigned long lambda = 1 + rng() % 10;
      comps.emplace_back(pool[i], lambda);
      product *= sigma_prime_power(pool[i], lambda);
    }
    const auto d = decompose(candidate(q, comps));
    Natural rebuilt = 1;
    for (const auto& e : d.entries) {
      CHECK(e.m % q != 0);
      CHECK(sigma_prime_power(e.p, e.lambda) == e.m * pow(Natural(q), e.beta));
      rebuilt *= e.m;
    }
    CHECK(d.m * pow(Natural(q), d.alpha) == product);
    CHECK(rebuilt * pow(Natural(q), d.alpha) == product);

    bool all_applicable = d.k > 0;
    for (std::size_t i = 0; i < d.k; ++i) {
      all_applicable = all_applicable && d.entries[i].m % 4 != 0;
    }
    if (all_applicable) CHECK(d.Lambda <= d.m * d.m);
  }
}

TEST_CASE("index statistic") {
  const auto r1 = index_statistic(28, 2);
  CHECK(r1.value == ExactRational(2, 1));
  CHECK(r1.is_integer);
  CHECK(r1.divides_2N);
  CHECK(r1.is_perfect_input);
  CHECK(index_statistic(28, 7).value == ExactRational(1, 1));
  const auto r3 = index_statistic(15, 3);
  CHECK(r3.value == ExactRational(2, 1));
  CHECK_FALSE(r3.is_perfect_input);
  CHECK(index_statistic(12, 2).value == ExactRational(1, 1));
  CHECK(index_statistic(20, 2).value == ExactRational(3, 2));
  CHECK_THROWS_AS(index_statistic(28, 3), DomainError);
  CHECK_THROWS_AS(index_statistic(28, 4), DomainError);
}

TEST_CASE("index of every perfect number below 10^6 is an integer divisor of 2N") {
  constexpr std::uint32_t limit = 1'000'000;
  std::vector<std::uint64_t> sig(limit + 1, 0);
  for (std::uint32_t d = 1; d <= limit; ++d)
    for (std::uint32_t k = d; k <= limit; k += d) sig[k] += d;
  std::vector<unsigned long> perfect;
  for (std::uint32_t n = 1; n <= limit; ++n)
    if (sig[n] == 2ULL * n) perfect.push_back(n);
  CHECK(perfect == std::vector<unsigned long>{6, 28, 496, 8128});
  for (unsigned long n : perfect) {
    for (const auto& pp : factorize(n).pairs()) {
      const auto r = index_statistic(n, pp.prime);
      CHECK(r.is_integer);
      CHECK(r.divides_2N);
    }
  }
}

TEST_CASE("even perfect index table") {
  for (unsigned long p : {2UL, 3UL, 5UL, 7UL, 13UL, 17UL, 19UL, 31UL}) {
    const Natural mersenne = pow_nat(2, p) - 1;
    const Natural N = pow_nat(2, p - 1) * mersenne;
    CHECK(index_statistic(N, 2).value == ExactRational(2, 1));
    CHECK(index_statistic(N, mersenne).value == ExactRational(1, 1));
  }
}

TEST_CASE("index identity") {
  CHECK(index_identity_check(candidate(3, {{5, 1}}, 1)));
  CHECK(index_identity_check(candidate(13, {{3, 2}}, 1)));
  CHECK(index_identity_check(candidate(13, {{3, 2}}, 2)));
  CHECK(index_identity_check(candidate(5, {{11, 4}, {3, 3}, {7, 2}}, 6)));
}

TEST_CASE("lambda congruences") {
  CHECK(lambda_congruence_check(decompose(candidate(3, {{5, 1}}))));
  CHECK(lambda_congruence_check(decompose(candidate(3, {{7, 1}}))));
  const auto d = decompose(candidate(3, {{5, 1}, {11, 1}}));
  CHECK(d.Lambda == 2);
  CHECK(lambda_congruence_check(d));
}

TEST_CASE("beta bounds") {
  const auto b1 = beta_bounds(synthetic(3, 5, 9, 1, 1));
  REQUIRE(b1.branch == BetaBoundBranch::bounds);
  REQUIRE(b1.checks.size() == 1);
  CHECK(b1.checks[0].bound.base == 270);
  CHECK(b1.checks[0].bound.exponent == 26);
  CHECK(approx(b1.checks[0].bound.log2_value.lo) == doctest::Approx(209.9972).epsilon(1e-6));
  CHECK(b1.checks[0].small_index_bound.base == 20 * 9 * 3);
  CHECK(b1.checks[0].small_index_bound.exponent == 25);

  const auto b2 = beta_bounds(decompose(candidate(3, {{5, 1}})));
  REQUIRE(b2.branch == BetaBoundBranch::bounds);
  CHECK(b2.checks[0].bound.base == 12);
  CHECK(b2.checks[0].bound.exponent == 5);
  CHECK(approx(b2.checks[0].bound.log2_value.hi) == doctest::Approx(17.9248).epsilon(1e-6));
  CHECK(b2.checks[0].below_bound == Certainty::yes);

  CHECK(beta_bounds(synthetic(3, 6, 1, 1, 0)).branch == BetaBoundBranch::q_divides_m);
  CHECK(beta_bounds(synthetic(3, 4, 1, 1, 0)).branch == BetaBoundBranch::four_divides_m);
  CHECK_THROWS_AS(beta_bounds(decompose(candidate(13, {{3, 2}}))), DomainError);
  CHECK(bound_report(decompose(candidate(13, {{3, 2}}))).beta.branch == BetaBoundBranch::no_bounded_entries);
}

TEST_CASE("beta bounds increase with the entry index") {
  const auto b = beta_bounds(synthetic(5, 3, 1, 3, 0));
  REQUIRE(b.checks.size() == 3);
  for (std::size_t i = 1; i < b.checks.size(); ++i) {
    CHECK(certainly_less(b.checks[i - 1].bound.log2_value, b.checks[i].bound.log2_value) == Certainty::yes);
  }
}

TEST_CASE("alpha lower bound") {
  const auto one = alpha_lower_bound(synthetic(5, 1, 9, 0, 1));
  CHECK(one.floor == 3);
  Decomposition two = synthetic(5, 1, 441, 0, 0);
  two.entries = {{3, 2, 1, 1}, {7, 2, 1, 1}};
  CHECK(alpha_lower_bound(two).required_divisor == 21);
  CHECK(alpha_lower_bound(two).floor == 21);
  Decomposition single = synthetic(5, 1, 9, 0, 0);
  single.entries = {{3, 2, 1, 1}};
  CHECK(alpha_lower_bound(single).required_divisor == 3);
  const auto none = alpha_lower_bound(decompose(candidate(3, {{5, 1}})));
  CHECK(none.required_divisor == 1);
  CHECK(none.floor == 1);
}

TEST_CASE("size bound of an odd perfect number") {
  CHECK(heath_brown_bound(0) == 8);
  CHECK(heath_brown_bound(1) == 32);
  CHECK(heath_brown_bound(8) == 524288);
}

TEST_CASE("M threshold") {
  CHECK(m_threshold_predicate(100000));
  CHECK_FALSE(m_threshold_predicate(200000));
  const Natural t = m_threshold_solver();
  CHECK(t == 143585);
  CHECK(m_threshold_predicate(t));
  CHECK_FALSE(m_threshold_predicate(t + 1));
  CHECK(m_threshold_solver() == t);
}

TEST_CASE("small-index chain") {
  const auto trivial = small_index_q_classifier(decompose(candidate(3, {{5, 1}})));
  CHECK(trivial.forced_q_in_3_5);
  CHECK_FALSE(trivial.rejected);

  Natural big = 1;
  for (unsigned long p : {3UL, 5UL, 11UL, 13UL, 17UL, 19UL, 23UL, 29UL}) big *= p * p;
  const auto rejected = small_index_q_classifier(synthetic(7, 1, big, 0, 8));
  CHECK(rejected.rejected);
  CHECK(rejected.forced_q_in_3_5);
  CHECK(rejected.M_bound_used == 143585);

  const auto pigeon = small_index_q_classifier(synthetic(7, 1, 1000, 0, 8));
  CHECK(pigeon.rejected);
  const auto& last = pigeon.chain_trace.back();
  CHECK(last.name == "pigeonhole");
  CHECK(last.contradiction);

  const auto open = small_index_q_classifier(synthetic(7, 2, 1000, 1, 2));
  CHECK_FALSE(open.rejected);
  CHECK_FALSE(open.forced_q_in_3_5);

  CHECK_THROWS_AS(small_index_q_classifier(synthetic(7, 7, 1, 1, 0)), DomainError);
}

TEST_CASE("small-index chain is monotone in M") {
  for (std::size_t pure : {0U, 2U, 7U}) {
    bool seen_reject = false;
    for (Natural M = 1; M < 1'000'000; M = M * 3 + 1) {
      const bool rejected = small_index_q_classifier(synthetic(11, 2, M, 1, pure)).rejected;
      if (seen_reject) CHECK(rejected);
      seen_reject = seen_reject || rejected;
    }
    CHECK(seen_reject);
  }
}

TEST_CASE("sieve examples") {
  auto ids = [](const ViolationReport& r) {
    std::set<std::string> out;
    for (const auto& v : r.violations) {
      CHECK_FALSE(v.anchor.empty());
      out.insert(v.constraint_id);
    }
    return out;
  };
  const auto r1 = candidate_check(candidate(3, {{5, 1}}, 1));
  CHECK(r1.violated);
  CHECK(ids(r1).count("min-prime-count") == 1);
  CHECK(ids(r1).count("two-adic-budget") == 1);

  const auto r2 = candidate_check(candidate(13, {{3, 2}}, 1));
  CHECK(ids(r2) == std::set<std::string>{"min-prime-count", "pure-component-divisibility"});

  SieveConfig relaxed;
  relaxed.min_s = 1;
  const auto r3 = candidate_check(candidate(13, {{3, 2}}, 2), relaxed);
  CHECK_FALSE(r3.violated);

  relaxed.K = 1;
  const auto r4 = candidate_check(candidate(3, {{5, 1}}, 1), relaxed);
  CHECK(ids(r4).count("index-class") == 1);
}

TEST_CASE("sieve flags complete candidates that are not perfect") {
  OpnCandidate c = candidate(5, {{3, 2}}, 1);
  c.complete = true;
  const auto r = candidate_check(c, {1, std::nullopt});
  std::set<std::string> ids;
  for (const auto& v : r.violations) ids.insert(v.constraint_id);
  CHECK(ids.count("perfectness") == 1);
}

TEST_CASE("sieve on random candidates never reports an inconsistency") {
  std::mt19937 rng(99);
  const auto primes = primes_up_to(100);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::uint32_t> pool(primes.begin() + 1, primes.end());
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::pair<unsigned long, unsigned long>> comps;
    const std::size_t count = 1 + rng() % 9;
    for (std::size_t i = 1; i <= count; ++i) comps.emplace_back(pool[i], 1 + rng() % 6);
    const auto c = candidate(pool[0], comps, rng() % 2 ? std::optional<unsigned long>(1 + rng() % 20) : std::nullopt);
    ViolationReport r;
    CHECK_NOTHROW(r = candidate_check(c));
    CHECK(r.violated == !r.violations.empty());
  }
}
