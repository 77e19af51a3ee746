#include "opnkit/diophantine.hpp"
#include "opnkit/errors.hpp"
#include "opnkit/version.hpp"

#include <algorithm>
#include <mutex>
#include <thread>
#include <tuple>

namespace opnkit {
namespace {

void require_odd_prime(const Natural& q, const char* what) {
  if (q == 2) throw DomainError(std::string(what) + " must be odd, got 2");
  if (!is_prime(q)) throw DomainError(std::string(what) + " must be an odd prime, got " + q.get_str());
}

// 1 + p + ... + p^lambda for any p >= 0 (p = 1 included, where it is lambda+1).
Natural geometric_sum(const Natural& p, unsigned long lambda) {
  Natural s = 1;
  for (unsigned long i = 0; i < lambda; ++i) s = s * p + 1;
  return s;
}

// Smallest p >= 1 with geometric_sum(p, lambda) >= target; the sum is strictly
// increasing in p.
Natural geometric_root(const Natural& target, unsigned long lambda) {
  Natural lo = 1, hi = 1;
  while (geometric_sum(hi, lambda) < target) hi *= 2;
  while (lo < hi) {
    Natural mid = (lo + hi) / 2;
    if (geometric_sum(mid, lambda) < target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::vector<Natural> odd_primes_up_to(const Natural& bound) {
  std::vector<Natural> out;
  if (bound < 3) return out;
  const auto limit = static_cast<std::uint32_t>(to_ulong_checked(bound, "prime bound"));
  for (std::uint32_t p : primes_up_to(limit))
    if (p != 2) out.emplace_back(p);
  return out;
}

bool solution_less(const RepunitSolution& a, const RepunitSolution& b) {
  return std::tie(a.p, a.lambda, a.q, a.beta, a.m) < std::tie(b.p, b.lambda, b.q, b.beta, b.m);
}

}  // namespace

std::optional<std::pair<Natural, unsigned long>> as_prime_power(const Natural& c) {
  if (c < 2) return std::nullopt;
  if (is_prime(c)) return std::make_pair(c, 1UL);
  if (!mpz_perfect_power_p(c.get_mpz_t())) return std::nullopt;
  // The largest exponent gives the smallest base; a prime power has exactly
  // one representation with a prime base.
  const auto bits = mpz_sizeinbase(c.get_mpz_t(), 2);
  for (unsigned long e = bits; e >= 2; --e) {
    Natural root;
    if (mpz_root(root.get_mpz_t(), c.get_mpz_t(), e) != 0) {
      if (is_prime(root)) return std::make_pair(root, e);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<RepunitSolution> solve_repunit_mq(const Natural& m, const RepunitBounds& bounds) {
  if (m < 1) throw DomainError("solve_repunit_mq: m must be >= 1");
  if (bounds.lambda_max < 1 || bounds.p_max < 1) throw DomainError("solve_repunit_mq: bounds must be positive");
  std::vector<RepunitSolution> out;
  for (const Natural& p : odd_primes_up_to(bounds.p_max)) {
    Natural u = 1 + p;  // repunit(p, 2)
    for (unsigned long lambda = 1; lambda <= bounds.lambda_max; ++lambda) {
      if (lambda > 1) u = u * p + 1;
      if (u % m != 0) continue;
      const Natural c = u / m;
      // c = 1 is the beta = 0 case; no prime q is determined, so it is
      // never a solution.
      if (c == 1) continue;
      const auto pp = as_prime_power(c);
      if (!pp || pp->first == 2 || m % pp->first == 0) continue;
      out.push_back({p, lambda, m, pp->first, pp->second});
    }
  }
  std::sort(out.begin(), out.end(), solution_less);
  return out;
}

std::string to_string(PowerReading reading) {
  return reading == PowerReading::prime_power ? "q^beta" : "(q^2)^beta";
}

std::string to_string(RefutationConclusion c) {
  switch (c) {
    case RefutationConclusion::no_solutions:
      return "no-solutions";
    case RefutationConclusion::solutions_listed:
      return "solutions-listed";
    case RefutationConclusion::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

RefutationCertificate refute_prime_power_eq(unsigned long lambda, const Natural& q, const Natural& p_search_bound,
                                            PowerReading reading) {
  require_odd_prime(q, "refute_prime_power_eq: q");
  if (lambda < 1) throw DomainError("refute_prime_power_eq: lambda must be >= 1");

  RefutationCertificate cert;
  cert.lambda = lambda;
  cert.q = q;
  cert.reading = reading;

  // The value 1 + p + ... + p^lambda mod q^2 depends only on p mod q^2.
  const Natural q2 = q * q;
  const unsigned long classes = to_ulong_checked(q2, "q^2");
  for (unsigned long r = 0; r < classes; ++r) {
    const Natural value = geometric_sum(Natural(r), lambda) % q2;
    ResidueRow row;
    row.residue = r;
    if (value % q != 0) {
      row.valuation = 0;
    } else if (value != 0) {
      row.valuation = 1;
    } else {
      row.valuation = 2;
      row.undetermined = true;
      cert.capped = false;
    }
    cert.beta_cap = std::max(cert.beta_cap, row.valuation);
    cert.residue_table.push_back(std::move(row));
  }

  bool all_eliminated = cert.capped;
  std::vector<Natural> found;
  if (cert.capped) {
    const unsigned long stride = reading == PowerReading::square_base ? 2 : 1;
    for (unsigned long beta = 0; beta * stride <= cert.beta_cap; ++beta) {
      ResidualCheck check;
      check.beta = beta;
      check.target = pow(q, beta * stride);
      if (beta == 0) {
        check.outcome = "value 1 < 1 + p for every p >= 2";
      } else {
        const Natural root = geometric_root(check.target, lambda);
        if (geometric_sum(root, lambda) != check.target) {
          check.outcome = "no integer root";
        } else if (root < 2 || !is_prime(root)) {
          check.outcome = "integer root p = " + root.get_str() + " is not prime";
        } else {
          check.eliminated = false;
          check.solution_p = root;
          check.outcome = "prime root p = " + root.get_str();
          found.push_back(root);
        }
      }
      all_eliminated = all_eliminated && check.eliminated;
      cert.residual_checks.push_back(std::move(check));
    }
  }

  // Direct sweep over primes as an independent cross-check of the cap.
  cert.direct_sweep.p_bound = p_search_bound;
  for (const Natural& p : odd_primes_up_to(p_search_bound)) {
    const Natural value = repunit(p, lambda + 1);
    const unsigned long v = valuation(q, value);
    ++cert.direct_sweep.primes_checked;
    cert.direct_sweep.max_valuation = std::max(cert.direct_sweep.max_valuation, v);
    if (cert.capped && v > cert.beta_cap) {
      throw InconsistencyError("prime " + p.get_str() + " exceeds the residue-class valuation cap");
    }
    const bool admissible = reading == PowerReading::prime_power || v % 2 == 0;
    if (admissible && value == pow(q, v)) cert.direct_sweep.solutions.push_back(p);
  }
  for (const Natural& p : cert.direct_sweep.solutions) {
    if (std::find(found.begin(), found.end(), p) == found.end() && cert.capped) {
      throw InconsistencyError("direct sweep found p = " + p.get_str() + " missed by the residue argument");
    }
  }

  if (!found.empty() || !cert.direct_sweep.solutions.empty()) {
    cert.conclusion = RefutationConclusion::solutions_listed;
  } else if (all_eliminated) {
    cert.conclusion = RefutationConclusion::no_solutions;
  } else {
    cert.conclusion = RefutationConclusion::inconclusive;
  }
  return cert;
}

Natural pure_component_alpha_modulus(const RepunitSolution& sol) {
  if (sol.m != 1) throw DomainError("pure component requires m = 1, got m = " + sol.m.get_str());
  validate(sol);
  const Natural qb_minus_1 = pow(sol.q, sol.beta) - 1;
  if (valuation(sol.p, qb_minus_1) != 1) {
    throw InconsistencyError(sol.p.get_str() + " does not exactly divide " + sol.q.get_str() + "^" +
                             std::to_string(sol.beta) + " - 1");
  }
  const Natural ell = mult_order(sol.q, sol.p);
  const Natural order_value = pow(sol.q, to_ulong_checked(ell, "order")) - 1;
  if (valuation(sol.p, order_value) != 1) {
    throw InconsistencyError(sol.p.get_str() + " does not exactly divide " + sol.q.get_str() + "^ord - 1");
  }
  return pow(sol.p, sol.lambda - 1);
}

bool pure_component_condition_holds(const RepunitSolution& sol, const Natural& q, unsigned long alpha) {
  if (sol.m != 1) throw DomainError("pure component requires m = 1, got m = " + sol.m.get_str());
  if (sol.q != q) throw DomainError("special prime mismatch: solution has q = " + sol.q.get_str());
  validate(sol);
  const Natural value = repunit(q, alpha + 1);
  const bool divides = value % pow(sol.p, sol.lambda) == 0;
  if (divides && Natural(alpha + 1) % pow(sol.p, sol.lambda - 1) != 0) {
    throw InconsistencyError(sol.p.get_str() + "^" + std::to_string(sol.lambda) + " divides repunit(" + q.get_str() +
                             ", " + std::to_string(alpha + 1) + ") but alpha + 1 is not a multiple of p^(lambda-1)");
  }
  return divides;
}

SearchCertificate bounded_prime_power_search(const SearchBox& box, unsigned workers) {
  if (box.K < 3) throw DomainError("search: K must be >= 3");
  if (box.gamma < 2) throw DomainError("search: Gamma must be >= 2");
  if (box.p_bound < 3) throw DomainError("search: p_bound must be >= 3");
  if (workers == 0) workers = 1;

  const std::vector<Natural> qs = odd_primes_up_to(box.K);
  const std::vector<Natural> ps = odd_primes_up_to(box.p_bound);

  // Fixed-size chunks over the leading parameter q, handed out in order.
  constexpr std::size_t kChunk = 4;
  std::size_t next_chunk = 0;
  std::mutex mu;
  std::vector<RepunitSolution> solutions;
  unsigned long cells = 0;

  auto run = [&] {
    std::vector<RepunitSolution> local;
    unsigned long local_cells = 0;
    for (;;) {
      std::size_t begin;
      {
        std::lock_guard lock(mu);
        begin = next_chunk;
        next_chunk += kChunk;
      }
      if (begin >= qs.size()) break;
      const std::size_t end = std::min(begin + kChunk, qs.size());
      for (std::size_t qi = begin; qi < end; ++qi) {
        const Natural& q = qs[qi];
        for (unsigned long lambda = 2; lambda <= box.gamma; ++lambda) {
          for (const Natural& p : ps) {
            if (p == q) continue;
            ++local_cells;
            const Natural value = repunit(p, lambda + 1);
            if (value % q != 0) continue;
            Natural rest = value;
            const unsigned long beta = mpz_remove(rest.get_mpz_t(), value.get_mpz_t(), q.get_mpz_t());
            if (rest == 1) local.push_back({p, lambda, Natural(1), q, beta});
          }
        }
      }
    }
    std::lock_guard lock(mu);
    solutions.insert(solutions.end(), local.begin(), local.end());
    cells += local_cells;
  };

  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();

  // Lexicographic (q, lambda, p) order, independent of scheduling.
  std::sort(solutions.begin(), solutions.end(), [](const RepunitSolution& a, const RepunitSolution& b) {
    return std::tie(a.q, a.lambda, a.p) < std::tie(b.q, b.lambda, b.p);
  });

  SearchCertificate cert;
  cert.parameter_box = box;
  cert.solutions = std::move(solutions);
  cert.cells_enumerated = cells;
  cert.exhaustive = true;
  cert.toolkit_version = kToolkitVersion;
  return cert;
}

}  // namespace opnkit
