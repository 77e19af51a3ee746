#include "opnkit/opn_model.hpp"
#include "opnkit/diophantine.hpp"
#include "opnkit/errors.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace opnkit {
namespace {

void require_odd_prime(const Natural& p, const std::string& what) {
  if (!is_prime(p)) throw DomainError(what + " must be prime, got " + p.get_str());
  if (p == 2) throw DomainError(what + " must be odd; even primes cannot divide an odd perfect number");
}

Natural product_of_pure_powers(const Decomposition& d, bool minus_one) {
  Natural out = 1;
  for (std::size_t i = d.k; i < d.entries.size(); ++i) {
    const auto& e = d.entries[i];
    out *= pow(e.p, minus_one ? e.lambda - 1 : e.lambda);
  }
  return out;
}

Log2Power log2_power(const Natural& base, const Natural& exponent) {
  return {base, exponent, exponent * log2_interval(base)};
}

// Decides an enclosure comparison, raising precision until it settles.
template <typename Build>
bool decide_less(Build build) {
  for (unsigned precision = 128; precision <= 8192; precision *= 2) {
    const auto [lhs, rhs] = build(precision);
    const Certainty c = certainly_less(lhs, rhs);
    if (c != Certainty::undecided) return c == Certainty::yes;
  }
  throw InconsistencyError("comparison did not settle at 8192 bits of precision");
}

}  // namespace

void validate(const OpnCandidate& c) {
  require_odd_prime(c.q, "special prime q");
  if (c.components.empty()) throw DomainError("candidate needs at least one component besides q");
  std::set<Natural> seen{c.q};
  for (const auto& comp : c.components) {
    require_odd_prime(comp.p, "component prime");
    if (comp.lambda < 1) throw DomainError("component exponent must be >= 1");
    if (!seen.insert(comp.p).second) throw DomainError("duplicate prime " + comp.p.get_str() + " in candidate");
  }
}

Decomposition decompose(const OpnCandidate& c) {
  validate(c);
  Decomposition d;
  d.q = c.q;
  std::vector<DecompositionEntry> bounded, pure;
  for (const auto& comp : c.components) {
    const Natural s = sigma_prime_power(comp.p, comp.lambda);
    DecompositionEntry e;
    e.p = comp.p;
    e.lambda = comp.lambda;
    e.beta = valuation(c.q, s);
    e.m = s / pow(c.q, e.beta);
    d.alpha += e.beta;
    (e.m >= 2 ? bounded : pure).push_back(std::move(e));
  }
  std::stable_sort(bounded.begin(), bounded.end(), [](const auto& a, const auto& b) {
    return std::tie(a.beta, a.p) < std::tie(b.beta, b.p);
  });
  std::sort(pure.begin(), pure.end(), [](const auto& a, const auto& b) { return a.p < b.p; });

  d.k = bounded.size();
  for (const auto& e : bounded) {
    d.m *= e.m;
    d.Lambda = lcm(d.Lambda, Natural(e.lambda + 1));
  }
  for (const auto& e : pure) d.M *= pow(e.p, e.lambda);
  d.entries = std::move(bounded);
  d.entries.insert(d.entries.end(), pure.begin(), pure.end());
  return d;
}

unsigned long effective_alpha(const OpnCandidate& c, const Decomposition& d) {
  return c.alpha.value_or(d.alpha);
}

IndexReport index_statistic(const Natural& N, const Natural& q) {
  if (N < 1) throw DomainError("index_statistic: N must be >= 1");
  if (!is_prime(q)) throw DomainError("index_statistic: q must be prime, got " + q.get_str());
  if (N % q != 0) throw DomainError("index_statistic: " + q.get_str() + " does not divide " + N.get_str());

  IndexReport r;
  r.N = N;
  r.q = q;
  r.alpha = valuation(q, N);
  const Natural q_alpha = pow(q, r.alpha);
  r.value = ExactRational(sigma(factorize(N / q_alpha)), q_alpha);
  r.is_integer = r.value.is_integer();
  r.divides_2N = r.is_integer && (2 * N) % r.value.numerator() == 0;
  r.is_perfect_input = sigma(factorize(N)) == 2 * N;
  if (r.is_perfect_input && !(r.is_integer && r.divides_2N)) {
    throw InconsistencyError("index of a perfect number is not an integer divisor of 2N");
  }
  return r;
}

bool index_identity_check(const OpnCandidate& c) {
  const Decomposition d = decompose(c);
  const unsigned long alpha = effective_alpha(c, d);
  std::vector<PrimePower> pairs;
  for (const auto& comp : c.components) pairs.push_back({comp.p, Natural(comp.lambda)});
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.prime < b.prime; });
  const Natural sigma_rest = sigma(Factorization(std::move(pairs)));
  const mpq_class direct(sigma_rest, pow(c.q, alpha));

  mpq_class from_parts(d.m);
  if (d.alpha >= alpha) {
    from_parts *= mpq_class(pow(c.q, d.alpha - alpha));
  } else {
    from_parts /= mpq_class(pow(c.q, alpha - d.alpha));
  }
  mpq_class lhs = direct, rhs = from_parts;
  lhs.canonicalize();
  rhs.canonicalize();
  return lhs == rhs;
}

bool lambda_congruence_check(const Decomposition& d) {
  for (std::size_t i = 0; i < d.k; ++i) {
    const auto& e = d.entries[i];
    if (e.beta == 0) continue;
    if (powm(e.p, d.Lambda, pow(d.q, e.beta)) != 1) return false;
  }
  return true;
}

std::string to_string(BetaBoundBranch b) {
  switch (b) {
    case BetaBoundBranch::q_divides_m:
      return "q-divides-m";
    case BetaBoundBranch::four_divides_m:
      return "four-divides-m";
    case BetaBoundBranch::bounds:
      return "bounds";
    case BetaBoundBranch::no_bounded_entries:
      return "no-bounded-entries";
  }
  return "bounds";
}

BetaBounds beta_bounds(const Decomposition& d) {
  if (d.k == 0) throw DomainError("beta bounds need at least one entry with m_i >= 2 (k = 0)");
  BetaBounds out;
  out.four_divides_2M_q_minus_1 = (2 * d.M * (d.q - 1)) % 4 == 0;
  out.four_divides_m = d.m % 4 == 0;
  if (d.m % d.q == 0) {
    out.branch = BetaBoundBranch::q_divides_m;
    return out;
  }
  // The derivation divides by (2M(q-1))^Lambda +- m^Lambda, which is nonzero
  // only because 4 | 2M(q-1) while 4 does not divide m.
  if (!out.four_divides_2M_q_minus_1 || out.four_divides_m) {
    out.branch = BetaBoundBranch::four_divides_m;
    return out;
  }
  out.branch = BetaBoundBranch::bounds;
  const Natural base = 2 * d.M * d.q * d.m;
  const Natural small_base = 20 * d.M * d.q;
  const RationalInterval log2_q = log2_interval(d.q);
  Natural exponent = 1, small_exponent = 1;
  for (std::size_t i = 0; i < d.k; ++i) {
    exponent *= d.m * d.m + 1;
    small_exponent *= 25;
    BetaBoundCheck check;
    check.index = i + 1;
    check.p = d.entries[i].p;
    check.beta = d.entries[i].beta;
    check.log2_q_power = Natural(check.beta) * log2_q;
    check.bound = log2_power(base, exponent);
    check.small_index_bound = log2_power(small_base, small_exponent);
    check.below_bound = certainly_less(check.log2_q_power, check.bound.log2_value);
    out.checks.push_back(std::move(check));
  }
  return out;
}

AlphaLowerBound alpha_lower_bound(const Decomposition& d) {
  return {product_of_pure_powers(d, true), isqrt_ceil(d.M)};
}

Natural heath_brown_bound(unsigned long s) { return 2 * pow(Natural(4), s + 1); }

bool m_threshold_predicate(const Natural& M) {
  if (M < 1) throw DomainError("m_threshold_predicate: M must be >= 1");
  return decide_less([&](unsigned precision) {
    const RationalInterval lhs =
        (sqrt_interval(M, precision) - RationalInterval::exact(27)) * ln_interval(Natural(3), precision);
    const RationalInterval rhs = Natural(26) * ln_interval(20 * M, precision);
    return std::make_pair(lhs, rhs);
  });
}

Natural m_threshold_solver() {
  static const Natural threshold = [] {
    const Natural ceiling = 200000;
    // The predicate holds on [1, T] and fails beyond; bisect that edge.
    if (!m_threshold_predicate(1)) throw InconsistencyError("threshold predicate fails at M = 1");
    if (m_threshold_predicate(ceiling)) {
      throw InconsistencyError("threshold predicate still holds at M = 2*10^5");
    }
    Natural lo = 1, hi = ceiling;
    while (hi - lo > 1) {
      const Natural mid = (lo + hi) / 2;
      if (m_threshold_predicate(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  }();
  return threshold;
}

BoundReport bound_report(const Decomposition& d) {
  BoundReport r;
  if (d.k == 0) {
    r.beta.branch = BetaBoundBranch::no_bounded_entries;
  } else {
    r.beta = beta_bounds(d);
  }
  r.heath_brown_log2 = heath_brown_bound(d.s());
  r.alpha_floor = alpha_lower_bound(d);
  r.m_threshold = m_threshold_solver();
  return r;
}

QClassification small_index_q_classifier(const Decomposition& d) {
  if (d.m > 5) throw DomainError("small-index chain needs m <= 5, got m = " + d.m.get_str());
  QClassification out;
  out.M_bound_used = m_threshold_solver();
  auto step = [&](std::string name, std::string detail, bool contradiction) {
    out.chain_trace.push_back({std::move(name), std::move(detail), contradiction});
    if (contradiction && d.q > 5) out.rejected = true;
  };

  if (d.k > 1) {
    step("k<=1", "k = " + std::to_string(d.k) + " with m <= 5 needs two even cofactors m_i", true);
  } else {
    step("k<=1", "k = " + std::to_string(d.k), false);
  }
  if (d.q <= 5) {
    step("q<=5", "q = " + d.q.get_str() + " already in {3, 5}", false);
    out.forced_q_in_3_5 = true;
    out.rejected = false;
    return out;
  }

  // q^(sqrt(M) - 1) <= q^alpha < (20 q M)^26.
  const Natural M = d.M;
  const bool growth_ok = decide_less([&](unsigned precision) {
    const RationalInterval lhs =
        (sqrt_interval(M, precision) - RationalInterval::exact(1)) * log2_interval(d.q, precision);
    const RationalInterval rhs = Natural(26) * log2_interval(20 * d.q * M, precision);
    return std::make_pair(lhs, rhs);
  });
  step("alpha-growth", "(sqrt(M) - 1) log2 q < 26 log2(20 q M) with M = " + M.get_str() + ": " +
                           (growth_ok ? "holds" : "fails"),
       !growth_ok);

  const bool under_threshold = M <= out.M_bound_used;
  step("M-threshold", "M = " + M.get_str() + (under_threshold ? " <= " : " > ") + out.M_bound_used.get_str(),
       !under_threshold);

  // With at least 7 pure components, the smallest one is at most
  // M^(1/(s-k)), yet every pure component is at least 3^2 = 9.
  const std::size_t pure = d.s() - d.k;
  if (under_threshold && pure >= 7) {
    Natural root;
    mpz_root(root.get_mpz_t(), M.get_mpz_t(), pure);
    const bool impossible = root < 9;
    step("pigeonhole", std::to_string(pure) + " pure components, floor(M^(1/" + std::to_string(pure) +
                           ")) = " + root.get_str() + (impossible ? " < 9" : " >= 9"),
         impossible);
  } else {
    step("pigeonhole", "not reached (" + std::to_string(pure) + " pure components)", false);
  }
  out.forced_q_in_3_5 = out.rejected;
  return out;
}

ViolationReport candidate_check(const OpnCandidate& c, const SieveConfig& config) {
  const Decomposition d = decompose(c);
  const unsigned long alpha = effective_alpha(c, d);
  ViolationReport report;
  auto flag = [&](std::string id, std::string detail, std::string anchor) {
    report.violations.push_back({std::move(id), std::move(detail), std::move(anchor)});
  };

  if (!index_identity_check(c)) throw InconsistencyError("index identity failed for a decomposed candidate");

  // (a) sigma(N) = 2N with N odd leaves exactly one factor of 2.
  unsigned long twos = valuation(2, sigma_prime_power(c.q, alpha));
  for (const auto& e : d.entries) twos += valuation(2, sigma_prime_power(e.p, e.lambda));
  if (twos > 1 || (c.complete && twos != 1)) {
    flag("two-adic-budget",
         "2-adic valuation of sigma over the known prime powers is " + std::to_string(twos) +
             (c.complete ? ", must equal 1" : ", must be at most 1"),
         "sigma(N) = 2N with N odd: v2(sigma(N)) = 1");
  }
  if (c.complete) {
    if (alpha != d.alpha) {
      flag("alpha-consistency",
           "alpha = " + std::to_string(alpha) + " but the components force alpha = " + std::to_string(d.alpha),
           "alpha = beta_1 + ... + beta_s");
    }
    Natural N = pow(c.q, alpha);
    for (const auto& e : d.entries) N *= pow(e.p, e.lambda);
    Natural sigma_n = sigma_prime_power(c.q, alpha);
    for (const auto& e : d.entries) sigma_n *= sigma_prime_power(e.p, e.lambda);
    if (sigma_n != 2 * N) flag("perfectness", "sigma(N) != 2N for the complete candidate", "sigma(N) = 2N");
  }

  // (b) pure components have even exponents.
  for (std::size_t i = d.k; i < d.entries.size(); ++i) {
    if (d.entries[i].lambda % 2 != 0) {
      flag("pure-exponent-parity", "pure component " + d.entries[i].p.get_str() + " has odd exponent",
           "lambda_i even for pure components sigma(p_i^lambda_i) = q^beta_i");
    }
  }

  // (c) exponent bound for every bounded entry.
  for (std::size_t i = 0; i < d.k; ++i) {
    const auto& e = d.entries[i];
    const ExponentBoundVerdict v = exponent_bound_check({e.p, e.lambda, e.m, d.q, e.beta});
    if (v.contradiction) {
      throw InconsistencyError("exponent bound lambda + 1 <= m^2 failed for p = " + e.p.get_str() +
                               ", lambda = " + std::to_string(e.lambda) + ", m = " + e.m.get_str());
    }
  }

  // (d) alpha + 1 is a multiple of every p^(lambda-1) over pure components.
  const AlphaLowerBound alb = alpha_lower_bound(d);
  if (Natural(alpha + 1) % alb.required_divisor != 0) {
    flag("pure-component-divisibility",
         "alpha + 1 = " + std::to_string(alpha + 1) + " is not a multiple of " + alb.required_divisor.get_str(),
         "alpha + 1 is a multiple of p^(lambda-1) for sigma(p^lambda) = q^beta");
  }

  // (e) p_i^Lambda = 1 mod q^beta_i follows from sigma(p_i^lambda_i) = m_i q^beta_i.
  if (!lambda_congruence_check(d)) throw InconsistencyError("p_i^Lambda != 1 mod q^beta_i");

  // (f) size bounds on q^beta_i.
  if (d.k >= 1) {
    const BetaBounds bb = beta_bounds(d);
    for (const auto& check : bb.checks) {
      if (check.below_bound == Certainty::no) {
        flag("beta-bound",
             "q^" + std::to_string(check.beta) + " for entry " + std::to_string(check.index) +
                 " is not below (2Mqm)^((m^2+1)^i)",
             "q | m or q^beta_i < (2Mqm)^((m^2+1)^i)");
      }
    }
  }

  // (g) the small-index chain.
  if (d.m <= 5) {
    const QClassification qc = small_index_q_classifier(d);
    if (qc.rejected) {
      std::string why;
      for (const auto& s : qc.chain_trace)
        if (s.contradiction) why += (why.empty() ? "" : "; ") + s.name + ": " + s.detail;
      flag("small-index-chain", "q = " + d.q.get_str() + " > 5 with m <= 5 is impossible (" + why + ")",
           "m <= 5 forces q in {3, 5}");
    }
  }

  // (h) minimum number of prime factors other than q.
  if (d.s() < config.min_s) {
    flag("min-prime-count",
         "s = " + std::to_string(d.s()) + " components, at least " + std::to_string(config.min_s) + " required",
         "s >= " + std::to_string(config.min_s));
  }

  if (config.K) {
    const mpq_class index = [&] {
      mpq_class v(d.m);
      if (d.alpha >= alpha) {
        v *= mpq_class(pow(d.q, d.alpha - alpha));
      } else {
        v /= mpq_class(pow(d.q, alpha - d.alpha));
      }
      return v;
    }();
    if (index >= mpq_class(*config.K)) {
      flag("index-class", "index " + rational_string(index) + " is not below K = " + config.K->get_str(),
           "sigma(N/q^alpha)/q^alpha < K");
    }
  }

  report.violated = !report.violations.empty();
  return report;
}

}  // namespace opnkit
