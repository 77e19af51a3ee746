// Primality and factoring: trial division, Brent's rho, Pollard p - 1, then
// ECM with Montgomery curves. Every choice (rho constants, curve seeds) is
// fixed, so a given input always yields the same factorization path.

#include "opnkit/arith.hpp"
#include "opnkit/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>

namespace opnkit {
namespace {

// Jaeschke / Sorenson-Webster: the first 13 prime bases are a proof of
// primality below this bound.
const Natural& deterministic_mr_limit() {
  static const Natural limit("3317044064679887385961981");
  return limit;
}

constexpr unsigned kMillerRabinBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};

bool miller_rabin_round(const Natural& n, const Natural& d, unsigned long s, unsigned long base) {
  Natural a = base;
  Natural x;
  Natural n_minus_1 = n - 1;
  mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
  if (x == 1 || x == n_minus_1) return true;
  for (unsigned long r = 1; r < s; ++r) {
    x = x * x % n;
    if (x == n_minus_1) return true;
    if (x == 1) return false;
  }
  return false;
}

const std::vector<std::uint32_t>& trial_primes(std::uint32_t cutoff) {
  static const std::uint32_t kDefault = 1'000'000;
  static const std::vector<std::uint32_t> cached = primes_up_to(kDefault);
  if (cutoff <= kDefault) return cached;
  // Larger cutoffs are rare; cache per value.
  static thread_local std::map<std::uint32_t, std::vector<std::uint32_t>> extra;
  auto it = extra.find(cutoff);
  if (it == extra.end()) it = extra.emplace(cutoff, primes_up_to(cutoff)).first;
  return it->second;
}

// ---- Brent's rho -------------------------------------------------------------

Natural rho_brent(const Natural& n, unsigned long c, unsigned long max_iterations) {
  Natural y = 2, x, ys, q = 1, g = 1;
  const unsigned long batch = 128;
  unsigned long r = 1, iterations = 0;
  auto step = [&](Natural& v) {
    v = v * v + c;
    v %= n;
  };
  do {
    x = y;
    for (unsigned long i = 0; i < r; ++i) step(y);
    unsigned long k = 0;
    do {
      ys = y;
      const unsigned long lim = std::min(batch, r - k);
      for (unsigned long i = 0; i < lim; ++i) {
        step(y);
        q = q * abs(x - y) % n;
      }
      mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
      k += lim;
      iterations += lim;
    } while (k < r && g == 1 && iterations < max_iterations);
    r *= 2;
  } while (g == 1 && iterations < max_iterations);

  if (g == n) {
    // Batch overshot; replay one step at a time from the saved point.
    do {
      step(ys);
      mpz_gcd(g.get_mpz_t(), Natural(abs(x - ys)).get_mpz_t(), n.get_mpz_t());
    } while (g == 1);
  }
  if (g == 1 || g == n) return 0;
  return g;
}

// ---- arithmetic modulo a fixed odd n, Montgomery representation ---------------

// Residues are little-endian limb vectors of the modulus' length, holding
// x * R mod n with R = 2^(64 * limbs).
using Residue = std::vector<mp_limb_t>;

using u128 = unsigned __int128;

// Coarsely integrated operand scanning for a fixed limb count; the generic
// mpn path handles larger moduli.
template <int N>
void mont_mul_fixed(mp_limb_t* r, const mp_limb_t* a, const mp_limb_t* b, const mp_limb_t* m, mp_limb_t neg_inv) {
  mp_limb_t t[N + 2] = {};
  for (int i = 0; i < N; ++i) {
    u128 c = 0;
    for (int j = 0; j < N; ++j) {
      c += static_cast<u128>(a[j]) * b[i] + t[j];
      t[j] = static_cast<mp_limb_t>(c);
      c >>= 64;
    }
    c += t[N];
    t[N] = static_cast<mp_limb_t>(c);
    t[N + 1] = static_cast<mp_limb_t>(c >> 64);
    const mp_limb_t u = t[0] * neg_inv;
    c = static_cast<u128>(u) * m[0] + t[0];
    c >>= 64;
    for (int j = 1; j < N; ++j) {
      c += static_cast<u128>(u) * m[j] + t[j];
      t[j - 1] = static_cast<mp_limb_t>(c);
      c >>= 64;
    }
    c += t[N];
    t[N - 1] = static_cast<mp_limb_t>(c);
    t[N] = t[N + 1] + static_cast<mp_limb_t>(c >> 64);
  }
  if (t[N] != 0 || mpn_cmp(t, m, N) >= 0) {
    mpn_sub_n(r, t, m, N);
  } else {
    std::copy_n(t, N, r);
  }
}

using MontMulFn = void (*)(mp_limb_t*, const mp_limb_t*, const mp_limb_t*, const mp_limb_t*, mp_limb_t);

MontMulFn fixed_mont_mul(std::size_t limbs) {
  switch (limbs) {
    case 1: return mont_mul_fixed<1>;
    case 2: return mont_mul_fixed<2>;
    case 3: return mont_mul_fixed<3>;
    case 4: return mont_mul_fixed<4>;
    case 5: return mont_mul_fixed<5>;
    case 6: return mont_mul_fixed<6>;
    case 7: return mont_mul_fixed<7>;
    case 8: return mont_mul_fixed<8>;
    default: return nullptr;
  }
}

class MontgomeryRing {
 public:
  explicit MontgomeryRing(const Natural& n) : n_(n), size_(mpz_size(n.get_mpz_t())) {
    modulus_.assign(mpz_limbs_read(n.get_mpz_t()), mpz_limbs_read(n.get_mpz_t()) + size_);
    // -n^(-1) mod 2^64 by Newton iteration.
    mp_limb_t inv = modulus_[0];
    for (int i = 0; i < 6; ++i) inv *= 2 - modulus_[0] * inv;
    neg_inv_ = -inv;
    scratch_.assign(2 * size_, 0);
    fixed_ = fixed_mont_mul(size_);
  }

  Residue zero() const { return Residue(size_, 0); }

  Residue from_natural(const Natural& x) const {
    Natural v = x % n_;
    if (v < 0) v += n_;
    mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), 64 * size_);
    v %= n_;
    Residue r(size_, 0);
    const std::size_t used = mpz_size(v.get_mpz_t());
    std::copy_n(mpz_limbs_read(v.get_mpz_t()), used, r.begin());
    return r;
  }

  // The stored limbs as an integer; equals x * R mod n, which shares its gcd
  // with n with x itself.
  Natural raw(const Residue& a) const {
    Natural v;
    mpz_import(v.get_mpz_t(), size_, -1, sizeof(mp_limb_t), 0, 0, a.data());
    return v;
  }

  void mul(Residue& r, const Residue& a, const Residue& b) {
    if (fixed_ != nullptr) {
      fixed_(r.data(), a.data(), b.data(), modulus_.data(), neg_inv_);
      return;
    }
    mp_limb_t* t = scratch_.data();
    const mp_limb_t* m = modulus_.data();
    const auto n = static_cast<mp_size_t>(size_);
    if (&a == &b) {
      mpn_sqr(t, a.data(), n);
    } else {
      mpn_mul_n(t, a.data(), b.data(), n);
    }
    mp_limb_t top = 0;
    for (mp_size_t i = 0; i < n; ++i) {
      const mp_limb_t u = t[i] * neg_inv_;
      const mp_limb_t carry = mpn_addmul_1(t + i, m, n, u);
      top += mpn_add_1(t + i + n, t + i + n, n - i, carry);
    }
    if (top != 0 || mpn_cmp(t + n, m, n) >= 0) {
      mpn_sub_n(r.data(), t + n, m, n);
    } else {
      std::copy_n(t + n, n, r.data());
    }
  }

  void add(Residue& r, const Residue& a, const Residue& b) const {
    const auto n = static_cast<mp_size_t>(size_);
    const mp_limb_t carry = mpn_add_n(r.data(), a.data(), b.data(), n);
    if (carry != 0 || mpn_cmp(r.data(), modulus_.data(), n) >= 0) mpn_sub_n(r.data(), r.data(), modulus_.data(), n);
  }

  void sub(Residue& r, const Residue& a, const Residue& b) const {
    const auto n = static_cast<mp_size_t>(size_);
    if (mpn_sub_n(r.data(), a.data(), b.data(), n) != 0) mpn_add_n(r.data(), r.data(), modulus_.data(), n);
  }

 private:
  const Natural& n_;
  std::size_t size_;
  std::vector<mp_limb_t> modulus_;
  mp_limb_t neg_inv_ = 0;
  std::vector<mp_limb_t> scratch_;
  MontMulFn fixed_ = nullptr;
};

Natural nontrivial_gcd(const Natural& a, const Natural& n) {
  Natural g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t());
  if (g > 1 && g < n) return g;
  return 0;
}

// Product of all prime powers up to b1, cut into scalars of at most ~4096
// bits.
std::vector<Natural> stage_one_scalars(std::uint32_t b1) {
  const auto& primes = trial_primes(std::max<std::uint32_t>(b1, 1'000'000));
  std::vector<Natural> out;
  Natural batch = 1;
  for (std::uint32_t p : primes) {
    if (p > b1) break;
    unsigned long pk = p;
    while (pk * p <= b1) pk *= p;
    batch *= pk;
    if (mpz_sizeinbase(batch.get_mpz_t(), 2) > 4096) {
      out.push_back(batch);
      batch = 1;
    }
  }
  if (batch > 1) out.push_back(batch);
  return out;
}

const std::vector<Natural>& cached_stage_one_scalars(std::uint32_t b1) {
  static thread_local std::map<std::uint32_t, std::vector<Natural>> cache;
  auto it = cache.find(b1);
  if (it == cache.end()) it = cache.emplace(b1, stage_one_scalars(b1)).first;
  return it->second;
}

// ---- ECM, Montgomery x-only arithmetic ---------------------------------------

// Projective x-coordinate.
struct XZ {
  Residue x, z;
};

// Curve arithmetic with scratch registers reused across calls; one instance
// per curve, never shared between threads.
class MontgomeryCurve {
 public:
  MontgomeryCurve(MontgomeryRing& ring, Residue a24)
      : ring_(ring), a24_(std::move(a24)), s_(ring.zero()), d_(ring.zero()), t1_(ring.zero()), t2_(ring.zero()),
        t3_(ring.zero()) {}

  XZ point(const Residue& x, const Residue& z) const { return {x, z}; }

  void dbl(XZ& r, const XZ& p) {
    ring_.add(s_, p.x, p.z);
    ring_.sub(d_, p.x, p.z);
    ring_.mul(t1_, s_, s_);
    ring_.mul(t2_, d_, d_);
    ring_.sub(t3_, t1_, t2_);
    ring_.mul(r.x, t1_, t2_);
    ring_.mul(s_, a24_, t3_);
    ring_.add(s_, s_, t2_);
    ring_.mul(r.z, t3_, s_);
  }

  // r = p + q given diff = p - q. r may alias p or q but not diff.
  void add(XZ& r, const XZ& p, const XZ& q, const XZ& diff) {
    ring_.sub(s_, p.x, p.z);
    ring_.add(d_, q.x, q.z);
    ring_.mul(t1_, s_, d_);
    ring_.add(s_, p.x, p.z);
    ring_.sub(d_, q.x, q.z);
    ring_.mul(t2_, s_, d_);
    ring_.add(s_, t1_, t2_);
    ring_.sub(d_, t1_, t2_);
    ring_.mul(t1_, s_, s_);
    ring_.mul(t2_, d_, d_);
    ring_.mul(r.x, diff.z, t1_);
    ring_.mul(r.z, diff.x, t2_);
  }

  // Returns [k]p and [k+1]p.
  std::pair<XZ, XZ> ladder(const XZ& p, const Natural& k) {
    XZ r0 = p, r1 = p;
    dbl(r1, p);
    const auto bits = mpz_sizeinbase(k.get_mpz_t(), 2);
    for (long i = static_cast<long>(bits) - 2; i >= 0; --i) {
      if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
        add(r0, r1, r0, p);
        dbl(r1, r1);
      } else {
        add(r1, r1, r0, p);
        dbl(r0, r0);
      }
    }
    return {r0, r1};
  }

  XZ mul(const XZ& p, const Natural& k) { return ladder(p, k).first; }

 private:
  MontgomeryRing& ring_;
  Residue a24_;
  Residue s_, d_, t1_, t2_, t3_;
};

// One ECM curve with Suyama parametrization sigma. Returns a proper factor
// or 0.
Natural ecm_curve(const Natural& n, unsigned long sigma, std::uint32_t b1, std::uint32_t b2) {
  const Natural s = sigma;
  Natural u = (s * s - 5) % n;
  Natural v = (4 * s) % n;
  Natural u3 = u * u % n * u % n;
  Natural v3 = v * v % n * v % n;
  Natural vmu = v - u;
  if (vmu < 0) vmu += n;
  Natural num = vmu * vmu % n * vmu % n * ((3 * u + v) % n) % n;
  Natural den = 16 * u3 % n * v % n;
  Natural inv;
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), n.get_mpz_t()) == 0) {
    return nontrivial_gcd(den, n);
  }
  MontgomeryRing ring(n);
  MontgomeryCurve curve(ring, ring.from_natural(num * inv % n));
  XZ point{ring.from_natural(u3), ring.from_natural(v3)};

  // Stage 1: multiply by every prime power up to b1.
  for (const Natural& scalar : cached_stage_one_scalars(b1)) point = curve.mul(point, scalar);
  const Natural z1 = ring.raw(point.z);
  if (Natural g = nontrivial_gcd(z1, n); g != 0) return g;
  if (z1 == 0) return 0;

  // Stage 2: baby-step giant-step over primes in (b1, b2]. A prime
  // p = kG +- j is caught when X([kG]P) - Z([kG]P) x([j]P) = 0, with the baby
  // x-coordinates normalized by one batched inversion.
  const auto& primes = trial_primes(std::max<std::uint32_t>(b2, 1'000'000));
  constexpr std::uint32_t kGiant = 2310;
  constexpr std::uint32_t kHalf = kGiant / 2;
  std::vector<XZ> baby(kHalf + 1, XZ{ring.zero(), ring.zero()});
  {
    XZ two{ring.zero(), ring.zero()};
    curve.dbl(two, point);
    baby[1] = point;
    curve.add(baby[3], two, point, point);
    for (std::uint32_t j = 5; j <= kHalf; j += 2) curve.add(baby[j], baby[j - 2], two, baby[j - 4]);
  }
  // Only j prime to the giant step can pair with a prime p > 11.
  std::vector<std::uint32_t> coprime;
  for (std::uint32_t j = 1; j <= kHalf; j += 2)
    if (std::gcd(j, kGiant) == 1) coprime.push_back(j);
  std::vector<Residue> baby_x(kHalf + 1);
  {
    std::vector<Natural> prefix(coprime.size() + 1, Natural(1));
    for (std::size_t i = 0; i < coprime.size(); ++i) prefix[i + 1] = prefix[i] * ring.raw(baby[coprime[i]].z) % n;
    Natural inv_all;
    if (mpz_invert(inv_all.get_mpz_t(), prefix.back().get_mpz_t(), n.get_mpz_t()) == 0) {
      return nontrivial_gcd(prefix.back(), n);
    }
    for (std::size_t i = coprime.size(); i-- > 0;) {
      const std::uint32_t j = coprime[i];
      const Natural z_inv = inv_all * prefix[i] % n;
      inv_all = inv_all * ring.raw(baby[j].z) % n;
      baby_x[j] = ring.from_natural(ring.raw(baby[j].x) * z_inv % n);
    }
  }
  const XZ giant = curve.mul(point, Natural(kGiant));
  std::uint32_t k = std::max<std::uint32_t>(b1 / kGiant, 1);
  auto [cur, next] = curve.ladder(giant, Natural(k));
  XZ prev{ring.zero(), ring.zero()}, advanced{ring.zero(), ring.zero()};
  bool have_prev = false;
  Residue acc = ring.from_natural(1), term = ring.zero();
  std::vector<char> used(kHalf + 1, 0);
  std::vector<std::uint32_t> js;
  auto it = std::upper_bound(primes.begin(), primes.end(), b1);
  while (it != primes.end() && *it <= b2) {
    const std::uint64_t centre = static_cast<std::uint64_t>(k) * kGiant;
    js.clear();
    while (it != primes.end() && *it <= b2 && *it <= centre + kHalf) {
      const std::uint64_t p = *it;
      const auto j = static_cast<std::uint32_t>(p > centre ? p - centre : centre - p);
      if (!used[j]) {
        used[j] = 1;
        js.push_back(j);
      }
      ++it;
    }
    for (std::uint32_t j : js) {
      used[j] = 0;
      ring.mul(term, cur.z, baby_x[j]);
      ring.sub(term, cur.x, term);
      ring.mul(acc, acc, term);
    }
    // [k+1]G = [k]G + G with difference [k-1]G.
    if (have_prev) {
      curve.add(advanced, cur, giant, prev);
    } else {
      advanced = next;
    }
    std::swap(prev, cur);
    have_prev = true;
    std::swap(cur, advanced);
    ++k;
  }
  return nontrivial_gcd(ring.raw(acc), n);
}

// Pollard p - 1 with stage 2 over single primes in (b1, b2]. The hint is a
// known divisor of p - 1.
Natural pminus1(const Natural& n, const Natural& hint, std::uint32_t b1, std::uint32_t b2) {
  Natural x = 3;
  mpz_powm(x.get_mpz_t(), x.get_mpz_t(), hint.get_mpz_t(), n.get_mpz_t());
  for (const Natural& scalar : cached_stage_one_scalars(b1)) {
    mpz_powm(x.get_mpz_t(), x.get_mpz_t(), scalar.get_mpz_t(), n.get_mpz_t());
  }
  if (Natural g = nontrivial_gcd(x - 1, n); g != 0) return g;
  if (x == 1) return 0;

  // x^q for consecutive primes q via cached x^gap.
  const auto& primes = trial_primes(std::max<std::uint32_t>(b2, 1'000'000));
  auto it = std::upper_bound(primes.begin(), primes.end(), b1);
  if (it == primes.end() || *it > b2) return 0;
  MontgomeryRing ring(n);
  std::map<std::uint32_t, Residue> gap_power;
  Natural start;
  mpz_powm_ui(start.get_mpz_t(), x.get_mpz_t(), *it, n.get_mpz_t());
  Residue cur = ring.from_natural(start), acc = ring.from_natural(1), diff = ring.zero();
  const Residue one = ring.from_natural(1);
  std::uint32_t last = *it;
  for (;;) {
    ring.sub(diff, cur, one);
    ring.mul(acc, acc, diff);
    if (++it == primes.end() || *it > b2) break;
    const std::uint32_t gap = *it - last;
    last = *it;
    auto [g, fresh] = gap_power.try_emplace(gap);
    if (fresh) {
      Natural xg;
      mpz_powm_ui(xg.get_mpz_t(), x.get_mpz_t(), gap, n.get_mpz_t());
      g->second = ring.from_natural(xg);
    }
    ring.mul(cur, cur, g->second);
  }
  return nontrivial_gcd(ring.raw(acc), n);
}

Natural find_factor(const Natural& n, const FactorOptions& options) {
  if (mpz_even_p(n.get_mpz_t())) return 2;
  if (mpz_perfect_power_p(n.get_mpz_t())) {
    const auto bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    for (unsigned long e = bits; e >= 2; --e) {
      Natural root;
      if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), e) != 0) return root;
    }
  }
  for (unsigned long c = 1; c <= 3; ++c) {
    if (Natural f = rho_brent(n, c, 60'000); f != 0) return f;
  }
  if (Natural f = pminus1(n, options.p_minus_1_hint, 100'000, 5'000'000); f != 0) return f;
  unsigned long sigma = 6;
  for (const EcmTier& stage : options.ecm_schedule) {
    for (unsigned i = 0; i < stage.curves; ++i, ++sigma) {
      if (Natural f = ecm_curve(n, sigma, stage.b1, stage.b1 * 100); f != 0) return f;
    }
  }
  return 0;
}

void split_into(const Natural& input, std::map<Natural, unsigned long>& out, const FactorOptions& options) {
  // Strip primes already found elsewhere in the tree first.
  Natural n = input;
  for (auto& [p, e] : out) {
    if (n == 1) break;
    e += mpz_remove(n.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
  }
  if (n == 1) return;
  if (is_prime(n)) {
    ++out[n];
    return;
  }
  const auto bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  const unsigned budget = options.cofactor_bit_budget;
  if (bits > budget) {
    throw RefusalError("composite cofactor of " + std::to_string(bits) +
                       " bits exceeds the factoring bit budget of " + std::to_string(budget));
  }
  Natural f = find_factor(n, options);
  if (f == 0) {
    throw RefusalError("could not split a " + std::to_string(bits) +
                       "-bit composite cofactor within the configured effort: " + n.get_str());
  }
  split_into(f, out, options);
  split_into(Natural(n / f), out, options);
}

}  // namespace

std::vector<std::uint32_t> primes_up_to(std::uint32_t limit) {
  std::vector<std::uint32_t> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

bool is_prime(const Natural& n) {
  if (n < 2) return false;
  for (unsigned p : kMillerRabinBases) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  if (n < 43 * 43) return true;
  if (n >= deterministic_mr_limit()) return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;

  Natural d = n - 1;
  unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
  for (unsigned base : kMillerRabinBases) {
    if (!miller_rabin_round(n, d, s, base)) return false;
  }
  return true;
}

FactorOptions default_factor_options() {
  FactorOptions options;
  if (const char* env = std::getenv("OPNKIT_BIT_BUDGET"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long value = std::strtoul(env, &end, 10);
    if (end == nullptr || *end != '\0' || value == 0) {
      throw DomainError(std::string("OPNKIT_BIT_BUDGET must be a positive integer, got '") + env + "'");
    }
    options.cofactor_bit_budget = static_cast<unsigned>(value);
  }
  return options;
}

Factorization factorize(const Natural& n) { return factorize(n, default_factor_options()); }

Factorization factorize(const Natural& n, const FactorOptions& options) {
  if (n <= 0) throw DomainError("factorize: n must be >= 1");
  std::map<Natural, unsigned long> found;
  Natural rest = n;
  for (std::uint32_t p : trial_primes(options.trial_division_cutoff)) {
    if (p > options.trial_division_cutoff) break;
    if (Natural(p) * p > rest) break;
    if (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
      unsigned long e = 0;
      do {
        mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
        ++e;
      } while (mpz_divisible_ui_p(rest.get_mpz_t(), p));
      found[Natural(p)] += e;
    }
  }
  if (options.p_minus_1_hint < 1) throw DomainError("factorize: p - 1 hint must be >= 1");
  split_into(rest, found, options);

  std::vector<PrimePower> pairs;
  pairs.reserve(found.size());
  for (const auto& [p, e] : found) pairs.push_back({p, Natural(e)});
  return Factorization(std::move(pairs));
}

}  // namespace opnkit
