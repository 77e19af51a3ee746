#include "opnkit/log_bounds.hpp"
#include "opnkit/errors.hpp"

#include <mpfr.h>

#include <algorithm>

namespace opnkit {
namespace {

class Mpfr {
 public:
  explicit Mpfr(unsigned precision) { mpfr_init2(v_, precision); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  // Exact conversion of the (finite) binary value.
  mpq_class to_mpq() const {
    if (mpfr_zero_p(v_)) return 0;
    mpz_class mantissa;
    const mpfr_exp_t exp = mpfr_get_z_2exp(mantissa.get_mpz_t(), v_);
    mpq_class q(mantissa);
    if (exp >= 0) {
      mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(exp));
    } else {
      mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-exp));
    }
    return q;
  }

 private:
  mpfr_t v_;
};

using UnaryFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

RationalInterval enclose(const Natural& x, unsigned precision, UnaryFn fn) {
  if (x < 1) throw DomainError("log/sqrt enclosure requires x >= 1");
  Mpfr lo_in(precision + 64), hi_in(precision + 64), lo(precision), hi(precision);
  mpfr_set_z(lo_in.get(), x.get_mpz_t(), MPFR_RNDD);
  mpfr_set_z(hi_in.get(), x.get_mpz_t(), MPFR_RNDU);
  fn(lo.get(), lo_in.get(), MPFR_RNDD);
  fn(hi.get(), hi_in.get(), MPFR_RNDU);
  return {lo.to_mpq(), hi.to_mpq()};
}

}  // namespace

RationalInterval operator+(const RationalInterval& a, const RationalInterval& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}

RationalInterval operator-(const RationalInterval& a, const RationalInterval& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}

RationalInterval operator*(const RationalInterval& a, const RationalInterval& b) {
  const mpq_class c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(std::begin(c), std::end(c)), *std::max_element(std::begin(c), std::end(c))};
}

RationalInterval operator*(const Natural& k, const RationalInterval& a) {
  const mpq_class kq(k);
  if (k >= 0) return {kq * a.lo, kq * a.hi};
  return {kq * a.hi, kq * a.lo};
}

RationalInterval log2_interval(const Natural& x, unsigned precision) { return enclose(x, precision, mpfr_log2); }

RationalInterval ln_interval(const Natural& x, unsigned precision) { return enclose(x, precision, mpfr_log); }

RationalInterval sqrt_interval(const Natural& x, unsigned precision) { return enclose(x, precision, mpfr_sqrt); }

Certainty certainly_less(const RationalInterval& a, const RationalInterval& b) {
  if (a.hi < b.lo) return Certainty::yes;
  if (a.lo >= b.hi) return Certainty::no;
  return Certainty::undecided;
}

std::string rational_string(const mpq_class& v) {
  mpq_class c = v;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

double approx(const mpq_class& v) { return v.get_d(); }

}  // namespace opnkit
