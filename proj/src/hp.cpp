#include "reslab/hp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "reslab/error.hpp"

namespace reslab {

BigReal::BigReal(mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_zero(v_, 1);
}

BigReal::BigReal(const BigReal& o) {
  mpfr_init2(v_, o.prec());
  mpfr_set(v_, o.v_, MPFR_RNDN);
}

BigReal::BigReal(BigReal&& o) noexcept {
  // mpfr_t is a one-element array of a struct; stealing the limbs means
  // swapping the struct contents and leaving o re-initialisable.
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_swap(v_, o.v_);
}

BigReal& BigReal::operator=(const BigReal& o) {
  if (this != &o) {
    mpfr_set_prec(v_, o.prec());
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

BigReal& BigReal::operator=(BigReal&& o) noexcept {
  if (this != &o) mpfr_swap(v_, o.v_);
  return *this;
}

BigReal::~BigReal() {
  mpfr_clear(v_);
}

BigReal BigReal::from_string(const std::string& s, mpfr_prec_t prec) {
  BigReal r(prec);
  if (s.empty() || mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0)
    throw InvalidArgument("cannot parse '" + s + "' as a decimal number");
  return r;
}

BigReal BigReal::from_mpq(const mpq_class& q, mpfr_prec_t prec) {
  BigReal r(prec);
  mpfr_set_q(r.v_, q.get_mpq_t(), MPFR_RNDN);
  return r;
}

BigReal BigReal::from_double(double d, mpfr_prec_t prec) {
  BigReal r(prec);
  mpfr_set_d(r.v_, d, MPFR_RNDN);
  return r;
}

double BigReal::log_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  long e = 0;
  double m = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
  return std::log(std::abs(m)) + double(e) * std::log(2.0);
}

std::string BigReal::to_string(int digits) const {
  if (digits < 1) digits = 1;
  std::vector<char> buf(digits + 64);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, v_);
  return std::string(buf.data());
}

BigReal BigReal::frac() const {
  BigReal r(prec());
  mpfr_floor(r.v_, v_);
  mpfr_sub(r.v_, v_, r.v_, MPFR_RNDN);
  return r;
}

}  // namespace reslab
