#pragma once

// Thin RAII owner of an mpfr_t. Precision is per object; nothing here touches
// MPFR's global default precision.

#include <mpfr.h>

#include <string>

#include <gmpxx.h>

namespace reslab {

class BigReal {
 public:
  explicit BigReal(mpfr_prec_t prec = 128);
  BigReal(const BigReal& o);
  BigReal(BigReal&& o) noexcept;
  BigReal& operator=(const BigReal& o);
  BigReal& operator=(BigReal&& o) noexcept;
  ~BigReal();

  // Throws InvalidArgument on malformed decimal input.
  static BigReal from_string(const std::string& s, mpfr_prec_t prec);
  static BigReal from_mpq(const mpq_class& q, mpfr_prec_t prec);
  static BigReal from_double(double d, mpfr_prec_t prec);

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  // log|v| without evaluating a full-precision logarithm; -inf at zero.
  double log_abs() const;
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  std::string to_string(int digits) const;

  // v - floor(v), in [0, 1)
  BigReal frac() const;

 private:
  mpfr_t v_;
};

}  // namespace reslab
