#pragma once

#include <complex>

namespace reslab {

using Complex = std::complex<double>;

enum class PrecisionMode { Binary64, Arbitrary };

// Numerical accuracy request threaded through the special functions.
// Passed by value; no global precision state exists anywhere in the library.
struct PrecisionContext {
  PrecisionMode mode = PrecisionMode::Binary64;
  int bits = 53;
  double target_rel_err = 1e-16;

  // Throws InvalidArgument when bits < 64 in arbitrary mode or the target is
  // outside (0, 1).
  void validate() const;

  static PrecisionContext arbitrary(int bits, double target_rel_err = 1e-16);
};

// Distance tolerance used to declare an argument a Gamma pole.
inline constexpr double kGammaPoleTol = 1e-12;

// True when z lies within tol of a nonpositive integer; the integer (as a
// nonnegative index k with z ~ -k) is written to *index when given.
bool near_nonpositive_integer(Complex z, double tol = kGammaPoleTol, int* index = nullptr);

/// Principal branch of log Gamma (cut along the negative real axis).
/// Stirling series after an upward shift to Re z >= 15.
Complex log_gamma(Complex z);

Complex gamma(Complex z);

// 1/Gamma(z); entire, exactly zero at the poles of Gamma.
Complex rgamma(Complex z);

// Gamma(a)/Gamma(b) with a - b an integer handled in the limit when both
// sit on poles (the limit taken along a common shift of a and b).
// Only b on a pole gives 0; only a on a pole raises PoleError.
Complex gamma_ratio(Complex a, Complex b);

/// log |Gamma(z) Gamma(k) / Gamma(z + k)|, from log-gamma differences.
double beta_ratio_log_abs(Complex z, int k);

enum class Hyp2F1Method { Auto, Series, Euler };

/// Gauss 2F1(a, b; c; z).
///
/// Series: term-ratio recurrence, truncated once three consecutive terms fall
/// below ctx.target_rel_err relative to the partial sum. Euler: the integral
/// Gamma(c)/(Gamma(b)Gamma(c-b)) int_0^1 t^{b-1}(1-t)^{c-b-1}(1-zt)^{-a} dt,
/// legal for Re(c-b) > 0, Re b > 0 and z off [1, inf). Auto takes the series
/// for |z| < 0.9 and falls back to Euler when legal.
Complex gauss_2f1(Complex a, Complex b, Complex c, Complex z,
                  const PrecisionContext& ctx = {},
                  Hyp2F1Method method = Hyp2F1Method::Auto);

/// Modified Bessel I_lambda(x), x > 0. Ascending series with log-domain
/// scaling for Re lambda >= 0; for Re lambda < 0 the connection
/// I_{-nu} = I_nu + (2 sin(pi nu)/pi) K_nu with nu = -lambda.
Complex bessel_i(Complex lambda, double x, const PrecisionContext& ctx = {});

/// Modified Bessel K_lambda(x), x > 0, from
/// K_lambda(x) = 1/2 int_R exp(-x cosh t + lambda t) dt
/// evaluated on the horizontal line Im t = beta through the saddle of the
/// integrand (|beta| < pi/2 keeps the integral unchanged), by a doubling
/// trapezoid rule. lambda is canonicalised to the half-plane Re >= 0 first,
/// so K_lambda and K_{-lambda} share one code path bit for bit.
Complex bessel_k(Complex lambda, double x, const PrecisionContext& ctx = {});

struct BesselKResult {
  Complex value;
  double abs_err;
  int levels;
};
BesselKResult bessel_k_detailed(Complex lambda, double x, const PrecisionContext& ctx = {});

/// Bessel J_nu(x) for real nu >= 0, x >= 0.
double bessel_j(double nu, double x);

/// Weierstrass elementary factor E(z,p) = (1-z) exp(z + z^2/2 + ... + z^p/p).
Complex weierstrass_factor(Complex z, int p);

// log E(z, p); for |z| <= 1/2 summed as -sum_{j>p} z^j/j (no cancellation).
// Real part is -inf at z = 1.
Complex log_weierstrass_factor(Complex z, int p);

}  // namespace reslab
