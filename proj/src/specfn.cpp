#include "reslab/specfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "reslab/error.hpp"

namespace reslab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogMax = 709.0;  // log of the largest finite double, rounded down
constexpr double kEps = std::numeric_limits<double>::epsilon();

// B_{2m} / (2m (2m-1)) for m = 1..10
constexpr std::array<double, 10> kStirling = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

Complex stirling(Complex w) {
  Complex inv = 1.0 / w;
  Complex inv2 = inv * inv;
  Complex corr = 0.0;
  Complex p = inv;
  for (double c : kStirling) {
    corr += c * p;
    p *= inv2;
  }
  return (w - 0.5) * std::log(w) - w + 0.5 * std::log(2.0 * kPi) + corr;
}

Complex checked_exp(Complex lz, const char* what) {
  if (lz.real() > kLogMax) throw OverflowError(std::string(what) + ": result overflows binary64");
  return std::exp(lz);
}

bool is_small(Complex term, Complex sum, double tol) {
  return std::abs(term) <= tol * std::abs(sum);
}

Complex hyp2f1_series(Complex a, Complex b, Complex c, Complex z, double tol) {
  if (std::abs(z) >= 1.0) throw ConvergenceError("gauss_2f1: series path requires |z| < 1");
  Complex sum = 1.0;
  Complex term = 1.0;
  int small_run = 0;
  for (int k = 0; k < 200000; ++k) {
    double kk = k;
    term *= (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;  // terminating series
    small_run = is_small(term, sum, tol) ? small_run + 1 : 0;
    if (small_run >= 3) return sum;
  }
  throw ConvergenceError("gauss_2f1: series did not converge");
}

bool euler_legal(Complex b, Complex c, Complex z) {
  bool on_cut = z.imag() == 0.0 && z.real() >= 1.0;
  return (c - b).real() > 0.0 && b.real() > 0.0 && !on_cut;
}

Complex hyp2f1_euler(Complex a, Complex b, Complex c, Complex z, double tol) {
  if (!euler_legal(b, c, z))
    throw ConvergenceError("gauss_2f1: Euler integral requires Re(c-b) > 0, Re b > 0, z off [1,inf)");
  Complex pre = std::exp(log_gamma(c) - log_gamma(b) - log_gamma(c - b));
  Complex e1 = b - 1.0;
  Complex e2 = c - b - 1.0;
  // t^{b-1}(1-t)^{c-b-1}(1-zt)^{-a}; t and 1-t passed separately so both
  // endpoint singularities are sampled with full relative accuracy.
  auto f = [&](double t, double tc) -> Complex {
    if (t <= 0.0 || tc <= 0.0) return 0.0;
    return std::exp(e1 * std::log(t) + e2 * std::log(tc) - a * std::log(1.0 - z * t));
  };
  boost::math::quadrature::tanh_sinh<double> ts(18);
  double qtol = std::max(tol, 1e-15);
  Complex left = ts.integrate([&](double t) { return f(t, 1.0 - t); }, 0.0, 0.5, qtol);
  Complex right = ts.integrate([&](double u) { return f(1.0 - u, u); }, 0.0, 0.5, qtol);
  return pre * (left + right);
}

// Ascending series for Re lambda >= 0, accumulated against a running scale so
// neither the leading power nor the partial sum can overflow.
Complex bessel_i_series(Complex lambda, double x, double tol) {
  double h = 0.5 * x;
  Complex lt0 = lambda * std::log(h) - log_gamma(lambda + 1.0);
  double scale = lt0.real();
  Complex term = std::exp(Complex(0.0, lt0.imag()));
  Complex sum = term;
  double q = h * h;
  int small_run = 0;
  constexpr double kRenorm = 1e250;
  for (int k = 0; k < 100000; ++k) {
    term *= q / ((k + 1.0) * (lambda + double(k) + 1.0));
    sum += term;
    if (std::abs(sum) > kRenorm) {
      sum /= kRenorm;
      term /= kRenorm;
      scale += std::log(kRenorm);
    }
    small_run = is_small(term, sum, tol) ? small_run + 1 : 0;
    // terms keep growing until k ~ x/2; only stop once past that point
    if (small_run >= 3 && k + 1 > h) {
      double lmag = scale + std::log(std::abs(sum));
      if (lmag > kLogMax) throw OverflowError("bessel_i: log-magnitude exceeds binary64 range");
      return sum * std::exp(scale);
    }
  }
  throw ConvergenceError("bessel_i: series did not converge");
}

double bessel_j_series(double nu, double x) {
  double h = 0.5 * x;
  double lt0 = nu * std::log(h) - std::lgamma(nu + 1.0);
  double term = 1.0;
  double sum = 1.0;
  double q = -h * h;
  int small_run = 0;
  for (int k = 0; k < 10000; ++k) {
    term *= q / ((k + 1.0) * (nu + k + 1.0));
    sum += term;
    small_run = std::abs(term) <= 1e-17 * std::abs(sum) ? small_run + 1 : 0;
    if (small_run >= 3 && k + 1 > h) return sum * std::exp(lt0);
  }
  throw ConvergenceError("bessel_j: series did not converge");
}

// Hankel expansion; returns false when the asymptotic series stalls above
// the accuracy target.
bool bessel_j_hankel(double nu, double x, double* out) {
  double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double last = std::numeric_limits<double>::infinity();
  bool ok = false;
  for (int k = 1; k < 200; ++k) {
    double f = (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
    term *= f;
    if (std::abs(term) > last) break;  // divergence of the asymptotic tail
    last = std::abs(term);
    if (k % 2 == 1)
      q += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    else
      p += ((k / 2) % 2 == 1 ? -1.0 : 1.0) * term;
    if (last < 1e-17) {
      ok = true;
      break;
    }
  }
  if (!ok && last > 1e-15) return false;
  double chi = x - (0.5 * nu + 0.25) * kPi;
  *out = std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
  return true;
}

// Schlafli integral, used in the transition zone between series and Hankel.
double bessel_j_integral(double nu, double x) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  double a = gauss_kronrod<double, 61>::integrate(
      [&](double th) { return std::cos(nu * th - x * std::sin(th)); }, 0.0, kPi, 8, 1e-14, &err);
  double res = a / kPi;
  double sn = std::sin(nu * kPi);
  if (sn != 0.0) {
    double tmax = std::asinh(40.0 / x) + 1.0;
    double b = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return std::exp(-x * std::sinh(t) - nu * t); }, 0.0, tmax, 8, 1e-14, &err);
    res -= sn / kPi * b;
  }
  return res;
}

}  // namespace

void PrecisionContext::validate() const {
  if (mode == PrecisionMode::Arbitrary && bits < 64)
    throw InvalidArgument("PrecisionContext: arbitrary precision needs bits >= 64");
  if (!(target_rel_err > 0.0 && target_rel_err < 1.0))
    throw InvalidArgument("PrecisionContext: target_rel_err must lie in (0, 1)");
}

PrecisionContext PrecisionContext::arbitrary(int bits, double target_rel_err) {
  PrecisionContext ctx{PrecisionMode::Arbitrary, bits, target_rel_err};
  ctx.validate();
  return ctx;
}

bool near_nonpositive_integer(Complex z, double tol, int* index) {
  if (z.real() > 0.5) return false;
  double k = std::round(-z.real());
  if (k < 0.0) return false;
  if (std::abs(z + k) >= tol) return false;
  if (index) *index = static_cast<int>(k);
  return true;
}

Complex log_gamma(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InvalidArgument("log_gamma: non-finite argument");
  if (near_nonpositive_integer(z)) throw PoleError("log_gamma: argument at a pole of Gamma");
  // log Gamma(z) = log Gamma(z + N) - sum log(z + k); principal logs keep the
  // principal branch (the recurrence holds branch-wise off the cut).
  Complex shift = 0.0;
  Complex w = z;
  while (w.real() < 15.0) {
    shift += std::log(w);
    w += 1.0;
  }
  return stirling(w) - shift;
}

Complex gamma(Complex z) { return checked_exp(log_gamma(z), "gamma"); }

Complex rgamma(Complex z) {
  if (near_nonpositive_integer(z)) return 0.0;
  return std::exp(-log_gamma(z));
}

Complex gamma_ratio(Complex a, Complex b) {
  int p = 0, q = 0;
  bool pa = near_nonpositive_integer(a, kGammaPoleTol, &p);
  bool pb = near_nonpositive_integer(b, kGammaPoleTol, &q);
  if (pa && pb) {
    // Gamma(-p + e)/Gamma(-q + e) -> (-1)^{p-q} q!/p!
    double mag = std::exp(std::lgamma(q + 1.0) - std::lgamma(p + 1.0));
    return ((p - q) % 2 == 0) ? mag : -mag;
  }
  if (pa) throw PoleError("gamma_ratio: numerator at a pole of Gamma");
  if (pb) return 0.0;
  return checked_exp(log_gamma(a) - log_gamma(b), "gamma_ratio");
}

double beta_ratio_log_abs(Complex z, int k) {
  if (k < 1) throw InvalidArgument("beta_ratio_log_abs: k must be positive");
  return (log_gamma(z) - log_gamma(z + double(k))).real() + std::lgamma(double(k));
}

Complex gauss_2f1(Complex a, Complex b, Complex c, Complex z, const PrecisionContext& ctx,
                  Hyp2F1Method method) {
  ctx.validate();
  if (near_nonpositive_integer(c)) throw PoleError("gauss_2f1: c at a nonpositive integer");
  double tol = ctx.target_rel_err;
  switch (method) {
    case Hyp2F1Method::Series:
      return hyp2f1_series(a, b, c, z, tol);
    case Hyp2F1Method::Euler:
      return hyp2f1_euler(a, b, c, z, tol);
    case Hyp2F1Method::Auto:
      break;
  }
  if (z == 0.0) return 1.0;
  if (std::abs(z) < 0.9) return hyp2f1_series(a, b, c, z, tol);
  if (euler_legal(b, c, z)) return hyp2f1_euler(a, b, c, z, tol);
  if (euler_legal(a, c, z)) return hyp2f1_euler(b, a, c, z, tol);  // 2F1 symmetric in a, b
  if (std::abs(z) < 1.0) return hyp2f1_series(a, b, c, z, tol);
  throw ConvergenceError("gauss_2f1: neither the series nor the Euler integral applies");
}

Complex bessel_i(Complex lambda, double x, const PrecisionContext& ctx) {
  ctx.validate();
  if (!(x > 0.0)) throw InvalidArgument("bessel_i: x must be positive");
  double tol = std::max(ctx.target_rel_err, kEps / 4);
  if (lambda.real() >= 0.0) return bessel_i_series(lambda, x, tol);
  Complex nu = -lambda;
  Complex i_nu = bessel_i_series(nu, x, tol);
  Complex sn = std::sin(kPi * nu);
  if (sn == 0.0) return i_nu;
  return i_nu + (2.0 / kPi) * sn * bessel_k(nu, x, ctx);
}

BesselKResult bessel_k_detailed(Complex lambda, double x, const PrecisionContext& ctx) {
  ctx.validate();
  if (!(x > 0.0)) throw InvalidArgument("bessel_k: x must be positive");
  if (lambda.real() < 0.0 || (lambda.real() == 0.0 && lambda.imag() < 0.0)) lambda = -lambda;
  double a = lambda.real();
  double b = lambda.imag();

  // Line Im t = beta through the saddle of the phase; clamped away from
  // pi/2, where cosh(t) stops decaying.
  double beta = std::asinh(lambda / x).imag();
  beta = std::clamp(beta, -1.3, 1.3);
  double cb = std::cos(beta);
  auto logmag = [&](double u) { return -x * std::cosh(u) * cb + a * u - b * beta; };

  double ustar = std::asinh(a / (x * cb));
  double lpeak = logmag(ustar);
  const double drop = 45.0;  // e^-45 ~ 3e-20 relative to the peak
  double uhi = ustar, ulo = ustar;
  while (logmag(uhi) > lpeak - drop) uhi += 0.25;
  while (logmag(ulo) > lpeak - drop) ulo -= 0.25;

  const Complex ib(0.0, beta);
  auto g = [&](double u) {
    Complex t = u + ib;
    return std::exp(-x * std::cosh(t) + lambda * t - lpeak);
  };

  double tol = std::max(ctx.target_rel_err, kEps);
  double width = uhi - ulo;
  int n = 16;
  double h = width / n;
  Complex sum = 0.5 * (g(ulo) + g(uhi));
  double abs_sum = 0.5 * (std::abs(g(ulo)) + std::abs(g(uhi)));
  for (int i = 1; i < n; ++i) {
    Complex v = g(ulo + i * h);
    sum += v;
    abs_sum += std::abs(v);
  }
  Complex prev = sum * h;
  for (int level = 1; level <= 16; ++level) {
    h *= 0.5;
    for (int i = 1; i < 2 * n; i += 2) {
      Complex v = g(ulo + i * h);
      sum += v;
      abs_sum += std::abs(v);
    }
    n *= 2;
    Complex cur = sum * h;
    double floor_err = 64.0 * kEps * abs_sum * h;
    double diff = std::abs(cur - prev);
    if (level >= 2 && diff <= tol * std::abs(cur) + floor_err) {
      if (lpeak > kLogMax) throw OverflowError("bessel_k: log-magnitude exceeds binary64 range");
      double s = std::exp(lpeak);
      return {0.5 * cur * s, 0.5 * (diff + floor_err) * s, level};
    }
    prev = cur;
  }
  throw ConvergenceError("bessel_k: trapezoid rule failed to reach its target");
}

Complex bessel_k(Complex lambda, double x, const PrecisionContext& ctx) {
  return bessel_k_detailed(lambda, x, ctx).value;
}

double bessel_j(double nu, double x) {
  if (nu < 0.0 || x < 0.0) throw InvalidArgument("bessel_j: needs nu >= 0, x >= 0");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x <= 8.0 || x * x <= 16.0 * (nu + 1.0)) return bessel_j_series(nu, x);
  double out = 0.0;
  if (x >= 25.0 && x >= nu * nu && bessel_j_hankel(nu, x, &out)) return out;
  return bessel_j_integral(nu, x);
}

Complex log_weierstrass_factor(Complex z, int p) {
  if (p < 0) throw InvalidArgument("weierstrass_factor: p must be nonnegative");
  if (std::abs(z) <= 0.5) {
    // -sum_{j>p} z^j / j, geometric with ratio <= 1/2
    Complex zp = std::pow(z, p + 1);
    Complex sum = 0.0;
    for (int j = p + 1; j < p + 200; ++j) {
      Complex t = zp / double(j);
      sum -= t;
      if (std::abs(t) <= 1e-18 * std::abs(sum) || zp == 0.0) break;
      zp *= z;
    }
    return sum;
  }
  if (z == 1.0) return Complex(-std::numeric_limits<double>::infinity(), 0.0);
  Complex sum = std::log(1.0 - z);
  Complex zp = 1.0;
  for (int j = 1; j <= p; ++j) {
    zp *= z;
    sum += zp / double(j);
  }
  return sum;
}

Complex weierstrass_factor(Complex z, int p) {
  if (z == 1.0) return 0.0;
  Complex e = 0.0;
  Complex zp = 1.0;
  for (int j = 1; j <= p; ++j) {
    zp *= z;
    e += zp / double(j);
  }
  return (1.0 - z) * checked_exp(e, "weierstrass_factor");
}

}  // namespace reslab
