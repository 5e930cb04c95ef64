#include "reslab/hyperbolic_kernel.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "reslab/error.hpp"

namespace reslab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_dims(const HalfSpacePoint& w, const HalfSpacePoint& wp) {
  if (w.y.size() != wp.y.size()) throw DimensionMismatch("points have different horizontal dimensions");
  if (!(w.x > 0.0) || !(wp.x > 0.0)) throw InvalidArgument("half-space points need x > 0");
}

double dist2_y(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r += (a[i] - b[i]) * (a[i] - b[i]);
  return r;
}

bool near_pole(Complex s, double tol) { return near_nonpositive_integer(s, tol); }

// Gamma(a)/Gamma(b) * exp(rest), kept in log space when neither argument is a pole.
Complex gamma_ratio_scaled(Complex a, Complex b, Complex rest) {
  bool pa = near_nonpositive_integer(a);
  bool pb = near_nonpositive_integer(b);
  if (pa || pb) return gamma_ratio(a, b) * std::exp(rest);
  return std::exp(log_gamma(a) - log_gamma(b) + rest);
}

KernelValue series_tau(int n, Complex s, double t, const KernelOptions& opt) {
  if (t < opt.min_tau) throw OffDomain("tau series needs tau >= 1 + 1e-3");
  if (n % 2 == 1 && near_pole(s, opt.pole_tol)) throw PoleError("resolvent kernel: s at a pole (n odd)");
  const double ln2 = std::log(2.0);
  const double lt = std::log(t);
  const double half_n = 0.5 * n;
  Complex sum = 0.0;
  double abs_sum = 0.0;
  double prev_abs = 0.0;
  int small_run = 0;
  for (int j = 0; j < 4000000; ++j) {
    Complex a = s + 2.0 * double(j);
    Complex b = s - half_n + 1.0 + double(j);
    Complex rest = -std::lgamma(j + 1.0) - 2.0 * j * ln2 - a * lt;
    Complex term = gamma_ratio_scaled(a, b, rest);
    sum += term;
    double at = std::abs(term);
    abs_sum += at;
    if (j > 0 && prev_abs > 0.0 && at > 0.0) {
      double r = at / prev_abs;
      double tail = r < 1.0 ? at * r / (1.0 - r) : std::numeric_limits<double>::infinity();
      small_run = tail <= opt.target_rel_err * std::abs(sum) ? small_run + 1 : 0;
      if (small_run >= 3) {
        Complex pre = std::pow(kPi, -half_n) * std::exp(-(s + 1.0) * ln2);
        double err = (tail + 4.0 * kEps * abs_sum) / std::abs(sum);
        return {pre * sum, err, Representation::Series};
      }
    }
    prev_abs = at;
  }
  throw ConvergenceError("tau series did not converge");
}

KernelValue euler_sigma(int n, Complex s, double sg, const KernelOptions& opt) {
  if (!(s.real() > 0.5 * (n - 1))) throw OffDomain("Euler representation needs Re s > (n-1)/2");
  if (!(sg > 1.0)) throw OffDomain("Euler representation needs w != w'");
  Complex e = s - 0.5 * (n + 1);
  auto f = [&](double t, double tc, double dist_to_one) -> Complex {
    if (t <= 0.0 || tc <= 0.0) return 0.0;
    // sigma - t = (sigma - 1) + (1 - t), formed without cancellation near t = 1
    double base = (sg - 1.0) + dist_to_one;
    return std::exp(e * (std::log(t) + std::log(tc)) - s * std::log(base));
  };
  boost::math::quadrature::tanh_sinh<double> ts(18);
  double tol = std::max(opt.target_rel_err * 0.1, 1e-15);
  double e1 = 0.0, e2 = 0.0, l1 = 0.0, l2 = 0.0;
  Complex left = ts.integrate([&](double t) { return f(t, 1.0 - t, 1.0 - t); }, 0.0, 0.5, tol, &e1, &l1);
  Complex right = ts.integrate([&](double u) { return f(1.0 - u, u, u); }, 0.0, 0.5, tol, &e2, &l2);
  Complex integral = left + right;
  Complex pre = std::pow(kPi, -0.5 * (n + 1)) * std::pow(2.0, -(n + 1)) *
                std::exp(log_gamma(s) - log_gamma(s - 0.5 * (n - 1)));
  double err = (e1 + e2 + 8.0 * kEps * (l1 + l2)) / std::abs(integral);
  if (err > opt.target_rel_err) throw ConvergenceError("Euler quadrature missed its error target");
  return {pre * integral, err, Representation::EulerIntegral};
}

KernelValue hypergeom_sigma(int n, Complex s, double sg, const KernelOptions& opt) {
  if (!(sg > 1.0)) throw OffDomain("hypergeometric representation needs w != w'");
  if (n % 2 == 1 && near_pole(s, opt.pole_tol)) throw PoleError("resolvent kernel: s at a pole (n odd)");
  Complex c = 2.0 * s - double(n) + 1.0;
  if (near_nonpositive_integer(c, opt.pole_tol)) throw PoleError("hypergeometric parameter c at a pole");
  PrecisionContext ctx;
  ctx.target_rel_err = std::min(opt.target_rel_err * 1e-2, 1e-16);
  Complex f = gauss_2f1(s, s - 0.5 * (n - 1), c, 1.0 / sg, ctx);
  Complex pre = std::pow(kPi, -0.5 * n) * gamma_ratio_scaled(s, s - 0.5 * n + 1.0, -(2.0 * s + 1.0) * std::log(2.0) - s * std::log(sg));
  return {pre * f, std::max(opt.target_rel_err * 0.1, 16 * kEps), Representation::HypergeomSeries};
}

}  // namespace

const char* to_string(Representation r) {
  switch (r) {
    case Representation::Series:
      return "series";
    case Representation::EulerIntegral:
      return "euler_integral";
    case Representation::HypergeomSeries:
      return "hypergeom_series";
    case Representation::SpectralQuadrature:
      return "spectral_quadrature";
  }
  return "?";
}

double sigma(const HalfSpacePoint& w, const HalfSpacePoint& wp) {
  check_dims(w, wp);
  double sx = w.x + wp.x;
  return (sx * sx + dist2_y(w.y, wp.y)) / (4.0 * w.x * wp.x);
}

double tau(const HalfSpacePoint& w, const HalfSpacePoint& wp) {
  check_dims(w, wp);
  return (w.x * w.x + wp.x * wp.x + dist2_y(w.y, wp.y)) / (2.0 * w.x * wp.x);
}

KernelValue resolvent_kernel_tau(int n, Complex s, double t, KernelMethod method, const KernelOptions& opt) {
  if (n < 1) throw InvalidArgument("resolvent kernel: n must be positive");
  if (!(t > 1.0)) throw OffDomain("resolvent kernel is singular at w = w'");
  double sg = 0.5 * (t + 1.0);
  switch (method) {
    case KernelMethod::Series:
      return series_tau(n, s, t, opt);
    case KernelMethod::Euler:
      return euler_sigma(n, s, sg, opt);
    case KernelMethod::Hypergeom:
      return hypergeom_sigma(n, s, sg, opt);
    case KernelMethod::Auto:
      break;
  }
  if (s.real() > 0.5 * (n - 1)) return euler_sigma(n, s, sg, opt);
  return series_tau(n, s, t, opt);
}

KernelValue resolvent_kernel(int n, Complex s, const HalfSpacePoint& w, const HalfSpacePoint& wp,
                             KernelMethod method, const KernelOptions& opt) {
  if (w.y.size() != static_cast<std::size_t>(n)) throw DimensionMismatch("point dimension differs from n");
  return resolvent_kernel_tau(n, s, tau(w, wp), method, opt);
}

Complex residue_kernel_tau(int n, int k, double t) {
  if (n < 1 || n % 2 == 0) throw InvalidArgument("residue kernel: n must be odd");
  if (k < 0) throw InvalidArgument("residue kernel: k must be nonnegative");
  double sign = (k % 2 == 0) ? 1.0 : -1.0;
  Complex sum = 0.0;
  for (int j = 0; 2 * j <= k; ++j) {
    int p = k - 2 * j;
    double mag = std::exp(std::log(2.0) * (p - 1) + p * std::log(t) - std::lgamma(j + 1.0) - std::lgamma(p + 1.0));
    sum += sign * mag * rgamma(Complex(j - 0.5 * n + 1.0 - k));
  }
  return std::pow(kPi, -0.5 * n) * sum;
}

Complex residue_kernel(int n, int k, const HalfSpacePoint& w, const HalfSpacePoint& wp) {
  return residue_kernel_tau(n, k, tau(w, wp));
}

std::uint64_t harmonic_dim(int d, int k) {
  if (d < 2) throw InvalidArgument("harmonic_dim: d must be at least 2");
  if (k < 0) throw InvalidArgument("harmonic_dim: k must be nonnegative");
  // C(k+d-1, d-1) computed incrementally; each prefix product is itself a
  // binomial coefficient so the division is exact.
  auto binom = [](std::uint64_t top, std::uint64_t r) -> std::uint64_t {
    if (r > top) return 0;
    r = std::min(r, top - r);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
      acc = acc * (top - r + i) / i;
      if (acc > std::numeric_limits<std::uint64_t>::max()) throw OverflowError("harmonic_dim exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
  };
  std::uint64_t a = binom(std::uint64_t(k) + d - 1, d - 1);
  std::uint64_t b = k >= 2 ? binom(std::uint64_t(k) + d - 3, d - 1) : 0;
  return a - b;
}

namespace {

// c * rho^a * (A + rho)^{-(s + e)}
struct RadialTerm {
  Complex coeff;
  int a;
  int e;
};

std::vector<RadialTerm> derivative(const std::vector<RadialTerm>& g, Complex s) {
  std::vector<RadialTerm> out;
  for (const auto& t : g) {
    if (t.a > 0) out.push_back({t.coeff * double(t.a), t.a - 1, t.e});
    out.push_back({-t.coeff * (s + double(t.e)), t.a, t.e + 1});
  }
  return out;
}

std::vector<RadialTerm> combine(std::vector<RadialTerm> g) {
  std::vector<RadialTerm> out;
  for (const auto& t : g) {
    bool merged = false;
    for (auto& o : out) {
      if (o.a == t.a && o.e == t.e) {
        o.coeff += t.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(t);
  }
  return out;
}

// Lap g = 4 rho g'' + 2n g'
std::vector<RadialTerm> radial_laplacian(const std::vector<RadialTerm>& g, Complex s, int n) {
  auto g1 = derivative(g, s);
  auto g2 = derivative(g1, s);
  std::vector<RadialTerm> out;
  for (auto t : g2) out.push_back({4.0 * t.coeff, t.a + 1, t.e});
  for (auto t : g1) out.push_back({2.0 * n * t.coeff, t.a, t.e});
  return combine(std::move(out));
}

}  // namespace

Complex mell_kernel(int n, Complex s, int ell, const std::vector<double>& y, const HalfSpacePoint& wp,
                    double pole_tol) {
  if (n < 1 || ell < 0) throw InvalidArgument("mell_kernel: needs n >= 1, l >= 0");
  if (y.size() != static_cast<std::size_t>(n) || wp.y.size() != y.size())
    throw DimensionMismatch("mell_kernel: y and w' must have length n");
  if (!(wp.x > 0.0)) throw InvalidArgument("mell_kernel: x' must be positive");
  Complex b = s - 0.5 * n + double(ell) + 1.0;
  bool ps = near_nonpositive_integer(s, pole_tol);
  bool pb = near_nonpositive_integer(b, pole_tol);
  if (ps && !pb) throw PoleError("mell_kernel: s at a pole of the prefactor");

  std::vector<RadialTerm> g = {{1.0, 0, 0}};
  for (int i = 0; i < ell; ++i) g = radial_laplacian(g, s, n);

  double rho = dist2_y(y, wp.y);
  double big_a = wp.x * wp.x;
  double lab = std::log(big_a + rho);
  Complex val = 0.0;
  for (const auto& t : g) {
    if (t.a > 0 && rho == 0.0) continue;
    double pw = t.a > 0 ? t.a * std::log(rho) : 0.0;
    val += t.coeff * std::exp(pw - (s + double(t.e)) * lab);
  }
  Complex ratio = (ps && pb) ? gamma_ratio(std::round(s.real()), std::round(s.real()) - 0.5 * n + ell + 1.0)
                             : gamma_ratio(s, b);
  Complex pre = std::pow(kPi, -0.5 * n) * std::exp((s - 1.0 - 2.0 * ell) * std::log(2.0)) * ratio;
  return pre * val * std::exp(s * std::log(wp.x));
}

}  // namespace reslab
