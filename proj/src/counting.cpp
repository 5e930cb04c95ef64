#include "reslab/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reslab/dioph.hpp"
#include "reslab/error.hpp"
#include "reslab/hyperbolic_kernel.hpp"
#include "reslab/parallel.hpp"

namespace reslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_phase(double a) {
  a = std::remainder(a, 2 * kPi);
  return a <= -kPi ? a + 2 * kPi : a;
}

// pairwise sum, fixed order
double tree_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
}

Complex tree_sum(const std::vector<Complex>& v) {
  std::vector<double> re(v.size()), im(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
  }
  return {tree_sum(re, 0, re.size()), tree_sum(im, 0, im.size())};
}

std::vector<Complex> contour_values(const AnalyticFn& f, Complex center, double radius, int nodes) {
  std::vector<Complex> v(nodes);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t i) {
    v[i] = f(center + radius * std::polar(1.0, 2 * kPi * double(i) / nodes));
  });
  return v;
}

}  // namespace

bool CountingCurve::nondecreasing() const {
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].first >= samples[i - 1].first && samples[i].second < samples[i - 1].second) return false;
  return true;
}

ResonanceSet hyperbolic_resonances(int n, double R) {
  if (n < 1) throw InvalidArgument("hyperbolic_resonances needs n >= 1");
  if (!(R > 0.0)) throw InvalidArgument("hyperbolic_resonances needs R > 0");
  ResonanceSet out;
  out.R = R;
  if (n % 2 == 0) return out;
  for (long k = 0; k + 0.5 * n <= R; ++k) {
    std::uint64_t mult = harmonic_dim(n + 2, static_cast<int>(k));
    out.points.push_back({Complex(-double(k), 0.0), mult, true, "free resolvent residue, rank harmonic_dim(n+2,k)"});
    if (out.count > std::numeric_limits<std::uint64_t>::max() - mult) throw OverflowError("resonance count exceeds 64 bits");
    out.count += mult;
  }
  return out;
}

CountingCurve hyperbolic_counting_curve(int n, const std::vector<double>& R_grid) {
  CountingCurve c;
  for (double R : R_grid) c.samples.emplace_back(R, double(hyperbolic_resonances(n, R).count));
  return c;
}

std::vector<ResonancePoint> cusp_pole_lattice(const ValidatedGroup& g, double R, double c_bound) {
  if (!(R > 0.0) || !(c_bound > 0.0)) throw InvalidArgument("cusp_pole_lattice needs R > 0 and c_bound > 0");
  const int n = g.n(), k0 = g.rank(), d = n - k0;
  std::vector<ResonancePoint> out;
  for (long k = 0;; ++k) {
    double s = 0.5 * k0 - double(k);
    if (std::abs(s - 0.5 * n) > R) {
      if (s < 0.5 * n) break;
      continue;
    }
    double m = std::ceil(c_bound * std::pow(1.0 + double(k), d));
    if (!(m < 1.8e19)) throw OverflowError("cusp_pole_lattice multiplicity bound exceeds 64 bits");
    ResonancePoint p{Complex(s, 0.0), static_cast<std::uint64_t>(m), false, "cusp lattice k0/2 - N0, rank bound"};
    p.i0_pole_free = d % 2 == 0;
    out.push_back(p);
  }
  return out;
}

double theorem_bound(const std::vector<ValidatedGroup>& groups, int n, double R, double C, bool diophantine_form) {
  if (!(R > 1.0)) throw InvalidArgument("theorem_bound needs R > 1");
  if (n < 1 || !(C > 0.0)) throw InvalidArgument("theorem_bound needs n >= 1 and C > 0");
  if (diophantine_form) return C * std::pow(R, n + 1) * std::pow(std::log(R), n + 2);
  return C * std::pow(lambda_x(groups, 2.0 * R), n + 2) / R;
}

double strip_bound(double K, double T, double C_K, int n) {
  if (!(T > 1.0)) throw InvalidArgument("strip_bound needs T > 1");
  if (!(K > 0.0) || !(C_K > 0.0) || n < 1) throw InvalidArgument("strip_bound needs K, C_K > 0 and n >= 1");
  return C_K * std::pow(T, n + 2);
}

CanonicalProductValue canonical_product(Complex s, int L, int n, int k_max) {
  if (L < 1 || n < 1 || k_max < 1) throw InvalidArgument("canonical_product needs L, n, k_max >= 1");
  if (double(k_max) < 4.0 * std::abs(s)) throw TruncationTooSmall("canonical_product needs k_max >= 4|s|");
  const int M = 2 * (n + 1);
  const int p = n + 1;
  CanonicalProductValue out;
  // |sum_w log E(wz, p)| <= |z|^M / (1 - |z|^M) for |z| <= 1/2 (powers below
  // M cancel over the roots of unity); summed over k > k_max with weight 2Lk^n
  const double z0 = 2.0 * std::abs(s);
  out.truncation_log_bound =
      2.0 * L * std::pow(z0, M) / (1.0 - std::pow(0.5, M)) / ((n + 1) * std::pow(double(k_max), n + 1));
  if (s == 0.0) {
    out.value = 0.0;
    out.log_abs = -std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<Complex> roots(M);
  for (int i = 0; i < M; ++i) roots[i] = std::polar(1.0, 2 * kPi * i / M);
  std::vector<double> la(k_max), ph(k_max);
  bool zero = false;
  for (int k = 1; k <= k_max; ++k) {
    double w = 2.0 * L * std::pow(double(k), n);
    double a = 0.0, b = 0.0;
    for (const Complex& om : roots) {
      Complex le = log_weierstrass_factor(-2.0 * om * s / double(k), p);
      if (std::isinf(le.real())) zero = true;
      a += le.real();
      b += le.imag();
    }
    la[k - 1] = w * a;
    ph[k - 1] = wrap_phase(w * b);
  }
  if (zero) {
    out.value = 0.0;
    out.log_abs = -std::numeric_limits<double>::infinity();
    return out;
  }
  Complex ls = std::log(s);
  out.log_abs = L * ls.real() + tree_sum(la, 0, la.size());
  out.arg = wrap_phase(L * ls.imag() + tree_sum(ph, 0, ph.size()));
  out.value = std::exp(out.log_abs) * std::polar(1.0, out.arg);
  return out;
}

ZeroCount zero_count_disk(const AnalyticFn& f, Complex center, double radius, int nodes) {
  if (!(radius > 0.0) || nodes < 8) throw InvalidArgument("zero_count_disk needs radius > 0 and nodes >= 8");
  auto v = contour_values(f, center, radius, nodes);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (auto& x : v) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw OverflowError("zero_count_disk: non-finite f on contour");
    lo = std::min(lo, std::abs(x));
    hi = std::max(hi, std::abs(x));
  }
  if (!(lo > 1e-12 * hi)) throw ContourThroughZero("zero_count_disk: f vanishes (numerically) on the contour");
  // (1/2 pi i) sum f'(z_i)/f(z_i) dz_i with f'(z_i) dz_i ~ (f_{i+1} - f_{i-1}) / 2
  std::vector<Complex> terms(nodes);
  for (int i = 0; i < nodes; ++i) {
    const Complex& fp = v[(i + 1) % nodes];
    const Complex& fm = v[(i + nodes - 1) % nodes];
    terms[i] = 0.5 * (fp - fm) / v[i];
  }
  Complex total = tree_sum(terms) / Complex(0.0, 2 * kPi);
  ZeroCount out;
  out.winding = total.real();
  out.count = std::lround(out.winding);
  out.rounding_distance = std::abs(out.winding - double(out.count));
  return out;
}

double jensen_count_bound(const AnalyticFn& f, Complex s0, double r_inner, double r_outer, double log_lower_at_s0,
                          int nodes) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) throw InvalidArgument("jensen_count_bound needs 0 < r_inner < r_outer");
  if (nodes < 8) throw InvalidArgument("jensen_count_bound needs nodes >= 8");
  auto v = contour_values(f, s0, r_outer, nodes);
  double mx = -std::numeric_limits<double>::infinity();
  for (auto& x : v) mx = std::max(mx, std::log(std::abs(x)));
  return (mx - log_lower_at_s0) / std::log(r_outer / r_inner);
}

JensenDisks jensen_disks(double a, int N, double T, int n) {
  if (!(a > 0.0) || N < 1 || !(T > 0.0) || n < 1) throw InvalidArgument("jensen_disks needs a, T > 0 and N, n >= 1");
  JensenDisks d;
  d.center = a * N;
  d.outer_radius = d.center + 2.0 * T;
  d.count_radius = T;
  double reach = std::abs(0.5 * n - d.center) + T;
  d.contains_count_disk = reach <= d.outer_radius;
  d.radius_ratio = d.outer_radius / reach;
  return d;
}

}  // namespace reslab
