#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "reslab/cusp_model.hpp"
#include "reslab/specfn.hpp"

namespace reslab {

struct ResonancePoint {
  Complex location;
  std::uint64_t multiplicity = 1;
  bool exact = true;  // false: multiplicity is an upper bound
  std::string source;
  // cusp lattice with even fiber dimension: the I0 sector itself has no
  // poles, the point is kept only as a bound
  bool i0_pole_free = false;
};

struct CountingCurve {
  std::vector<std::pair<double, double>> samples;  // (R, N(R))
  bool nondecreasing() const;
};

struct ResonanceSet {
  std::vector<ResonancePoint> points;
  double R = 0.0;
  std::uint64_t count = 0;  // with multiplicity
};

/// Poles of the free resolvent on H^{n+1} in |s - n/2| <= R: s = -k with
/// multiplicity harmonic_dim(n+2, k) for odd n; none for even n.
ResonanceSet hyperbolic_resonances(int n, double R);
CountingCurve hyperbolic_counting_curve(int n, const std::vector<double>& R_grid);

/// s = k0/2 - k in the ball of radius R about n/2, multiplicity bound
/// ceil(c_bound (1+k)^{n-k0}).
std::vector<ResonancePoint> cusp_pole_lattice(const ValidatedGroup& g, double R, double c_bound);

/// General form C Lambda_X(2R)^{n+2} / R; Diophantine form C R^{n+1} (log R)^{n+2}.
double theorem_bound(const std::vector<ValidatedGroup>& groups, int n, double R, double C, bool diophantine_form);

/// C_K T^{n+2}
double strip_bound(double K, double T, double C_K, int n);

struct CanonicalProductValue {
  Complex value;           // 0 at a zero; may be inf when |g| exceeds binary64
  double log_abs = 0.0;    // -inf at a zero
  double arg = 0.0;        // phase in (-pi, pi]
  double truncation_log_bound = 0.0;  // bound on |log g_L - log g_L^{(k_max)}|
};

/// g_L(s) = s^L prod_{k<=k_max} prod_{w^{2(n+1)}=1} E(-2ws/k, n+1)^{2Lk^n}, in log space.
CanonicalProductValue canonical_product(Complex s, int L, int n, int k_max);

struct ZeroCount {
  long count = 0;
  double winding = 0.0;           // unrounded
  double rounding_distance = 0.0;
};

using AnalyticFn = std::function<Complex(Complex)>;

/// Winding number of f around |s - center| = radius: trapezoid rule for
/// (1/2 pi i) \oint f'/f with f' from centred differences along the contour.
ZeroCount zero_count_disk(const AnalyticFn& f, Complex center, double radius, int nodes = 512);

/// (max_{|s-s0|=r_outer} log|f| - log_lower_at_s0) / log(r_outer / r_inner)
double jensen_count_bound(const AnalyticFn& f, Complex s0, double r_inner, double r_outer, double log_lower_at_s0,
                          int nodes = 512);

/// Big-disk geometry for counting in |s - n/2| <= T: centre s_N = a N,
/// radius s_N + 2T.
struct JensenDisks {
  double center = 0.0;
  double outer_radius = 0.0;
  double count_radius = 0.0;
  bool contains_count_disk = false;
  double radius_ratio = 0.0;  // outer_radius / (|n/2 - s_N| + T)
};

JensenDisks jensen_disks(double a, int N, double T, int n);

}  // namespace reslab
