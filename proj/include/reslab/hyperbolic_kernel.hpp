#pragma once

#include <cstdint>
#include <vector>

#include "reslab/specfn.hpp"

namespace reslab {

// Point (x, y) of the half-space model R+ x R^n, metric (dx^2 + |dy|^2)/x^2.
struct HalfSpacePoint {
  double x = 1.0;
  std::vector<double> y;
};

enum class KernelMethod { Auto, Series, Euler, Hypergeom };
// SpectralQuadrature marks cusp mode kernels built from a Hankel-transform integral.
enum class Representation { Series, EulerIntegral, HypergeomSeries, SpectralQuadrature };

const char* to_string(Representation r);

struct KernelValue {
  Complex value;
  double est_rel_err = 0.0;
  Representation representation_used = Representation::Series;
};

struct KernelOptions {
  double target_rel_err = 1e-13;
  double pole_tol = 1e-9;   // s-distance at which a Gamma pole is declared
  double min_tau = 1.0 + 1e-3;  // below this the tau series is refused
};

double sigma(const HalfSpacePoint& w, const HalfSpacePoint& wp);  // cosh^2(d/2)
double tau(const HalfSpacePoint& w, const HalfSpacePoint& wp);    // cosh d

/// Free resolvent kernel of H^{n+1} at spectral parameter s as a function of
/// tau = cosh d(w, w'). Representations:
///  - Series:    pi^{-n/2} 2^{-s-1} sum_j 2^{-2j} Gamma(s+2j)/(Gamma(s-n/2+1+j) j!) tau^{-s-2j}
///  - Euler:     pi^{-(n+1)/2} 2^{-n-1} Gamma(s)/Gamma(s-(n-1)/2)
///               * int_0^1 (t(1-t))^{s-(n+1)/2} (sigma-t)^{-s} dt,   Re s > (n-1)/2
///  - Hypergeom: pi^{-n/2} 2^{-2s-1} Gamma(s)/Gamma(s-n/2+1) sigma^{-s}
///               * 2F1(s, s-(n-1)/2; 2s-n+1; 1/sigma)
/// Auto picks Euler when legal, else Series.
KernelValue resolvent_kernel_tau(int n, Complex s, double tau, KernelMethod method = KernelMethod::Auto,
                                 const KernelOptions& opt = {});

KernelValue resolvent_kernel(int n, Complex s, const HalfSpacePoint& w, const HalfSpacePoint& wp,
                             KernelMethod method = KernelMethod::Auto, const KernelOptions& opt = {});

/// Residue of the resolvent kernel at s = -k for odd n: a polynomial of degree
/// k in cosh d.
Complex residue_kernel_tau(int n, int k, double tau);
Complex residue_kernel(int n, int k, const HalfSpacePoint& w, const HalfSpacePoint& wp);

/// Dimension of degree-k spherical harmonics on S^{d-1}:
/// C(k+d-1, d-1) - C(k+d-3, d-1). Throws OverflowError past 64 bits.
std::uint64_t harmonic_dim(int d, int k);

/// Boundary-expansion kernel
///   pi^{-n/2} 2^{-2l+s-1} Gamma(s)/Gamma(s-n/2+l+1) * Lap_y^l (x'^2 + |y-y'|^2)^{-s} * x'^s
/// with Lap_y = sum of second derivatives, applied exactly through the radial
/// recurrence Lap g(rho) = 4 rho g'' + 2n g' (rho = |y-y'|^2).
Complex mell_kernel(int n, Complex s, int ell, const std::vector<double>& y, const HalfSpacePoint& wp,
                    double pole_tol = 1e-9);

}  // namespace reslab
