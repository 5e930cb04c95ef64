#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "reslab/hyperbolic_kernel.hpp"
#include "reslab/specfn.hpp"

namespace reslab {

// Polynomial in s with exact rational coefficients, lowest degree first.
using RationalPoly = std::vector<mpq_class>;

struct RationalFunction {
  RationalPoly num;
  RationalPoly den;

  mpq_class eval(const mpq_class& s) const;  // throws PoleError at a root of den
  Complex eval(Complex s) const;
};

RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b);
bool poly_equal(const RationalPoly& a, const RationalPoly& b);

// c_{j,k}(s) = 1 / (4^{k+1} prod_{i=0}^{k} (j+i)(s - n/2 + j + i)), k = 0..N-j;
// the last entry is the boundary coefficient B_{j,N}.
struct CoefficientTable {
  int n = 0, j = 0, N = 0;
  std::vector<RationalFunction> entries;

  const RationalFunction& b() const { return entries.back(); }
};

CoefficientTable build_coefficients(int n, int j, int N);

// c_{j,k-1} = 4 (j+k)(s - n/2 + j + k) c_{j,k} as a polynomial identity after
// cross-multiplication, for every k in the table.
bool check_recurrence(const CoefficientTable& t);

// Residual of (Delta_X - s(n-s)) x^{s+2j} A f + x^{s+2j} f - x^{s+2N+2} B f for
// a fiber mode with Delta_F f = xi_sq f, expanded in powers of x. The exact path
// returns the largest absolute coefficient; the floating path the largest
// coefficient relative to the largest single term. PoleError when s hits
// n/2 - j - {0..N-j}.
mpq_class verify_boundary_identity(int n, int j, int N, const mpq_class& s, const mpq_class& xi_sq);
double verify_boundary_identity(int n, int j, int N, Complex s, double xi_sq);

// One fitted envelope: deficit(p) <= log C + c g(p) with (c, log C) the
// cheapest supporting line on the coarse grid, then checked on the refined one.
struct BoundCell {
  std::string name;
  bool fit_slope = true;  // false: constant-only fit (c = 0)
  double c = 0.0, log_c = 0.0;            // coarse fit
  double c_fine = 0.0, log_c_fine = 0.0;  // refit on the fine grid
  double deficit_coarse = 0.0;  // sup over coarse points with the coarse fit
  double deficit_sup = 0.0;     // sup over fine points with the coarse fit
  double growth = 0.0;          // deficit_sup - deficit_coarse
  std::string deficit_argmax;
  std::size_t coarse_points = 0, fine_points = 0;
  bool stable = false;    // growth < 0.1
  bool monotone = false;  // fine fit >= coarse fit - 1e-9 at the reference g
};

struct BoundReport {
  std::string name;
  std::string grid_spec;
  std::uint64_t seed = 0;
  double deficit_sup = 0.0;
  std::string deficit_argmax;
  bool stable = false;
  std::vector<BoundCell> cells;
  std::vector<std::string> notes;

  std::string text() const;
};

struct BetaGrid {
  int k_max = 200;
  double z_max = 50.0;
  double eps = 0.25;    // minimum dist(z, -N0)
  double spacing = 2.5; // coarse lattice spacing in z; fine halves it
};

BoundReport verify_beta_bounds(const BetaGrid& grid = {});

// Optional value hooks for fault injection: (lambda, x, fine_only, value) -> value.
struct BesselHooks {
  std::function<Complex(Complex, double, bool, Complex)> k;
  std::function<Complex(Complex, double, bool, Complex)> i;
};

struct BesselGrid {
  double lambda_min = 0.5, lambda_max = 30.0;
  double x_min = 0.05, x_max = 40.0;
  int radii = 17, angles = 24, xs = 33;  // coarse counts; fine = 2 count - 1 (angles doubled)
};

BoundReport verify_bessel_bounds(const BesselGrid& grid = {}, const BesselHooks& hooks = {});

struct FGrid {
  int n = 2;
  double lambda_min = 0.5, lambda_max = 10.0;
  double arg_min = 0.05, arg_max = 20.0;  // range of x tau and x' tau
  int radii = 6, angles = 24, args = 9;
};

BoundReport verify_f_bound(const FGrid& grid = {});

struct ResolventCase {
  int n = 1;
  Complex s;
  HalfSpacePoint w, wp;
};

std::vector<ResolventCase> default_resolvent_cases(std::uint64_t seed = 2024, int per_n = 50);

// (1/2 pi i) contour integral of the series kernel around s = -k.
Complex residue_contour(int n, int k, double tau, double radius = 0.1, int nodes = 64);

// H^3 Green function e^{-(s-1)d}/(4 pi sinh d).
Complex green_h3(Complex s, double tau);

struct ConsistencyTolerances {
  double representations = 1e-8;
  double closed_form = 1e-9;
  double residue = 1e-6;
  double residue_even = 1e-8;
};

// Cells: pairwise representation spread, n = 2 closed form, residue contour.
BoundReport verify_resolvent_consistency(const std::vector<ResolventCase>& cases,
                                         const ConsistencyTolerances& tol = {}, std::uint64_t seed = 0);

}  // namespace reslab
