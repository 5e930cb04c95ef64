#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "reslab/error.hpp"
#include "reslab/hyperbolic_kernel.hpp"

using namespace reslab;

namespace {

constexpr double kPi = 3.14159265358979323846;

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

HalfSpacePoint random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ux(0.3, 3.0), uy(-1.5, 1.5);
  HalfSpacePoint p{ux(rng), std::vector<double>(n)};
  for (auto& v : p.y) v = uy(rng);
  return p;
}

// H^3 Green function e^{-(s-1)d} / (4 pi sinh d)
Complex green_h3(Complex s, double t) {
  double d = std::acosh(t);
  return std::exp(-(s - 1.0) * d) / (4.0 * kPi * std::sinh(d));
}

Complex contour_residue(int n, int k, double t) {
  const int nodes = 64;
  const double r = 0.1;
  Complex acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    Complex e = std::polar(1.0, 2 * kPi * i / nodes);
    Complex s = -double(k) + r * e;
    acc += resolvent_kernel_tau(n, s, t, KernelMethod::Series).value * r * e;
  }
  return acc / double(nodes);
}

}  // namespace

TEST_CASE("sigma and tau") {
  HalfSpacePoint a{1.0, {0.0}}, b{2.0, {0.0}};
  CHECK(sigma(a, a) == 1.0);
  CHECK(tau(a, a) == 1.0);
  CHECK(sigma(a, b) == doctest::Approx(9.0 / 8.0).epsilon(1e-15));
  CHECK(tau(a, b) == doctest::Approx(5.0 / 4.0).epsilon(1e-15));
  CHECK_THROWS_AS(sigma(a, HalfSpacePoint{1.0, {0.0, 1.0}}), DimensionMismatch);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto p = random_point(rng, 3), q = random_point(rng, 3);
    CHECK(sigma(p, q) == sigma(q, p));
    CHECK(std::abs(tau(p, q) - (2 * sigma(p, q) - 1)) < 1e-14 * tau(p, q));
  }
}

TEST_CASE("resolvent kernel: H^3 closed form and representations") {
  HalfSpacePoint a{1.0, {0.0, 0.0}}, b{2.0, {0.0, 0.0}};
  Complex want = green_h3(1.7, 1.25);
  for (auto m : {KernelMethod::Auto, KernelMethod::Series, KernelMethod::Euler, KernelMethod::Hypergeom})
    CHECK(rel(resolvent_kernel(2, 1.7, a, b, m).value, want) < 1e-9);
  CHECK(resolvent_kernel(2, 1.7, a, b).representation_used == Representation::EulerIntegral);
  CHECK(resolvent_kernel(2, Complex(0.2, 1.0), a, b).representation_used == Representation::Series);

  Complex s(2.1, 0.7);
  auto ser = resolvent_kernel_tau(3, s, 1.3, KernelMethod::Series);
  auto eul = resolvent_kernel_tau(3, s, 1.3, KernelMethod::Euler);
  auto hyp = resolvent_kernel_tau(3, s, 1.3, KernelMethod::Hypergeom);
  CHECK(rel(ser.value, eul.value) < 1e-8);
  CHECK(rel(hyp.value, eul.value) < 1e-8);
  CHECK(ser.est_rel_err < 1e-12);
  CHECK(eul.est_rel_err < 1e-12);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    auto p = random_point(rng, 2), q = random_point(rng, 2);
    Complex z(0.3 + i * 0.2, -1.0 + 0.1 * i);
    CHECK(std::abs(resolvent_kernel(2, z, p, q).value - resolvent_kernel(2, z, q, p).value) <=
          1e-12 * std::abs(resolvent_kernel(2, z, p, q).value));
  }
}

TEST_CASE("resolvent kernel preconditions") {
  CHECK_THROWS_AS(resolvent_kernel_tau(3, 0.5, 1.5, KernelMethod::Euler), OffDomain);
  CHECK_THROWS_AS(resolvent_kernel_tau(3, 2.0, 1.0005, KernelMethod::Series), OffDomain);
  CHECK_THROWS_AS(resolvent_kernel_tau(1, -2.0 + 1e-10, 1.5, KernelMethod::Series), PoleError);
  CHECK_THROWS_AS(resolvent_kernel_tau(3, -1.0, 1.5, KernelMethod::Hypergeom), PoleError);
  HalfSpacePoint a{1.0, {0.0}}, b{2.0, {0.0}};
  CHECK_THROWS_AS(resolvent_kernel(2, 1.5, a, b), DimensionMismatch);
  // n even: finite at every nonpositive integer, continuous through it
  for (int n : {2, 4}) {
    for (int k = 0; k <= 5; ++k) {
      Complex at = resolvent_kernel_tau(n, -double(k), 1.7).value;
      Complex near = resolvent_kernel_tau(n, -double(k) + 1e-7, 1.7).value;
      CHECK(std::isfinite(at.real()));
      CHECK(std::abs(at - near) <= 1e-5 * std::max(1.0, std::abs(at)));
    }
  }
}

TEST_CASE("resolvent kernel PDE residual") {
  // (-(x d_x)^2 + n x d_x - x^2 sum d_y^2 - s(n - s)) R = 0 away from the diagonal
  const int n = 2;
  Complex s(1.6, 0.5);
  HalfSpacePoint wp{1.0, {0.0, 0.0}};
  auto R = [&](double x, double y0, double y1) {
    return resolvent_kernel(n, s, HalfSpacePoint{x, {y0, y1}}, wp).value;
  };
  for (auto [x, y0, y1] : {std::tuple{1.7, 0.3, -0.2}, {0.6, 0.9, 0.4}, {2.5, -0.5, 1.0}}) {
    double h = 1e-3;
    Complex f = R(x, y0, y1);
    Complex fx = (R(x + h, y0, y1) - R(x - h, y0, y1)) / (2 * h);
    Complex fxx = (R(x + h, y0, y1) - 2.0 * f + R(x - h, y0, y1)) / (h * h);
    Complex lap_y = (R(x, y0 + h, y1) + R(x, y0 - h, y1) + R(x, y0, y1 + h) + R(x, y0, y1 - h) - 4.0 * f) / (h * h);
    Complex op = -x * x * fxx + double(n - 1) * x * fx - x * x * lap_y - s * (double(n) - s) * f;
    double scale = std::abs(x * x * fxx) + std::abs(x * fx) + std::abs(x * x * lap_y) + std::abs(s * (double(n) - s) * f);
    CHECK(std::abs(op) <= 1e-4 * scale);
  }
}

TEST_CASE("residue kernel") {
  CHECK(std::abs(residue_kernel_tau(1, 0, 1.3) - 1.0 / (2 * kPi)) < 1e-15);
  CHECK(std::abs(residue_kernel_tau(1, 0, 4.0) - 1.0 / (2 * kPi)) < 1e-15);
  std::mt19937_64 rng(3);
  Complex c0 = residue_kernel(3, 0, random_point(rng, 3), random_point(rng, 3));
  for (int i = 0; i < 10; ++i) CHECK(std::abs(residue_kernel(3, 0, random_point(rng, 3), random_point(rng, 3)) - c0) < 1e-15);
  CHECK_THROWS_AS(residue_kernel_tau(2, 0, 1.3), InvalidArgument);
  for (int k = 0; k <= 2; ++k) {
    for (double t : {1.2, 2.0, 3.5}) CHECK(rel(contour_residue(1, k, t), residue_kernel_tau(1, k, t)) < 1e-6);
  }
  for (int k = 0; k <= 2; ++k) CHECK(rel(contour_residue(3, k, 1.6), residue_kernel_tau(3, k, 1.6)) < 1e-6);
  for (int k = 0; k <= 2; ++k) CHECK(std::abs(contour_residue(2, k, 1.6)) < 1e-8);
}

TEST_CASE("harmonic_dim") {
  for (int d = 2; d <= 8; ++d) CHECK(harmonic_dim(d, 0) == 1);
  for (int k = 0; k <= 12; ++k) CHECK(harmonic_dim(3, k) == std::uint64_t(2 * k + 1));
  for (int d = 2; d <= 6; ++d) CHECK(harmonic_dim(d, 1) == std::uint64_t(d));
  for (int d = 2; d <= 5; ++d)
    for (int k = 0; k <= 8; ++k) CHECK(harmonic_dim(d, k) == oracle::harmonic_dim_bruteforce(d, k));
  CHECK_THROWS_AS(harmonic_dim(200, 100000), OverflowError);
}

TEST_CASE("mell kernel") {
  // l = 0, n = 1, s = 1, y = 0, w' = (1, 1): pi^{-1/2} Gamma(1)/Gamma(3/2) (1+1)^{-1} = 1/pi
  CHECK(std::abs(mell_kernel(1, 1.0, 0, {0.0}, HalfSpacePoint{1.0, {1.0}}) - 1.0 / kPi) < 4e-15);
  Complex s(1.3, 0.4);
  HalfSpacePoint wp{0.8, {0.2, -0.5}};
  std::vector<double> y = {0.7, 0.1};
  Complex base = mell_kernel(2, s, 0, y, wp);
  double lam = 2.5;
  HalfSpacePoint wp2{lam * 0.8, {y[0] + lam * (0.2 - y[0]), y[1] + lam * (-0.5 - y[1])}};
  CHECK(rel(mell_kernel(2, s, 0, y, wp2), base * std::pow(lam, -s)) < 1e-13);

  // l = 1 against second central differences of the l = 0 kernel in y
  for (int n : {1, 2, 3}) {
    HalfSpacePoint q{0.9, std::vector<double>(n, 0.3)};
    std::vector<double> y0(n, -0.2);
    Complex f0 = mell_kernel(n, s, 0, y0, q);
    auto lap_h = [&](double h) {
      Complex lap = 0.0;
      for (int i = 0; i < n; ++i) {
        auto yp = y0, ym = y0;
        yp[i] += h;
        ym[i] -= h;
        lap += (mell_kernel(n, s, 0, yp, q) - 2.0 * f0 + mell_kernel(n, s, 0, ym, q)) / (h * h);
      }
      return lap;
    };
    // Richardson step removes the O(h^2) term of the central difference
    Complex lap = (4.0 * lap_h(5e-3) - lap_h(1e-2)) / 3.0;
    Complex ratio = 0.25 * std::exp(log_gamma(s - 0.5 * n + 1.0) - log_gamma(s - 0.5 * n + 2.0));
    CHECK(rel(mell_kernel(n, s, 1, y0, q), ratio * lap) < 1e-6);
  }
  // l = 2 applies the operator twice; compare with differences of l = 1
  {
    int n = 2;
    HalfSpacePoint q{1.1, {0.3, 0.1}};
    std::vector<double> y0 = {-0.4, 0.2};
    double h = 2e-3;
    Complex f0 = mell_kernel(n, s, 1, y0, q);
    Complex lap = 0.0;
    for (int i = 0; i < n; ++i) {
      auto yp = y0, ym = y0;
      yp[i] += h;
      ym[i] -= h;
      lap += (mell_kernel(n, s, 1, yp, q) - 2.0 * f0 + mell_kernel(n, s, 1, ym, q)) / (h * h);
    }
    Complex ratio = 0.25 * std::exp(log_gamma(s - 0.5 * n + 2.0) - log_gamma(s - 0.5 * n + 3.0));
    CHECK(rel(mell_kernel(n, s, 2, y0, q), ratio * lap) < 1e-5);
  }
  CHECK_THROWS_AS(mell_kernel(1, -1.0, 0, {0.0}, HalfSpacePoint{1.0, {1.0}}), PoleError);
}
