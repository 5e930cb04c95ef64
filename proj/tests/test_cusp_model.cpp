#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "reslab/cusp_model.hpp"
#include "reslab/error.hpp"

using namespace reslab;

namespace {

constexpr double kPi = 3.14159265358979323846;

CuspGroup rank1(AngleSpec theta, double ell, int n = 3) {
  return CuspGroup{n, 1, {Generator{{theta}, {ell}}}};
}

// Literal generating-function convolution: Sym^m weight counts over d
// variables (t planes of weight +-e_r, the rest weight 0), minus Sym^{m-2}.
std::map<std::vector<int>, long long> weights_dp(int d, int t, int m) {
  auto sym = [&](int deg) {
    std::map<std::pair<int, std::vector<int>>, long long> state;
    state[{0, std::vector<int>(t, 0)}] = 1;
    std::vector<std::vector<int>> vars;
    for (int r = 0; r < t; ++r) {
      std::vector<int> e(t, 0);
      e[r] = 1;
      vars.push_back(e);
      e[r] = -1;
      vars.push_back(e);
    }
    for (int i = 2 * t; i < d; ++i) vars.push_back(std::vector<int>(t, 0));
    for (const auto& v : vars) {
      auto next = state;  // power 0 of this variable
      for (const auto& [key, cnt] : state) {
        auto w = key.second;
        for (int p = 1; key.first + p <= deg; ++p) {
          for (int r = 0; r < t; ++r) w[r] += v[r];
          next[{key.first + p, w}] += cnt;
        }
      }
      state = std::move(next);
    }
    std::map<std::vector<int>, long long> out;
    for (const auto& [key, cnt] : state)
      if (key.first == deg) out[key.second] += cnt;
    return out;
  };
  auto a = sym(m);
  if (m >= 2)
    for (const auto& [w, c] : sym(m - 2)) a[w] -= c;
  for (auto it = a.begin(); it != a.end();) it = it->second == 0 ? a.erase(it) : std::next(it);
  return a;
}

}  // namespace

TEST_CASE("angle parsing") {
  CHECK(AngleSpec::parse_rational("1/3").turns_exact() == mpq_class(1, 3));
  CHECK(AngleSpec::parse_rational("4/3").turns_exact() == mpq_class(1, 3));
  CHECK(AngleSpec::parse_rational("-1/4").turns_exact() == mpq_class(3, 4));
  CHECK(AngleSpec::parse_rational("0").turns_exact() == 0);
  CHECK_THROWS_AS(AngleSpec::parse_rational("1/0"), AngleParse);
  CHECK_THROWS_AS(AngleSpec::parse_rational("a/3"), AngleParse);
  CHECK_THROWS_AS(AngleSpec::decimal("0.x", 128), AngleParse);
  CHECK_THROWS_AS(AngleSpec::decimal("0.1", 32), AngleParse);
  CHECK(AngleSpec::decimal("1.25", 128).turns().to_double() == 0.25);
}

TEST_CASE("validate_group") {
  CHECK_NOTHROW(validate_group(rank1(AngleSpec::rational(1, 3), 1.0)));
  CuspGroup dep{3, 2, {Generator{{}, {1.0, 0.0}}, Generator{{}, {1.0, 0.0}}}};
  CHECK_THROWS_AS(validate_group(dep), RankDeficient);
  CuspGroup over{3, 1, {Generator{{AngleSpec::rational(1, 3), AngleSpec::rational(1, 5)}, {1.0}}}};
  CHECK_THROWS_AS(validate_group(over), PlaneOverflow);
  CuspGroup bad_len{3, 1, {Generator{{}, {1.0, 2.0}}}};
  CHECK_THROWS_AS(validate_group(bad_len), DimensionMismatch);
}

TEST_CASE("dual_basis") {
  auto g = validate_group(rank1(AngleSpec::rational(0, 1), 2.5));
  CHECK(dual_basis(g)[0](0) == doctest::Approx(0.4).epsilon(1e-15));
  CuspGroup two{4, 2, {Generator{{}, {2.0, 0.0}}, Generator{{}, {0.0, 4.0}}}};
  auto d = dual_basis(validate_group(two));
  CHECK(std::abs(d[0](0) - 0.5) < 1e-15);
  CHECK(std::abs(d[0](1)) < 1e-15);
  CHECK(std::abs(d[1](1) - 0.25) < 1e-15);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    CuspGroup g3{5, 3, {}};
    for (int j = 0; j < 3; ++j) g3.generators.push_back(Generator{{}, {u(rng), u(rng), u(rng)}});
    auto vg = validate_group(g3);
    auto ds = dual_basis(vg);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(vg.translations().col(i).dot(ds[j]) - (i == j)) < 1e-12);
  }
}

TEST_CASE("harmonic_weights") {
  auto w = harmonic_weights(2, 1, 2);
  REQUIRE(w.size() == 2);
  CHECK(w[0].weight == std::vector<int>{2});
  CHECK(w[1].weight == std::vector<int>{-2});
  CHECK(w[0].multiplicity == 1);
  auto w3 = harmonic_weights(3, 1, 1);
  REQUIRE(w3.size() == 3);
  for (auto& hw : w3) CHECK(hw.multiplicity == 1);
  for (int d = 1; d <= 6; ++d) {
    for (int t = 0; 2 * t <= d && t <= 2; ++t) {
      for (int m = 0; m <= 10; ++m) {
        std::uint64_t total = 0;
        std::map<std::vector<int>, long long> got;
        for (auto& hw : harmonic_weights(d, t, m)) {
          total += hw.multiplicity;
          got[hw.weight] = static_cast<long long>(hw.multiplicity);
        }
        std::uint64_t want = d == 1 ? (m <= 1) : harmonic_dim(d, m);
        CHECK(total == want);
        if (t >= 1 && m <= 7) CHECK(got == weights_dp(d, t, m));
      }
    }
  }
  CHECK_THROWS_AS(harmonic_weights(3, 2, 1), PlaneOverflow);
}

TEST_CASE("holonomy_angles") {
  auto g = validate_group(rank1(AngleSpec::rational(1, 3), 1.0));
  auto h = holonomy_angles(g, 1);
  REQUIRE(h.size() == 2);
  CHECK(h[0].angles[0] == doctest::Approx(2 * kPi / 3));
  CHECK(h[1].angles[0] == doctest::Approx(4 * kPi / 3));
  CHECK(h[0].weight == std::vector<int>{1});
  CHECK(h[1].weight == std::vector<int>{-1});
  CHECK(h[0].multiplicity == 1);
  auto z = validate_group(CuspGroup{5, 1, {Generator{{AngleSpec::rational(0, 1), AngleSpec::rational(0, 1)}, {1.0}}}});
  auto hz = holonomy_angles(z, 3);
  REQUIRE(hz.size() == 1);
  CHECK(hz[0].angles[0] == 0.0);
  CHECK(hz[0].multiplicity == harmonic_dim(4, 3));
  auto h0 = holonomy_angles(g, 0);
  REQUIRE(h0.size() == 1);
  CHECK(h0[0].multiplicity == 1);
  CHECK(h0[0].angles[0] == 0.0);
}

TEST_CASE("b_value") {
  auto g = validate_group(rank1(AngleSpec::rational(1, 3), 1.0));
  auto h3 = holonomy_angles(g, 3);  // weights +-3 both land on angle 0
  REQUIRE(h3.size() == 1);
  CHECK(b_value(g, h3[0], {-1}).is_zero == false);
  CHECK(b_value(g, h3[0], {0}).is_zero);
  CHECK(b_value(g, 0, 0, {0}).is_zero);
  // rank 1: b = (2 pi / l) |m theta/2pi + j| for the weight +m class
  auto g2 = validate_group(rank1(AngleSpec::rational(2, 7), 1.7));
  for (int m = 1; m <= 6; ++m) {
    auto cls = holonomy_angles(g2, m);
    for (auto& c : cls) {
      mpq_class tw = c.turns_exact[0];
      for (long j = -2; j <= 2; ++j) {
        double want = 2 * kPi / 1.7 * std::abs(mpq_class(tw + j).get_d());
        auto bv = b_value(g2, c, {j});
        if (want == 0.0) {
          CHECK(bv.is_zero);
        } else {
          CHECK(bv.b == doctest::Approx(want).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("enumerate_modes") {
  auto g = validate_group(rank1(AngleSpec::rational(0, 1), 2 * kPi));
  auto modes = enumerate_modes(g, 2, 1.5);
  CHECK(modes.size() == 9);
  for (auto& md : modes) {
    CHECK((md.b == doctest::Approx(0.0) || md.b == doctest::Approx(1.0)));
    CHECK(md.b == doctest::Approx(std::abs(double(md.vstar[0]))));
  }
  auto bigger = enumerate_modes(g, 2, 2.5);
  CHECK(bigger.size() > modes.size());

  // completeness against a naive double loop, rank 1 and rank 2
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> num(0, 11), den(1, 12);
  std::uniform_real_distribution<double> len(0.5, 2.0), off(-0.4, 0.4);
  for (int trial = 0; trial < 8; ++trial) {
    CuspGroup cg;
    if (trial % 2 == 0) {
      cg = rank1(AngleSpec::rational(num(rng), den(rng)), len(rng));
    } else {
      cg = CuspGroup{4, 2,
                     {Generator{{AngleSpec::rational(num(rng), den(rng))}, {len(rng), off(rng)}},
                      Generator{{AngleSpec::rational(num(rng), den(rng))}, {off(rng), len(rng)}}}};
    }
    auto vg = validate_group(cg);
    const int m_max = 20;
    const double b_max = 10.0;
    auto got = enumerate_modes(vg, m_max, b_max);
    std::set<std::tuple<int, int, std::vector<long>>> want;
    for (int m = 0; m <= m_max; ++m) {
      auto cls = holonomy_angles(vg, m);
      for (int p = 0; p < static_cast<int>(cls.size()); ++p) {
        for (long a = -30; a <= 30; ++a) {
          for (long b = (cg.rank == 2 ? -30 : 0); b <= (cg.rank == 2 ? 30 : 0); ++b) {
            std::vector<long> n = cg.rank == 2 ? std::vector<long>{a, b} : std::vector<long>{a};
            // direct evaluation in double precision
            Eigen::VectorXd c(cg.rank);
            for (int j = 0; j < cg.rank; ++j) c(j) = mpq_class(cls[p].turns_exact[j] + n[j]).get_d();
            double bb = 2 * kPi * (vg.dual() * c).norm();
            if (bb <= b_max) want.insert({m, p, n});
          }
        }
      }
    }
    std::set<std::tuple<int, int, std::vector<long>>> have;
    for (auto& md : got) {
      have.insert({md.m, md.p, md.vstar});
      CHECK(std::abs(b_value(vg, md.m, md.p, md.vstar).b - md.b) <= 1e-12);
    }
    CHECK(have.size() == got.size());
    CHECK(have == want);
  }
  CHECK_THROWS_AS(enumerate_modes(g, 200, 1e4, EnumerateOptions{1000}), ExplosionGuard);
}

TEST_CASE("signed m indexing gives the same b-set") {
  CuspGroup cg = rank1(AngleSpec::rational(2, 9), 1.3);
  auto plain = validate_group(cg);
  cg.signed_m = true;
  auto sgn = validate_group(cg);
  std::multiset<long long> a, b;
  for (auto& md : enumerate_modes(plain, 6, 8.0))
    for (std::uint64_t k = 0; k < md.multiplicity; ++k) a.insert(std::llround(md.b * 1e9));
  for (auto& md : enumerate_modes(sgn, 6, 8.0)) b.insert(std::llround(md.b * 1e9));
  CHECK(a == b);
}

TEST_CASE("min_positive_b") {
  for (int q = 1; q <= 20; ++q) {
    for (int a = 0; a < q; ++a) {
      if (std::gcd(a, q) != 1) continue;
      double ell = 1.3;
      auto g = validate_group(rank1(AngleSpec::rational(a, q), ell));
      for (int m : {1, 2, 5, 13}) {
        auto mp = min_positive_b(g, m);
        CHECK(mp.b >= 2 * kPi / (ell * q) * (1 - 1e-14));
        // brute force over |j| <= 3
        double best = 1e300;
        for (auto& c : holonomy_angles(g, m))
          for (long j = -3; j <= 3; ++j) {
            auto bv = b_value(g, c, {j});
            if (!bv.is_zero) best = std::min(best, bv.b);
          }
        CHECK(mp.b == doctest::Approx(best).epsilon(1e-14));
      }
    }
  }
  auto g0 = validate_group(rank1(AngleSpec::rational(0, 1), 1.0));
  for (int m = 0; m <= 5; ++m) CHECK(min_positive_b(g0, m).b == doctest::Approx(2 * kPi));

  // random rank-1 and rank-2 groups against enumeration
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ang(0.0, 1.0), len(0.6, 1.8), off(-0.3, 0.3);
  for (int trial = 0; trial < 30; ++trial) {
    CuspGroup cg;
    auto angle = [&] { return AngleSpec::decimal(std::to_string(ang(rng)), 128); };
    if (trial % 2 == 0)
      cg = rank1(angle(), len(rng));
    else
      cg = CuspGroup{4, 2, {Generator{{angle()}, {len(rng), off(rng)}}, Generator{{angle()}, {off(rng), len(rng)}}}};
    auto vg = validate_group(cg);
    for (int m : {1, 7, 29, 50}) {
      auto mp = min_positive_b(vg, m);
      auto modes = enumerate_modes(vg, m, mp.b * 1.5 + 1e-9);
      double best = 1e300;
      for (auto& md : modes)
        if (md.m == m && !md.is_zero) best = std::min(best, md.b);
      CHECK(mp.b == doctest::Approx(best).epsilon(1e-13));
      CHECK(mp.witness.m == m);
      CHECK(std::abs(b_value(vg, mp.witness.m, mp.witness.p, mp.witness.vstar).b - mp.b) < 1e-13);
    }
  }
}

TEST_CASE("delta_i_apply") {
  std::vector<double> ones(20, 1.0);
  for (double v : delta_i_apply(3, 0, 1.7, 0.5, 0.1, ones)) CHECK(v == doctest::Approx(1.7 * 1.7).epsilon(1e-12));
  CHECK_THROWS_AS(delta_i_apply(2, 0, 0.0, 0.5, 0.1, std::vector<double>(4, 1.0)), GridTooCoarse);
  // u(r) = r^{-(d-2)/2} J_{(d-2)/2+m}(r t) is an eigenfunction with eigenvalue t^2 + b^2
  const int d = 2, m = 1;
  const double t = 1.3, b = 0.4, r0 = 0.5, h = 1e-3;
  const int n = static_cast<int>(4.5 / h) + 1;
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) {
    double r = r0 + h * i;
    u[i] = std::pow(r, -0.5 * (d - 2)) * reslab::bessel_j(0.5 * (d - 2) + m, r * t);
  }
  auto lu = delta_i_apply(d, m, b, r0, h, u);
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(lu[i] - b * b * u[i] - t * t * u[i]));
    scale = std::max(scale, std::abs(t * t * u[i]));
  }
  CHECK(worst <= 1e-5 * scale);
  // linearity
  std::vector<double> f(n), gg(n), comb(n);
  for (int i = 0; i < n; ++i) {
    double r = r0 + h * i;
    f[i] = std::sin(r);
    gg[i] = std::exp(-r);
    comb[i] = 2.5 * f[i] - 0.75 * gg[i];
  }
  auto lf = delta_i_apply(d, m, b, r0, h, f), lg = delta_i_apply(d, m, b, r0, h, gg), lc = delta_i_apply(d, m, b, r0, h, comb);
  for (int i = 0; i < n; ++i) CHECK(std::abs(lc[i] - (2.5 * lf[i] - 0.75 * lg[i])) <= 1e-9 * (1 + std::abs(lc[i])));
}

TEST_CASE("f_kernel") {
  Complex s(2.2, 0.4);
  CHECK(f_kernel(s, 3, 1.0, 2.0, 0.7) == f_kernel(s, 3, 2.0, 1.0, 0.7));
  // lambda = 1/2 closed forms
  double x = 2.0, xp = 0.6, tt = 1.3;
  Complex half = f_kernel(2.0, 3, x, xp, tt);
  double kk = std::sqrt(kPi / (2 * x * tt)) * std::exp(-x * tt);
  double ii = std::sqrt(2 / (kPi * xp * tt)) * std::sinh(xp * tt);
  CHECK(std::abs(half - kk * ii) <= 1e-9 * kk * ii);
  // u(x) = F at fixed x' < x solves x^2 u'' + x u' - (lambda^2 + x^2 tau^2) u = 0
  Complex lam(0.7, 0.4);
  Complex sv = lam + 1.5;
  double tau2 = 2.0, x0 = 1.3, xq = 0.5, h = 1e-3;
  auto u = [&](double xx) { return f_kernel(sv, 3, xx, xq, tau2); };
  auto resid = [&](double hh) {
    Complex u0 = u(x0), up = u(x0 + hh), um = u(x0 - hh);
    Complex d2 = (up - 2.0 * u0 + um) / (hh * hh), d1 = (up - um) / (2 * hh);
    return std::pair{x0 * x0 * d2 + x0 * d1 - (lam * lam + x0 * x0 * tau2 * tau2) * u0,
                     std::abs((lam * lam + x0 * x0 * tau2 * tau2) * u0)};
  };
  auto [res, scale] = resid(h);
  CHECK(std::abs(res) <= 1e-6 * scale);

  // large arguments: matches the direct product while both factors are
  // representable, and stays finite past binary64 range
  for (Complex l : {Complex(0.7, 0.0), Complex(3.0, -2.0)}) {
    Complex direct = bessel_k(l, 660.0) * bessel_i(l, 550.0);
    CHECK(std::abs(f_kernel(l + 1.5, 3, 1.2, 1.0, 550.0) - direct) <= 1e-12 * std::abs(direct));
  }
  Complex far = f_kernel(Complex(2.2, 0.0), 3, 1.05, 1.0, 2000.0);
  double lead = std::exp(-0.05 * 2000.0) / (2 * 2000.0 * std::sqrt(1.05));
  CHECK(std::abs(far - lead) <= 1e-3 * lead);
}

TEST_CASE("spectral_density") {
  CHECK(spectral_density(3, 2, 0.8, 1.1, 2.3) == doctest::Approx(spectral_density(3, 2, 0.8, 2.3, 1.1)).epsilon(1e-14));
  CHECK(spectral_density(3, 0, 1.0, 1.0, 1.0) == doctest::Approx((2 / kPi) * (2 / kPi) * std::sin(1.0) * std::sin(1.0)).epsilon(1e-14));
  CHECK(spectral_density(3, 0, 1.0, 1.0, 1.0) == doctest::Approx(0.2869).epsilon(1e-3));
  double t1 = 1e-4, t2 = 1e-2;
  double slope = std::log(spectral_density(2, 3, t2, 1.0, 1.5) / spectral_density(2, 3, t1, 1.0, 1.5)) / std::log(t2 / t1);
  CHECK(std::abs(slope - 7.0) < 0.05);
}

TEST_CASE("mode resolvent kernel") {
  auto g = validate_group(rank1(AngleSpec::rational(1, 3), 1.0));
  Mode m0;
  m0.m = 0;
  m0.is_zero = true;
  Complex s(2.2, 0.0);
  auto a = mode_resolvent_kernel(g, m0, s, 1.0, 0.8, 1.6, 1.2);
  auto b = mode_resolvent_kernel(g, m0, s, 1.6, 1.2, 1.0, 0.8);
  CHECK(std::abs(a.value - b.value) <= 1e-8 * std::abs(a.value));
  CHECK(a.representation_used == Representation::SpectralQuadrature);
  CHECK_THROWS_AS(mode_resolvent_kernel(g, m0, Complex(1.2, 0.0), 1.0, 0.8, 1.6, 1.2), OffDomain);
  CHECK_THROWS_AS(mode_resolvent_kernel(g, m0, s, 1.0, 0.8, 1.0, 1.2), ConvergenceError);

  // I0 sector: equals (x x')^{-d/2} times the angular integral of the H^{d+1}
  // resolvent at s - k0/2 (here d = 2, so H^3 with its closed form)
  auto green = [](Complex z, double t) {
    double dd = std::acosh(t);
    return std::exp(-(z - 1.0) * dd) / (4 * kPi * std::sinh(dd));
  };
  double x = 1.0, r = 0.8, xp = 1.6, rp = 1.2;
  const int nodes = 256;
  Complex acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    double phi = 2 * kPi * i / nodes;
    double y2 = r * r + rp * rp - 2 * r * rp * std::cos(phi);
    acc += green(s - 0.5, (x * x + xp * xp + y2) / (2 * x * xp));
  }
  acc *= 2 * kPi / nodes / (x * xp);
  CHECK(std::abs(a.value - acc) <= 1e-9 * std::abs(acc));
}

TEST_CASE("mode resolvent kernel solves the mode equation") {
  // (-(x d_x)^2 + n x d_x + x^2 Delta_I - s(n-s)) x^{n/2} K = 0 away from x = x'
  auto g = validate_group(rank1(AngleSpec::rational(1, 3), 1.0));
  const int n = 3, d = 2;
  Mode md;
  md.m = 1;
  md.b = 0.9;
  const Complex s(2.3, 0.5);
  const double xp = 0.7, rp = 1.1, h = 1e-2;
  for (auto [x0, r0] : {std::pair{1.3, 0.9}, std::pair{1.6, 1.5}}) {
    auto u = [&](double x, double r) {
      return std::pow(x, 0.5 * n) * mode_resolvent_kernel(g, md, s, x, r, xp, rp).value;
    };
    Complex c = u(x0, r0);
    Complex ux = (u(x0 + h, r0) - u(x0 - h, r0)) / (2 * h);
    Complex uxx = (u(x0 + h, r0) - 2.0 * c + u(x0 - h, r0)) / (h * h);
    Complex ur = (u(x0, r0 + h) - u(x0, r0 - h)) / (2 * h);
    Complex urr = (u(x0, r0 + h) - 2.0 * c + u(x0, r0 - h)) / (h * h);
    Complex xdx = x0 * ux, xdx2 = x0 * x0 * uxx + x0 * ux;
    Complex lap_i = -urr - (d - 1.0) / r0 * ur + double(md.m * (md.m + d - 2)) / (r0 * r0) * c + md.b * md.b * c;
    Complex res = -xdx2 + double(n) * xdx + x0 * x0 * lap_i - s * (double(n) - s) * c;
    double scale = std::abs(xdx2) + std::abs(x0 * x0 * lap_i) + std::abs(s * (double(n) - s) * c);
    CHECK(std::abs(res) <= 1e-3 * scale);
  }
}
