#include "reslab/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "reslab/cusp_model.hpp"
#include "reslab/error.hpp"
#include "reslab/parallel.hpp"

namespace reslab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------- exact coefficients ----------

void trim(RationalPoly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

mpq_class beta_shift(int n, int j) { return mpq_class(2 * j - n, 2); }  // beta + j = s + (j - n/2)

// c_{j,k}(s) evaluated directly from the product, floating.
Complex coeff_direct(int n, int j, int k, Complex s) {
  Complex beta = s - 0.5 * n;
  Complex p = std::pow(4.0, k + 1);
  for (int i = 0; i <= k; ++i) p *= double(j + i) * (beta + double(j + i));
  return 1.0 / p;
}

void check_pole(int n, int j, int N, Complex s) {
  for (int i = 0; i <= N - j; ++i)
    if (std::abs(s - 0.5 * n + double(j + i)) < kGammaPoleTol)
      throw PoleError("boundary identity: s lies on n/2 - j - i");
}

// ---------- fitting ----------

struct Sample {
  double g = 0.0;
  double r = kNegInf;
  std::array<double, 4> p{};
  bool coarse = false;
};

struct Line {
  double c = 0.0, log_c = 0.0;
};

// Cheapest (c >= 0, log C) with r_i <= log C + c g_i for all i, minimising
// log C + c g_ref: a supporting line of the upper hull.
Line fit_line(const std::vector<const Sample*>& pts, double g_ref, bool slope) {
  auto offset = [&](double c) {
    double m = kNegInf;
    for (auto* p : pts) m = std::max(m, p->r - c * p->g);
    return m;
  };
  if (!slope) return {0.0, offset(0.0)};
  std::vector<std::pair<double, double>> v;
  for (auto* p : pts)
    if (std::isfinite(p->r)) v.push_back({p->g, p->r});
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> hull;
  for (auto& q : v) {
    while (hull.size() >= 2) {
      auto& a = hull[hull.size() - 2];
      auto& b = hull[hull.size() - 1];
      double cross = (b.first - a.first) * (q.second - a.second) - (b.second - a.second) * (q.first - a.first);
      if (cross >= 0) hull.pop_back();
      else break;
    }
    if (!hull.empty() && hull.back().first == q.first) hull.back().second = std::max(hull.back().second, q.second);
    else hull.push_back(q);
  }
  std::vector<double> cand = {0.0};
  for (std::size_t i = 1; i < hull.size(); ++i) {
    double sl = (hull[i].second - hull[i - 1].second) / (hull[i].first - hull[i - 1].first);
    if (sl > 0.0) cand.push_back(sl);
  }
  Line best{0.0, offset(0.0)};
  double best_obj = best.log_c + 0.0;
  for (double c : cand) {
    double lc = offset(c);
    double obj = lc + c * g_ref;
    if (obj < best_obj) {
      best_obj = obj;
      best = {c, lc};
    }
  }
  return best;
}

using Labeler = std::function<std::string(const Sample&)>;

BoundCell fit_cell(const std::string& name, const std::vector<Sample>& all, bool slope, const Labeler& label) {
  BoundCell cell;
  cell.name = name;
  cell.fit_slope = slope;
  std::vector<const Sample*> coarse, fine;
  for (auto& s : all) {
    fine.push_back(&s);
    if (s.coarse) coarse.push_back(&s);
  }
  cell.coarse_points = coarse.size();
  cell.fine_points = fine.size();
  if (coarse.empty()) throw EmptyInput("bound grid cell '" + name + "' has no coarse points");
  double g_ref = 0.0;
  for (auto* p : coarse) g_ref += p->g;
  g_ref /= double(coarse.size());
  Line lc = fit_line(coarse, g_ref, slope);
  Line lf = fit_line(fine, g_ref, slope);
  cell.c = lc.c;
  cell.log_c = lc.log_c;
  cell.c_fine = lf.c;
  cell.log_c_fine = lf.log_c;
  cell.monotone = lf.log_c + lf.c * g_ref >= lc.log_c + lc.c * g_ref - 1e-9;
  cell.deficit_coarse = kNegInf;
  cell.deficit_sup = kNegInf;
  const Sample* arg = nullptr;
  for (auto* p : fine) {
    double d = p->r - lc.log_c - lc.c * p->g;
    if (p->coarse) cell.deficit_coarse = std::max(cell.deficit_coarse, d);
    if (d > cell.deficit_sup) {
      cell.deficit_sup = d;
      arg = p;
    }
  }
  cell.growth = cell.deficit_sup - cell.deficit_coarse;
  cell.deficit_argmax = arg ? label(*arg) : "none";
  cell.stable = std::isfinite(cell.deficit_sup) && cell.growth < 0.1 && cell.monotone;
  return cell;
}

void finish(BoundReport& rep) {
  rep.stable = !rep.cells.empty();
  rep.deficit_sup = kNegInf;
  for (auto& c : rep.cells) {
    rep.stable = rep.stable && c.stable;
    if (c.deficit_sup > rep.deficit_sup) {
      rep.deficit_sup = c.deficit_sup;
      rep.deficit_argmax = c.name + ": " + c.deficit_argmax;
    }
  }
}

// Nested grids: fine has 2 count - 1 points, coarse ones at even indices.
std::vector<double> geometric(double a, double b, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = count == 1 ? a : a * std::pow(b / a, double(i) / (count - 1));
  v.back() = b;
  return v;
}

// Geometric on [a, 1] and [1, b] with 1 as a node, 2 (coarse_count - 1)
// intervals split by log length, so every other node is a coarse node.
std::vector<double> refine_through_one(double a, double b, int coarse_count) {
  const int iv = coarse_count - 1;
  int lo = static_cast<int>(std::lround(iv * std::log(1.0 / a) / std::log(b / a)));
  lo = std::clamp(lo, 1, iv - 1);
  auto left = geometric(a, 1.0, 2 * lo + 1), right = geometric(1.0, b, 2 * (iv - lo) + 1);
  left.insert(left.end(), right.begin() + 1, right.end());
  return left;
}

std::string fmt(const char* f, double a, double b, double c = 0, double d = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Deterministic uniform [0, 1) from the raw 64-bit stream.
double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

double dist_to_tail(Complex z, int start) {
  // distance from z to {-start, -start-1, ...}
  double m = std::max(double(start), std::round(-z.real()));
  return std::abs(z + m);
}

}  // namespace

// ---------- rational polynomials ----------

mpq_class RationalFunction::eval(const mpq_class& s) const {
  auto horner = [&](const RationalPoly& p) {
    mpq_class acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + *it;
    return acc;
  };
  mpq_class d = horner(den);
  if (d == 0) throw PoleError("rational function evaluated at a root of its denominator");
  mpq_class r = horner(num) / d;
  r.canonicalize();
  return r;
}

Complex RationalFunction::eval(Complex s) const {
  auto horner = [&](const RationalPoly& p) {
    Complex acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + it->get_d();
    return acc;
  };
  return horner(num) / horner(den);
}

RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b) {
  if (a.empty() || b.empty()) return {};
  RationalPoly out(a.size() + b.size() - 1, mpq_class(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
  trim(out);
  return out;
}

bool poly_equal(const RationalPoly& a, const RationalPoly& b) {
  RationalPoly x = a, y = b;
  trim(x);
  trim(y);
  return x == y;
}

CoefficientTable build_coefficients(int n, int j, int N) {
  if (n < 1 || j < 1 || N < j) throw InvalidArgument("build_coefficients needs n >= 1 and 1 <= j <= N");
  CoefficientTable t{n, j, N, {}};
  RationalPoly den = {mpq_class(4)};
  for (int k = 0; k <= N - j; ++k) {
    if (k > 0) den = poly_mul(den, {mpq_class(4)});
    // factor (j+k)(s - n/2 + j + k)
    den = poly_mul(den, {mpq_class(j + k) * beta_shift(n, j + k), mpq_class(j + k)});
    t.entries.push_back({{mpq_class(1)}, den});
  }
  return t;
}

bool check_recurrence(const CoefficientTable& t) {
  for (int k = 1; k <= t.N - t.j; ++k) {
    const auto& prev = t.entries[k - 1];
    const auto& cur = t.entries[k];
    RationalPoly factor = {mpq_class(4 * (t.j + k)) * beta_shift(t.n, t.j + k), mpq_class(4 * (t.j + k))};
    if (!poly_equal(poly_mul(prev.num, cur.den), poly_mul(poly_mul(factor, cur.num), prev.den))) return false;
  }
  return true;
}

mpq_class verify_boundary_identity(int n, int j, int N, const mpq_class& s, const mpq_class& xi_sq) {
  if (n < 1 || j < 1 || N < j) throw InvalidArgument("verify_boundary_identity needs n >= 1 and 1 <= j <= N");
  if (xi_sq < 0) throw InvalidArgument("verify_boundary_identity needs xi_sq >= 0");
  CoefficientTable t = build_coefficients(n, j, N);
  const mpq_class beta = s - mpq_class(n, 2);
  for (int i = j; i <= N; ++i)
    if (beta + i == 0) throw PoleError("boundary identity: s lies on n/2 - j - i");
  std::vector<mpq_class> c(N - j + 1);
  for (int k = 0; k <= N - j; ++k) c[k] = t.entries[k].eval(s);
  // B from the Gamma-ratio form 4^{-(N-j+1)} Gamma(j)Gamma(beta+j)/(Gamma(N+1)Gamma(beta+N+1))
  mpq_class b = 1;
  for (int i = j; i <= N; ++i) b /= mpq_class(4 * i) * (beta + i);
  // coefficient of x^{s+2j+2m} f, m = 0..N-j+1
  auto lam = [&](int k) -> mpq_class { return mpq_class(-4 * k) * (beta + k); };  // n a - a^2 - s(n-s), a = s+2k
  mpq_class worst = 0;
  mpq_class xi_pow = 1;
  for (int m = 0; m <= N - j + 1; ++m) {
    mpq_class coef = 0;
    if (m == 0) coef = lam(j) * c[0] + 1;
    else if (m <= N - j) coef = (c[m - 1] - (-lam(j + m)) * c[m]) * xi_pow;
    else coef = (c[N - j] - b) * xi_pow;
    coef = abs(coef);
    if (coef > worst) worst = coef;
    xi_pow *= xi_sq;
  }
  return worst;
}

double verify_boundary_identity(int n, int j, int N, Complex s, double xi_sq) {
  if (n < 1 || j < 1 || N < j) throw InvalidArgument("verify_boundary_identity needs n >= 1 and 1 <= j <= N");
  if (!(xi_sq >= 0.0)) throw InvalidArgument("verify_boundary_identity needs xi_sq >= 0");
  check_pole(n, j, N, s);
  const Complex beta = s - 0.5 * n;
  std::vector<Complex> c(N - j + 1);
  for (int k = 0; k <= N - j; ++k) c[k] = coeff_direct(n, j, k, s);
  // B from the Gamma-ratio form 4^{-(N-j+1)} Gamma(j)Gamma(beta+j)/(Gamma(N+1)Gamma(beta+N+1))
  Complex b = std::exp(-double(N - j + 1) * std::log(4.0) + std::lgamma(double(j)) - std::lgamma(double(N + 1))) *
              gamma_ratio(beta + double(j), beta + double(N + 1));
  auto lam = [&](int k) { return -4.0 * k * (beta + double(k)); };
  double worst = 0.0, scale = 0.0;
  double xi_pow = 1.0;
  for (int m = 0; m <= N - j + 1; ++m) {
    Complex t1, t2;
    if (m == 0) {
      t1 = lam(j) * c[0];
      t2 = 1.0;
    } else if (m <= N - j) {
      t1 = c[m - 1] * xi_pow;
      t2 = lam(j + m) * c[m] * xi_pow;
    } else {
      t1 = c[N - j] * xi_pow;
      t2 = -b * xi_pow;
    }
    worst = std::max(worst, std::abs(t1 + t2));
    scale = std::max({scale, std::abs(t1), std::abs(t2)});
    xi_pow *= xi_sq;
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

// ---------- reports ----------

std::string BoundReport::text() const {
  std::ostringstream os;
  os.precision(6);
  os << "report " << name << "\n  grid: " << grid_spec << "\n  seed: " << seed << "\n  deficit_sup: " << deficit_sup
     << "\n  deficit_argmax: " << deficit_argmax << "\n  stable: " << (stable ? "true" : "false") << "\n";
  for (const auto& c : cells) {
    os << "  cell " << c.name << ": points " << c.coarse_points << "/" << c.fine_points;
    if (c.fit_slope) os << " c=" << c.c;
    os << " logC=" << c.log_c << " deficit_coarse=" << c.deficit_coarse << " deficit_fine=" << c.deficit_sup
       << " growth=" << c.growth << " fine_fit(c=" << c.c_fine << ", logC=" << c.log_c_fine << ")"
       << " monotone=" << (c.monotone ? "yes" : "no") << " stable=" << (c.stable ? "yes" : "no")
       << " argmax=" << c.deficit_argmax << "\n";
  }
  for (const auto& n : notes) os << "  note: " << n << "\n";
  return os.str();
}

BoundReport verify_beta_bounds(const BetaGrid& grid) {
  if (grid.k_max < 1 || !(grid.z_max > 0.0) || !(grid.spacing > 0.0) || !(grid.eps > 0.0))
    throw InvalidArgument("verify_beta_bounds needs a nonempty grid");
  const double h = 0.5 * grid.spacing;
  const int span = static_cast<int>(std::floor(grid.z_max / h));
  std::vector<std::pair<Complex, bool>> zs;
  for (int a = -span; a <= span; ++a)
    for (int b = -span; b <= span; ++b) {
      Complex z(a * h, b * h);
      if (std::abs(z) > grid.z_max || dist_to_tail(z, 0) < grid.eps) continue;
      zs.push_back({z, a % 2 == 0 && b % 2 == 0});
    }
  // the sup sits on the excluded discs' boundary: sample those circles too
  const int ring = 16;
  for (int m = 0; m <= static_cast<int>(grid.z_max); ++m)
    for (int a = 0; a < ring; ++a) {
      Complex z = -double(m) + std::polar(grid.eps, 2.0 * kPi * a / ring);
      if (std::abs(z) > grid.z_max || dist_to_tail(z, 0) < grid.eps * (1 - 1e-12)) continue;
      zs.push_back({z, a % 2 == 0});
    }
  std::vector<std::pair<int, bool>> ks;
  {
    const int cnt = 12;
    std::vector<int> coarse, fine;
    for (double v : geometric(1.0, grid.k_max, cnt)) coarse.push_back(int(std::lround(v)));
    for (double v : geometric(1.0, grid.k_max, 2 * cnt - 1)) fine.push_back(int(std::lround(v)));
    fine.insert(fine.end(), coarse.begin(), coarse.end());
    std::sort(coarse.begin(), coarse.end());
    coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());
    std::sort(fine.begin(), fine.end());
    fine.erase(std::unique(fine.begin(), fine.end()), fine.end());
    for (int k : fine) ks.push_back({k, std::binary_search(coarse.begin(), coarse.end(), k)});
  }
  const std::size_t total = zs.size() * ks.size();
  std::vector<Sample> first(total), second(total);
  parallel_for(total, [&](std::size_t idx) {
    auto [z, zc] = zs[idx / ks.size()];
    auto [k, kc] = ks[idx % ks.size()];
    double lb = beta_ratio_log_abs(z, k);
    Sample s;
    s.p = {z.real(), z.imag(), double(k), 0.0};
    s.coarse = zc && kc;
    s.g = 0.0;
    s.r = lb - k * kLn2 - std::log1p(1.0 / dist_to_tail(z, 0));
    first[idx] = s;
    s.g = std::log(std::abs(z) + k);
    s.r = -lb - (k + std::abs(z)) * kLn2 - 0.5 * kPi * std::abs(z.imag()) - std::log1p(1.0 / dist_to_tail(z, k));
    second[idx] = s;
  });
  Labeler label = [](const Sample& s) { return fmt("z=%.4g%+.4gi k=%.0f", s.p[0], s.p[1], s.p[2]); };
  BoundReport rep;
  rep.name = "beta";
  rep.grid_spec = fmt("z lattice spacing %.4g (fine %.4g) in |z|<=%.4g, dist(z,-N0)>=%.4g", grid.spacing, h, grid.z_max,
                      grid.eps) +
                  ", circles |z+m|=eps at 8 (fine 16) angles" +
                  fmt(", k geometric in [1,%.0f] (12 coarse / 23 fine)", grid.k_max, 0);
  rep.cells.push_back(fit_cell("log|B(z,k)| - k log2 - log(1+1/dist)", first, false, label));
  rep.cells.push_back(fit_cell("log|1/B(z,k)| - (k+|z|)log2 - (pi/2)|Im z| - log(1+1/dist_k) vs log(|z|+k)", second,
                               true, label));
  finish(rep);
  return rep;
}

BoundReport verify_bessel_bounds(const BesselGrid& grid, const BesselHooks& hooks) {
  if (grid.radii < 2 || grid.angles < 1 || grid.xs < 2 || !(grid.lambda_min > 0.0) ||
      !(grid.lambda_max > grid.lambda_min) || !(grid.x_min > 0.0) || !(grid.x_max > grid.x_min))
    throw InvalidArgument("verify_bessel_bounds needs a nonempty grid");
  auto radii = geometric(grid.lambda_min, grid.lambda_max, 2 * grid.radii - 1);
  auto xs = refine_through_one(grid.x_min, grid.x_max, grid.xs);
  const int na = 2 * grid.angles;
  struct Pt {
    Complex lam;
    double x;
    bool coarse;
  };
  std::vector<Pt> pts;
  for (std::size_t ri = 0; ri < radii.size(); ++ri)
    for (int ai = 0; ai < na; ++ai)
      for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        Complex lam = std::polar(radii[ri], 2.0 * kPi * ai / na);
        if (std::abs(lam.real()) < 1e-12) lam.real(0.0);
        if (std::abs(lam.imag()) < 1e-12) lam.imag(0.0);
        pts.push_back({lam, xs[xi], ri % 2 == 0 && ai % 2 == 0 && xi % 2 == 0});
        // both envelopes have a corner at x = |Re lambda|: sample it
        double corner = std::abs(lam.real());
        if (xi == 0 && corner > grid.x_min && corner < grid.x_max)
          pts.push_back({lam, corner, ri % 2 == 0 && ai % 2 == 0});
      }
  const std::size_t total = pts.size();
  std::vector<Complex> kv(total), iv(total);
  std::vector<char> sym_ok(total, 1), failed(total, 0);
  parallel_for(total, [&](std::size_t i) {
    const auto& p = pts[i];
    try {
      Complex k = bessel_k(p.lam, p.x);
      sym_ok[i] = bessel_k(-p.lam, p.x) == k;
      if (hooks.k) k = hooks.k(p.lam, p.x, !p.coarse, k);
      kv[i] = k;
      if (p.lam.real() >= 0.0) {
        Complex v = bessel_i(p.lam, p.x);
        if (hooks.i) v = hooks.i(p.lam, p.x, !p.coarse, v);
        iv[i] = v;
      }
    } catch (const Error&) {
      failed[i] = 1;
    }
  });
  std::vector<Sample> k_hi, k_lo, i_hi, i_lo;
  std::size_t sym_bad = 0, bad = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& p = pts[i];
    if (failed[i]) {
      ++bad;
      continue;
    }
    sym_bad += sym_ok[i] ? 0 : 1;
    const double re = std::abs(p.lam.real()), lx = std::log(p.x);
    const double re_log_re = re > 0.0 ? re * std::log(re) : 0.0;
    Sample s;
    s.p = {p.lam.real(), p.lam.imag(), p.x, 0.0};
    s.coarse = p.coarse;
    const double lk = std::log(std::abs(kv[i]));
    s.g = re;
    if (p.x >= 1.0) {
      s.r = lk - re * std::log(std::max(1.0, re / p.x)) + p.x;
      k_hi.push_back(s);
    }
    if (p.x <= 1.0) {
      s.r = lk - (re_log_re - re * lx);
      k_lo.push_back(s);
    }
    if (p.lam.real() >= 0.0) {
      const double li = std::log(std::abs(iv[i]));
      const double pr = p.lam.real();
      s.g = std::abs(p.lam);
      if (p.x >= 1.0) {
        s.r = li - ((pr > 0.0 ? pr * std::log(std::min(1.0, p.x / pr)) : 0.0) + p.x);
        i_hi.push_back(s);
      }
      if (p.x <= 1.0) {
        s.r = li - (-pr * std::log(std::abs(p.lam)) + pr * lx);
        i_lo.push_back(s);
      }
    }
  }
  Labeler label = [](const Sample& s) { return fmt("lambda=%.4g%+.4gi x=%.4g", s.p[0], s.p[1], s.p[2]); };
  BoundReport rep;
  rep.name = "bessel";
  rep.grid_spec = fmt("|lambda| geometric in [%.4g,%.4g] (%.0f coarse), ", grid.lambda_min, grid.lambda_max,
                      double(grid.radii)) +
                  fmt("%.0f angles, x geometric in [%.4g,%.4g] through 1 (%.0f coarse) plus x = |Re lambda|", grid.angles,
                      grid.x_min, grid.x_max, double(grid.xs)) +
                  "; fine doubles each axis";
  rep.cells.push_back(fit_cell("K x>=1 vs |Re lambda|", k_hi, true, label));
  rep.cells.push_back(fit_cell("K x<=1 vs |Re lambda|", k_lo, true, label));
  rep.cells.push_back(fit_cell("I x>=1 vs |lambda|", i_hi, true, label));
  rep.cells.push_back(fit_cell("I x<=1 vs |lambda|", i_lo, true, label));
  finish(rep);
  rep.notes.push_back("K(-lambda) == K(lambda) bitwise at " + std::to_string(total - bad - sym_bad) + "/" +
                      std::to_string(total - bad) + " points");
  if (bad) rep.notes.push_back(std::to_string(bad) + " points raised an evaluation error");
  rep.stable = rep.stable && sym_bad == 0 && bad == 0;
  return rep;
}

BoundReport verify_f_bound(const FGrid& grid) {
  if (grid.n < 1 || grid.radii < 2 || grid.angles < 1 || grid.args < 2 || !(grid.lambda_min > 0.0) ||
      !(grid.lambda_max > grid.lambda_min) || !(grid.arg_min > 0.0) || !(grid.arg_max > 1.0) || !(grid.arg_min < 1.0))
    throw InvalidArgument("verify_f_bound needs a grid straddling x tau = 1");
  auto radii = geometric(grid.lambda_min, grid.lambda_max, 2 * grid.radii - 1);
  auto args = refine_through_one(grid.arg_min, grid.arg_max, grid.args);
  const int na = 2 * grid.angles;
  struct Pt {
    Complex lam;
    double u, v;
    bool coarse;
  };
  std::vector<Complex> lams;
  std::vector<char> lam_coarse;
  for (std::size_t ri = 0; ri < radii.size(); ++ri)
    for (int ai = 0; ai < na; ++ai) {
      Complex lam = std::polar(radii[ri], 2.0 * kPi * ai / na);
      if (std::abs(lam.real()) < 1e-12) lam.real(0.0);
      if (std::abs(lam.imag()) < 1e-12) lam.imag(0.0);
      lams.push_back(lam);
      lam_coarse.push_back(ri % 2 == 0 && ai % 2 == 0);
    }
  // max(|Re lambda|^{-2 Re lambda}, 1) has a corner at Re lambda = -1
  for (std::size_t ri = 0; ri < radii.size(); ++ri)
    if (radii[ri] > 1.0)
      for (double sgn : {1.0, -1.0}) {
        lams.push_back(Complex(-1.0, sgn * std::sqrt(radii[ri] * radii[ri] - 1.0)));
        lam_coarse.push_back(ri % 2 == 0);
      }
  std::vector<Pt> pts;
  for (std::size_t li = 0; li < lams.size(); ++li)
    for (std::size_t ui = 0; ui < args.size(); ++ui)
      for (std::size_t vi = 0; vi < args.size(); ++vi)
        pts.push_back({lams[li], args[ui], args[vi], lam_coarse[li] && ui % 2 == 0 && vi % 2 == 0});
  std::vector<double> logf(pts.size(), kNegInf);
  std::vector<char> failed(pts.size(), 0);
  parallel_for(pts.size(), [&](std::size_t i) {
    const auto& p = pts[i];
    // x = u/v, x' = 1, tau = v, so x tau = u and x' tau = v
    try {
      logf[i] = std::log(std::abs(f_kernel(0.5 * grid.n + p.lam, grid.n, p.u / p.v, 1.0, p.v)));
    } catch (const Error&) {
      failed[i] = 1;
    }
  });
  std::array<std::vector<Sample>, 4> cells;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (failed[i]) {
      ++bad;
      continue;
    }
    const auto& p = pts[i];
    const double re = p.lam.real(), are = std::abs(re);
    const double front = are > 0.0 ? std::max(-2.0 * re * std::log(are), 0.0) : 0.0;
    int cell;
    double factor;
    if (p.u >= 1.0 && p.v >= 1.0) {
      cell = 0;
      factor = 0.0;
    } else if (p.u < 1.0 && p.v < 1.0) {
      cell = 1;
      factor = std::max(re * std::log(p.u * p.v), 0.0);
    } else if (p.u < 1.0) {
      cell = 2;
      factor = std::max(re * std::log(p.u), 0.0);
    } else {
      cell = 3;
      factor = std::max(re * std::log(p.v), 0.0);
    }
    Sample s;
    s.p = {p.lam.real(), p.lam.imag(), p.u, p.v};
    s.coarse = p.coarse;
    s.g = std::abs(p.lam);
    s.r = logf[i] - front - factor;
    cells[cell].push_back(s);
  }
  Labeler label = [](const Sample& s) {
    return fmt("lambda=%.4g%+.4gi x*tau=%.4g x'*tau=%.4g", s.p[0], s.p[1], s.p[2], s.p[3]);
  };
  BoundReport rep;
  rep.name = "f";
  rep.grid_spec = fmt("n=%.0f, |lambda| geometric in [%.4g,%.4g], ", grid.n, grid.lambda_min, grid.lambda_max) +
                  fmt("%.0f radii x %.0f angles, x tau and x' tau geometric in [%.4g,%.4g]", grid.radii, grid.angles,
                      grid.arg_min, grid.arg_max) +
                  fmt(" through 1 (%.0f coarse), plus Re lambda = -1 on each circle; fine doubles each axis", grid.args, 0);
  const char* names[4] = {"x tau>=1, x' tau>=1", "x tau<1, x' tau<1", "x tau<1<=x' tau", "x' tau<1<=x tau"};
  for (int c = 0; c < 4; ++c) rep.cells.push_back(fit_cell(names[c], cells[c], true, label));
  finish(rep);
  // the fitted bounds of adjacent cells must agree within 10x on the shared
  // boundary, where every cell factor equals 1
  const int adj[4][2] = {{0, 2}, {0, 3}, {1, 2}, {1, 3}};
  double worst = 0.0;
  for (double g : radii)
    for (auto& a : adj) {
      const auto& x = rep.cells[a[0]];
      const auto& y = rep.cells[a[1]];
      worst = std::max(worst, std::abs((x.log_c + x.c * g) - (y.log_c + y.c * g)));
    }
  const bool boundary_ok = worst < std::log(10.0);
  rep.notes.push_back(fmt("largest fitted-bound ratio across a cell boundary: %.4g (limit 10)", std::exp(worst), 0));
  if (bad) rep.notes.push_back(std::to_string(bad) + " points raised an evaluation error");
  rep.stable = rep.stable && boundary_ok && bad == 0;
  return rep;
}

// ---------- resolvent consistency ----------

Complex green_h3(Complex s, double tau) {
  if (!(tau > 1.0)) throw InvalidArgument("green_h3 needs tau > 1");
  double d = std::acosh(tau);
  return std::exp(-(s - 1.0) * d) / (4.0 * kPi * std::sinh(d));
}

Complex residue_contour(int n, int k, double tau, double radius, int nodes) {
  if (k < 0 || nodes < 8 || !(radius > 0.0) || !(radius < 0.5))
    throw InvalidArgument("residue_contour needs k >= 0, nodes >= 8, 0 < radius < 1/2");
  Complex acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    Complex e = std::polar(1.0, 2.0 * kPi * i / nodes);
    Complex s = -double(k) + radius * e;
    acc += resolvent_kernel_tau(n, s, tau, KernelMethod::Series).value * radius * e;
  }
  return acc / double(nodes);
}

std::vector<ResolventCase> default_resolvent_cases(std::uint64_t seed, int per_n) {
  if (per_n < 1) throw InvalidArgument("default_resolvent_cases needs per_n >= 1");
  std::mt19937_64 rng(seed);
  std::vector<ResolventCase> out;
  for (int n : {1, 2, 3}) {
    for (int i = 0; i < per_n; ++i) {
      ResolventCase c;
      c.n = n;
      double lo = 0.5 * (n - 1) + 0.25, hi = n + 1.5;
      c.s = Complex(lo + (hi - lo) * unit(rng), -2.0 + 4.0 * unit(rng));
      do {
        c.w = {0.3 + 2.7 * unit(rng), std::vector<double>(n)};
        c.wp = {0.3 + 2.7 * unit(rng), std::vector<double>(n)};
        for (auto& y : c.w.y) y = -1.5 + 3.0 * unit(rng);
        for (auto& y : c.wp.y) y = -1.5 + 3.0 * unit(rng);
      } while (tau(c.w, c.wp) < 1.05);
      out.push_back(std::move(c));
    }
  }
  return out;
}

BoundReport verify_resolvent_consistency(const std::vector<ResolventCase>& cases, const ConsistencyTolerances& tol,
                                         std::uint64_t seed) {
  if (cases.empty()) throw EmptyInput("verify_resolvent_consistency needs at least one case");
  std::vector<double> spread(cases.size(), 0.0), closed(cases.size(), -1.0);
  std::vector<std::string> err(cases.size());
  parallel_for(cases.size(), [&](std::size_t i) {
    const auto& c = cases[i];
    std::vector<Complex> vals;
    for (auto m : {KernelMethod::Series, KernelMethod::Euler, KernelMethod::Hypergeom}) {
      try {
        vals.push_back(resolvent_kernel(c.n, c.s, c.w, c.wp, m).value);
      } catch (const OffDomain&) {
      } catch (const Error& e) {
        err[i] = e.what();
      }
    }
    if (vals.size() < 2) {
      if (err[i].empty()) err[i] = "fewer than two representations apply";
      return;
    }
    for (std::size_t a = 0; a < vals.size(); ++a)
      for (std::size_t b = a + 1; b < vals.size(); ++b)
        spread[i] = std::max(spread[i], std::abs(vals[a] - vals[b]) / std::max(std::abs(vals[a]), std::abs(vals[b])));
    if (c.n == 2) {
      Complex want = green_h3(c.s, tau(c.w, c.wp));
      for (auto& v : vals) closed[i] = std::max(closed[i], std::abs(v - want) / std::abs(want));
    }
  });
  for (std::size_t i = 0; i < cases.size(); ++i)
    if (!err[i].empty()) throw InvalidArgument("resolvent case " + std::to_string(i) + ": " + err[i]);

  BoundReport rep;
  rep.name = "resolvent";
  rep.seed = seed;
  rep.grid_spec = std::to_string(cases.size()) + " cases (n, s, w, w'); residue contours n in {1,2,3}, k in {0,1,2}";
  auto cell = [](const std::string& name, double dev, std::size_t count, std::string arg, double limit) {
    BoundCell c;
    c.name = name;
    c.fit_slope = false;
    c.deficit_coarse = c.deficit_sup = dev;
    c.coarse_points = c.fine_points = count;
    c.deficit_argmax = std::move(arg);
    c.stable = c.monotone = dev < limit;
    c.log_c = c.log_c_fine = std::log(limit);
    return c;
  };
  auto arg_of = [&](const std::vector<double>& v) {
    std::size_t k = std::max_element(v.begin(), v.end()) - v.begin();
    const auto& c = cases[k];
    return fmt("case %.0f n=%.0f s=%.6g%+.6gi", double(k), c.n, c.s.real(), c.s.imag()) +
           fmt(" tau=%.6g", tau(c.w, c.wp), 0);
  };
  rep.cells.push_back(cell("representation spread", *std::max_element(spread.begin(), spread.end()), cases.size(),
                           arg_of(spread), tol.representations));
  std::size_t n2 = std::count_if(closed.begin(), closed.end(), [](double d) { return d >= 0.0; });
  if (n2 > 0)
    rep.cells.push_back(cell("n=2 closed form", *std::max_element(closed.begin(), closed.end()), n2, arg_of(closed),
                             tol.closed_form));

  // residues: relative error for odd n, absolute size for even n
  double odd = 0.0, even = 0.0;
  std::string odd_arg, even_arg;
  for (int n : {1, 2, 3})
    for (int k = 0; k <= 2; ++k)
      for (double t : {1.2, 2.0, 3.5}) {
        Complex got = residue_contour(n, k, t);
        if (n % 2) {
          Complex want = residue_kernel_tau(n, k, t);
          double d = std::abs(got - want) / std::abs(want);
          if (d >= odd) {
            odd = d;
            odd_arg = fmt("n=%.0f k=%.0f tau=%.4g", n, k, t);
          }
        } else if (std::abs(got) >= even) {
          even = std::abs(got);
          even_arg = fmt("n=%.0f k=%.0f tau=%.4g", n, k, t);
        }
      }
  rep.cells.push_back(cell("odd-n residue contour vs closed kernel", odd, 18, odd_arg, tol.residue));
  rep.cells.push_back(cell("even-n contour magnitude", even, 9, even_arg, tol.residue_even));
  finish(rep);
  return rep;
}

}  // namespace reslab
