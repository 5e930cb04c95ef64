#include "reslab/cusp_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "reslab/error.hpp"

namespace reslab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

mpq_class reduce_turn(mpq_class q) {
  q.canonicalize();
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  q -= fl;
  return q;
}

std::uint64_t binom_u64(std::int64_t top, std::int64_t r) {
  if (r < 0 || top < 0 || r > top) return 0;
  r = std::min(r, top - r);
  unsigned __int128 acc = 1;
  for (std::int64_t i = 1; i <= r; ++i) {
    acc = acc * static_cast<unsigned __int128>(top - r + i) / static_cast<unsigned __int128>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) throw OverflowError("weight multiplicity exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

// dim of degree-k polynomials in u variables
std::uint64_t poly_dim(int u, std::int64_t k) {
  if (k < 0) return 0;
  if (u == 0) return k == 0 ? 1 : 0;
  return binom_u64(k + u - 1, u - 1);
}

// Harmonic multiplicity of weight w at degree m; see harmonic_weights.
std::uint64_t weight_multiplicity(int u, int t, int m, int l1) {
  std::int64_t mm = std::int64_t(m) - l1;
  if (mm < 0) return 0;
  std::uint64_t acc = poly_dim(u, mm);
  if (t >= 2) {
    for (std::int64_t f = 1; 2 * f <= mm; ++f) {
      std::uint64_t c = binom_u64(f + t - 2, t - 2);
      std::uint64_t p = poly_dim(u, mm - 2 * f);
      if (p != 0 && c > std::numeric_limits<std::uint64_t>::max() / p) throw OverflowError("weight multiplicity exceeds 64 bits");
      acc += c * p;
    }
  }
  return acc;
}

void weights_rec(int t, int remaining, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == t) {
    out.push_back(cur);
    return;
  }
  for (int w = remaining; w >= -remaining; --w) {
    cur.push_back(w);
    weights_rec(t, remaining - std::abs(w), cur, out);
    cur.pop_back();
  }
}

// Weights entering degree m for the group's indexing convention.
std::vector<HarmonicWeight> weights_for(const ValidatedGroup& g, int m) {
  if (g.group().signed_m) return {HarmonicWeight{{m}, 1}};
  if (m < 0) throw InvalidArgument("harmonic degree must be nonnegative");
  return harmonic_weights(g.fiber_dim(), g.planes(), m);
}

double zero_log_threshold(int bits) { return -(bits / 4.0) * std::log(10.0); }

// turns_j + n_j at working precision
std::vector<BigReal> shifted_turns(const ValidatedGroup& g, const HolonomyClass& cls, const std::vector<long>& n) {
  std::vector<BigReal> c;
  c.reserve(n.size());
  for (std::size_t j = 0; j < n.size(); ++j) {
    BigReal v(g.precision_bits());
    mpfr_add_si(v.get(), cls.turns[j].get(), n[j], MPFR_RNDN);
    c.push_back(std::move(v));
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------- AngleSpec

AngleSpec AngleSpec::rational(long p, long q) {
  if (q <= 0) throw AngleParse("rational angle needs a positive denominator");
  AngleSpec a;
  a.kind_ = Kind::Rational;
  a.q_ = reduce_turn(mpq_class(p, q));
  a.hp_ = BigReal::from_mpq(a.q_, a.bits_);
  a.text_ = std::to_string(p) + "/" + std::to_string(q);
  return a;
}

AngleSpec AngleSpec::parse_rational(const std::string& text) {
  auto slash = text.find('/');
  std::string num = text.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  auto is_int = [](const std::string& s) {
    std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i >= s.size()) return false;
    return std::all_of(s.begin() + i, s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!is_int(num) || !is_int(den)) throw AngleParse("malformed rational angle '" + text + "'");
  mpz_class p(num[0] == '+' ? num.substr(1) : num), q(den[0] == '+' ? den.substr(1) : den);
  if (q <= 0) throw AngleParse("rational angle needs a positive denominator: '" + text + "'");
  AngleSpec a;
  a.kind_ = Kind::Rational;
  a.q_ = reduce_turn(mpq_class(p, q));
  a.hp_ = BigReal::from_mpq(a.q_, a.bits_);
  a.text_ = text;
  return a;
}

AngleSpec AngleSpec::decimal(const std::string& value, int precision_bits) {
  if (precision_bits < 64) throw AngleParse("decimal angle needs precision_bits >= 64");
  AngleSpec a;
  a.kind_ = Kind::Decimal;
  a.bits_ = precision_bits;
  try {
    a.hp_ = BigReal::from_string(value, precision_bits).frac();
  } catch (const InvalidArgument&) {
    throw AngleParse("malformed decimal angle '" + value + "'");
  }
  a.text_ = value;
  return a;
}

AngleSpec AngleSpec::from_big(const BigReal& value) {
  AngleSpec a;
  a.kind_ = Kind::Decimal;
  a.bits_ = static_cast<int>(value.prec());
  a.hp_ = value.frac();
  a.text_ = value.to_string(40);
  return a;
}

double AngleSpec::radians() const { return kTwoPi * hp_.to_double(); }

std::string AngleSpec::text() const { return text_; }

// ---------------------------------------------------------------- validation

ValidatedGroup::ValidatedGroup(CuspGroup g) : g_(std::move(g)) {
  const int k0 = g_.rank;
  if (g_.n < 2) throw InvalidArgument("cusp group needs n >= 2");
  if (k0 < 1 || k0 > g_.n - 1) throw InvalidArgument("cusp rank must lie in [1, n-1]");
  if (static_cast<int>(g_.generators.size()) != k0) throw DimensionMismatch("need exactly rank generators");
  t_ = static_cast<int>(g_.generators[0].rotation_angles.size());
  for (const auto& gen : g_.generators) {
    if (static_cast<int>(gen.rotation_angles.size()) != t_)
      throw DimensionMismatch("generators must share the same rotation planes");
    if (static_cast<int>(gen.translation.size()) != k0) throw DimensionMismatch("translation length must equal rank");
    for (const auto& a : gen.rotation_angles) {
      if (a.kind() == AngleSpec::Kind::Decimal) {
        exact_ = false;
        bits_ = std::max(bits_, a.precision_bits());
      }
    }
  }
  if (2 * t_ > g_.n - k0) throw PlaneOverflow("2t exceeds the fiber dimension n - k0");
  if (g_.signed_m && !(k0 == 1 && g_.n - k0 == 2 && t_ == 1))
    throw InvalidArgument("signed m indexing needs rank 1, fiber dimension 2 and one plane");

  v_.resize(k0, k0);
  for (int j = 0; j < k0; ++j)
    for (int i = 0; i < k0; ++i) v_(i, j) = g_.generators[j].translation[i];
  gram_ = v_.transpose() * v_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
  double lmax = es.eigenvalues().maxCoeff();
  double lmin = es.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) throw RankDeficient("translations are linearly dependent");
  // <v_i, v*_j> = delta_ij  <=>  V^T V* = I
  dual_ = v_.transpose().fullPivLu().solve(Eigen::MatrixXd::Identity(k0, k0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ds(dual_.transpose() * dual_);
  dual_min_eig_ = ds.eigenvalues().minCoeff();
}

ValidatedGroup validate_group(const CuspGroup& g) { return ValidatedGroup(g); }

std::vector<Eigen::VectorXd> dual_basis(const ValidatedGroup& g) {
  std::vector<Eigen::VectorXd> out;
  for (int j = 0; j < g.rank(); ++j) out.push_back(g.dual().col(j));
  return out;
}

// ---------------------------------------------------------------- weights

// Sym^m minus Sym^{m-2}: a weight w appears in Sym^m through monomials whose
// t planes carry degrees |w_r| + 2 f_r and whose u = d - 2t fixed coordinates
// carry the rest. Telescoping the two counts leaves
//   P_u(m - |w|) + sum_{F>=1} C(F+t-2, t-2) P_u(m - |w| - 2F),
// P_u(k) = dim of degree-k polynomials in u variables.
std::vector<HarmonicWeight> harmonic_weights(int d, int t, int m) {
  if (d < 1 || t < 0 || 2 * t > d) throw PlaneOverflow("harmonic_weights needs 2t <= d");
  if (m < 0) throw InvalidArgument("harmonic_weights needs m >= 0");
  if (t == 0) {
    std::uint64_t mult = d == 1 ? (m <= 1 ? 1 : 0) : harmonic_dim(d, m);
    if (mult == 0) return {};
    return {HarmonicWeight{{}, mult}};
  }
  int u = d - 2 * t;
  std::vector<std::vector<int>> ws;
  if (u == 0 && t == 1) {
    // harmonics on S^1: only e^{+-i m phi}
    ws.push_back({m});
    if (m > 0) ws.push_back({-m});
  } else {
    std::vector<int> cur;
    weights_rec(t, m, cur, ws);
  }
  std::vector<HarmonicWeight> out;
  for (auto& w : ws) {
    int l1 = 0;
    for (int c : w) l1 += std::abs(c);
    std::uint64_t mult = weight_multiplicity(u, t, m, l1);
    if (mult > 0) out.push_back({w, mult});
  }
  return out;
}

// ---------------------------------------------------------------- holonomy

std::vector<HolonomyClass> holonomy_angles(const ValidatedGroup& g, int m) {
  const int k0 = g.rank();
  const int bits = g.precision_bits();
  const double thr = zero_log_threshold(bits);
  std::vector<HolonomyClass> classes;
  for (const auto& hw : weights_for(g, m)) {
    HolonomyClass c;
    c.multiplicity = hw.multiplicity;
    c.weight = hw.weight;
    for (int j = 0; j < k0; ++j) {
      const auto& angles = g.group().generators[j].rotation_angles;
      if (g.exact()) {
        mpq_class acc = 0;
        for (std::size_t r = 0; r < hw.weight.size(); ++r) acc += hw.weight[r] * angles[r].turns_exact();
        acc = reduce_turn(acc);
        c.turns.push_back(BigReal::from_mpq(acc, bits));
        c.turns_exact.push_back(acc);
      } else {
        BigReal acc(bits), tmp(bits);
        for (std::size_t r = 0; r < hw.weight.size(); ++r) {
          if (angles[r].kind() == AngleSpec::Kind::Rational) {
            mpq_class q = hw.weight[r] * angles[r].turns_exact();
            mpfr_set_q(tmp.get(), q.get_mpq_t(), MPFR_RNDN);
          } else {
            mpfr_mul_si(tmp.get(), angles[r].turns().get(), hw.weight[r], MPFR_RNDN);
          }
          mpfr_add(acc.get(), acc.get(), tmp.get(), MPFR_RNDN);
        }
        BigReal fr = acc.frac();
        // values within the zero threshold of an integer collapse onto it
        BigReal one_minus(bits);
        mpfr_ui_sub(one_minus.get(), 1, fr.get(), MPFR_RNDN);
        if (fr.log_abs() < thr || one_minus.log_abs() < thr) mpfr_set_zero(fr.get(), 1);
        c.turns.push_back(std::move(fr));
      }
      c.angles.push_back(kTwoPi * c.turns.back().to_double());
    }
    // merge with an existing class carrying the same angle vector
    bool merged = false;
    for (auto& e : classes) {
      bool same = true;
      for (int j = 0; j < k0 && same; ++j) {
        if (g.exact()) {
          same = e.turns_exact[j] == c.turns_exact[j];
        } else {
          BigReal diff(bits);
          mpfr_sub(diff.get(), e.turns[j].get(), c.turns[j].get(), MPFR_RNDN);
          same = diff.is_zero() || diff.log_abs() < thr;
        }
      }
      if (same) {
        e.multiplicity += c.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) classes.push_back(std::move(c));
  }
  std::stable_sort(classes.begin(), classes.end(), [&](const HolonomyClass& a, const HolonomyClass& b) {
    for (int j = 0; j < k0; ++j) {
      int c = mpfr_cmp(a.turns[j].get(), b.turns[j].get());
      if (c != 0) return c < 0;
    }
    return false;
  });
  return classes;
}

// ---------------------------------------------------------------- b values

BValue b_value(const ValidatedGroup& g, const HolonomyClass& cls, const std::vector<long>& vstar) {
  const int k0 = g.rank();
  if (static_cast<int>(vstar.size()) != k0) throw DimensionMismatch("v* length must equal rank");
  const int bits = g.precision_bits();
  BValue out;
  if (g.exact()) {
    bool zero = true;
    for (int j = 0; j < k0 && zero; ++j) zero = (cls.turns_exact[j] + vstar[j]) == 0;
    if (zero) {
      out.is_zero = true;
      out.log_b = -std::numeric_limits<double>::infinity();
      return out;
    }
  }
  auto c = shifted_turns(g, cls, vstar);
  double lb;
  if (k0 == 1) {
    lb = c[0].log_abs() + std::log(std::abs(g.dual()(0, 0)));
  } else {
    BigReal norm2(bits), comp(bits), tmp(bits);
    for (int i = 0; i < k0; ++i) {
      mpfr_set_zero(comp.get(), 1);
      for (int j = 0; j < k0; ++j) {
        mpfr_mul_d(tmp.get(), c[j].get(), g.dual()(i, j), MPFR_RNDN);
        mpfr_add(comp.get(), comp.get(), tmp.get(), MPFR_RNDN);
      }
      mpfr_sqr(tmp.get(), comp.get(), MPFR_RNDN);
      mpfr_add(norm2.get(), norm2.get(), tmp.get(), MPFR_RNDN);
    }
    lb = 0.5 * norm2.log_abs();
  }
  out.log_b = std::log(kTwoPi) + lb;
  if (!g.exact() && out.log_b < zero_log_threshold(bits)) {
    out.is_zero = true;
    out.log_b = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.b = std::exp(out.log_b);
  return out;
}

BValue b_value(const ValidatedGroup& g, int m, int p, const std::vector<long>& vstar) {
  auto classes = holonomy_angles(g, m);
  if (p < 0 || p >= static_cast<int>(classes.size())) throw InvalidArgument("holonomy class index out of range");
  return b_value(g, classes[p], vstar);
}

namespace {

Mode make_mode(int m, int p, const HolonomyClass& cls, std::vector<long> n, const BValue& bv) {
  Mode md;
  md.m = m;
  md.p = p;
  md.vstar = std::move(n);
  md.angles = cls.angles;
  md.b = bv.b;
  md.log_b = bv.log_b;
  md.is_zero = bv.is_zero;
  md.multiplicity = cls.multiplicity;
  return md;
}

// Calls visit(n) for every integer vector with |turns + n|_2 <= radius.
template <class Visit>
void box_points(const HolonomyClass& cls, double radius, Visit&& visit) {
  const std::size_t k0 = cls.turns.size();
  std::vector<long> lo(k0), hi(k0), n(k0);
  for (std::size_t j = 0; j < k0; ++j) {
    double t = cls.turns[j].to_double();
    lo[j] = static_cast<long>(std::ceil(-t - radius - 1e-12));
    hi[j] = static_cast<long>(std::floor(-t + radius + 1e-12));
    if (lo[j] > hi[j]) return;
    n[j] = lo[j];
  }
  for (;;) {
    visit(n);
    std::size_t j = 0;
    while (j < k0 && n[j] == hi[j]) {
      n[j] = lo[j];
      ++j;
    }
    if (j == k0) return;
    ++n[j];
  }
}

double box_size(const HolonomyClass& cls, double radius) {
  double total = 1.0;
  for (const auto& t : cls.turns) {
    double td = t.to_double();
    double w = std::floor(-td + radius + 1e-12) - std::ceil(-td - radius - 1e-12) + 1.0;
    total *= std::max(0.0, w);
  }
  return total;
}

}  // namespace

std::vector<Mode> enumerate_modes(const ValidatedGroup& g, int m_max, double b_max, const EnumerateOptions& opt) {
  if (m_max < 0 || !(b_max >= 0.0) || !std::isfinite(b_max)) throw InvalidArgument("enumerate_modes needs finite m_max, b_max >= 0");
  // |V*(t + n)| >= sqrt(lambda_min) |t + n|, so the coefficient ball of this
  // radius contains every mode with b <= b_max.
  double radius = b_max / (kTwoPi * std::sqrt(g.dual_min_eig()));
  int m_lo = g.group().signed_m ? -m_max : 0;
  std::vector<std::vector<HolonomyClass>> per_m;
  double predicted = 0.0;
  for (int m = m_lo; m <= m_max; ++m) {
    per_m.push_back(holonomy_angles(g, m));
    for (const auto& c : per_m.back()) predicted += box_size(c, radius);
    if (predicted > double(opt.cap)) throw ExplosionGuard("mode enumeration would exceed the configured cap");
  }
  std::vector<Mode> out;
  for (int m = m_lo; m <= m_max; ++m) {
    const auto& classes = per_m[m - m_lo];
    for (int p = 0; p < static_cast<int>(classes.size()); ++p) {
      box_points(classes[p], radius, [&](const std::vector<long>& n) {
        BValue bv = b_value(g, classes[p], n);
        if (bv.is_zero || bv.b <= b_max) out.push_back(make_mode(m, p, classes[p], n, bv));
      });
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Mode& a, const Mode& b) {
    if (a.m != b.m) return a.m < b.m;
    if (a.p != b.p) return a.p < b.p;
    return a.vstar < b.vstar;
  });
  return out;
}

MinPositiveB min_positive_b(const ValidatedGroup& g, int m) {
  auto classes = holonomy_angles(g, m);
  const int k0 = g.rank();
  bool found = false;
  MinPositiveB best;
  best.log_b = std::numeric_limits<double>::infinity();
  auto consider = [&](int p, const std::vector<long>& n) {
    BValue bv = b_value(g, classes[p], n);
    if (bv.is_zero) return;
    if (!found || bv.log_b < best.log_b) {
      found = true;
      best.b = bv.b;
      best.log_b = bv.log_b;
      best.witness = make_mode(m, p, classes[p], n, bv);
    }
  };
  for (int p = 0; p < static_cast<int>(classes.size()); ++p) {
    const auto& cls = classes[p];
    if (k0 == 1) {
      // turns in [0, 1): the nearest lattice points are n = 0 and n = -1; n = 1
      // covers a zero class
      for (long n : {-1L, 0L, 1L}) consider(p, {n});
      continue;
    }
    // seed an upper bound, then enumerate the coefficient ball it implies
    std::vector<long> base(k0);
    for (int j = 0; j < k0; ++j) base[j] = -std::lround(cls.turns[j].to_double());
    double bound = std::numeric_limits<double>::infinity();
    for (int j = -1; j < k0; ++j) {
      for (long step : {-1L, 1L}) {
        auto n = base;
        if (j >= 0) n[j] += step;
        BValue bv = b_value(g, cls, n);
        if (!bv.is_zero) bound = std::min(bound, bv.b);
      }
    }
    double radius = bound / (kTwoPi * std::sqrt(g.dual_min_eig()));
    box_points(cls, radius, [&](const std::vector<long>& n) { consider(p, n); });
  }
  if (!found) throw InvalidArgument("no positive b at this degree");
  return best;
}

// ---------------------------------------------------------------- radial ops

std::vector<double> delta_i_apply(int d, int m, double b, double r0, double h, const std::vector<double>& f) {
  const std::size_t n = f.size();
  if (n < 5) throw GridTooCoarse("delta_i_apply needs at least 5 grid points");
  if (!(r0 > 0.0) || !(h > 0.0)) throw GridTooCoarse("delta_i_apply needs r0 > 0 and h > 0");
  const double cen = double(m) * (m + d - 2);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d1, d2;
    if (i == 0) {
      d1 = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
      d2 = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h);
    } else if (i == n - 1) {
      d1 = (3 * f[i] - 4 * f[i - 1] + f[i - 2]) / (2 * h);
      d2 = (2 * f[i] - 5 * f[i - 1] + 4 * f[i - 2] - f[i - 3]) / (h * h);
    } else {
      d1 = (f[i + 1] - f[i - 1]) / (2 * h);
      d2 = (f[i + 1] - 2 * f[i] + f[i - 1]) / (h * h);
    }
    double r = r0 + h * double(i);
    out[i] = -d2 - (d - 1) / r * d1 + cen / (r * r) * f[i] + b * b * f[i];
  }
  return out;
}

namespace {

// Large-argument expansion sum_k (+-1)^k a_k(lambda) / z^k shared by
// K ~ sqrt(pi/2z) e^{-z} sum a_k/z^k and I ~ e^z/sqrt(2 pi z) sum (-1)^k a_k/z^k.
// Returns false unless the terms fall below 1e-17 before they start growing.
bool ik_asymptotic_sum(Complex lambda, double z, bool alternate, Complex* out) {
  Complex mu = 4.0 * lambda * lambda, term = 1.0, sum = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / ((alternate ? -8.0 : 8.0) * k * z);
    if (std::abs(term) > last) return false;
    last = std::abs(term);
    sum += term;
    if (last < 1e-17 * std::abs(sum)) {
      *out = sum;
      return true;
    }
  }
  return false;
}

// K_lambda(a) or I_lambda(a) as (log-magnitude exponent, finite factor):
// the value is factor * e^{exponent}, kept apart so e^{-a} and e^{a} can
// cancel before either leaves binary64 range.
void ik_split(Complex lambda, double a, bool is_k, double* expo, Complex* factor) {
  constexpr double kSwitch = 500.0;
  Complex sum;
  if (a > kSwitch && ik_asymptotic_sum(lambda, a, !is_k, &sum)) {
    *expo = is_k ? -a : a;
    *factor = sum * (is_k ? std::sqrt(kPi / (2.0 * a)) : 1.0 / std::sqrt(2.0 * kPi * a));
    return;
  }
  *expo = 0.0;
  *factor = is_k ? bessel_k(lambda, a) : bessel_i(lambda, a);
}

}  // namespace

Complex f_kernel(Complex s, int n, double x, double xp, double tau_arg) {
  if (!(x > 0.0) || !(xp > 0.0) || !(tau_arg > 0.0)) throw InvalidArgument("f_kernel needs x, x', tau > 0");
  Complex lam = s - 0.5 * n;
  double hi = std::max(x, xp), lo = std::min(x, xp);
  double ek, ei;
  Complex fk, fi;
  ik_split(lam, hi * tau_arg, true, &ek, &fk);
  ik_split(lam, lo * tau_arg, false, &ei, &fi);
  return fk * fi * std::exp(ek + ei);
}

double spectral_density(int d, int m, double t, double r, double rp) {
  if (!(t > 0.0) || !(r > 0.0) || !(rp > 0.0)) throw InvalidArgument("spectral_density needs t, r, r' > 0");
  double nu = 0.5 * (d - 2) + m;
  return (2.0 / kPi) * std::pow(r * rp, -0.5 * (d - 2)) * bessel_j(nu, r * t) * bessel_j(nu, rp * t) * t;
}

KernelValue mode_resolvent_kernel(const ValidatedGroup& g, const Mode& mode, Complex s, double x, double r, double xp,
                                  double rp, const ModeQuadrature& quad) {
  const int n = g.n();
  if (!(s.real() > 0.5 * n)) throw OffDomain("mode_resolvent_kernel needs Re s > n/2");
  if (!(x > 0.0) || !(xp > 0.0) || !(r > 0.0) || !(rp > 0.0)) throw InvalidArgument("mode kernel needs positive x, r");
  const int d = g.fiber_dim();
  const int m = std::abs(mode.m);
  const double b = mode.is_zero ? 0.0 : mode.b;
  const double gap = std::abs(x - xp);
  // F(sqrt(t^2+b^2)) ~ e^{-|x-x'| t}; J_nu J_nu t stays O(1)
  double tmax = gap > 0.0 ? quad.decay_nats / gap : std::numeric_limits<double>::infinity();
  if (tmax > quad.t_max) throw ConvergenceError("mode kernel integrand decays too slowly (x too close to x')");
  auto integrand = [&](double t) -> Complex {
    if (t <= 0.0) return 0.0;
    double tau_arg = std::sqrt(t * t + b * b);
    return f_kernel(s, n, x, xp, tau_arg) * (0.5 * kPi) * spectral_density(d, m, t, r, rp);
  };
  // pieces of a few oscillation periods keep each adaptive call well resolved
  double piece = std::max(0.25, 4.0 * kPi / (r + rp));
  int pieces = static_cast<int>(std::ceil(tmax / piece));
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  // coarse pass fixes an absolute target; the refinement then bisects only
  // pieces whose Kronrod error exceeds their share of it
  Complex coarse = 0.0;
  for (int i = 0; i < pieces; ++i)
    coarse += GK::integrate(integrand, i * piece, std::min(tmax, (i + 1) * piece), 0, 0.0);
  const double abs_tol = 0.1 * quad.rel_tol * std::max(std::abs(coarse), 1e-300);
  Complex total = 0.0;
  double err_total = 0.0;
  std::function<void(double, double, unsigned)> refine = [&](double a, double bb, unsigned depth) {
    double err = 0.0;
    Complex v = GK::integrate(integrand, a, bb, 0, 0.0, &err);
    if (err > abs_tol * (bb - a) / tmax && depth < quad.max_depth) {
      double mid = 0.5 * (a + bb);
      refine(a, mid, depth + 1);
      refine(mid, bb, depth + 1);
      return;
    }
    total += v;
    err_total += err;
  };
  for (int i = 0; i < pieces; ++i) refine(i * piece, std::min(tmax, (i + 1) * piece), 0);
  double rel = err_total / std::abs(total);
  if (!(rel <= quad.rel_tol * 10.0)) throw ConvergenceError("mode kernel quadrature missed its error target");
  return {total, rel, Representation::SpectralQuadrature};
}

}  // namespace reslab
