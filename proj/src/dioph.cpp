#include "reslab/dioph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "reslab/error.hpp"
#include "reslab/parallel.hpp"

namespace reslab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;

double log2_mpz(const mpz_class& z) {
  long e = 0;
  double m = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log2(m) + double(e);
}

// Convergents of the exact rational x in (0, 1); guard_bits < 0 disables the
// precision guard.
std::vector<Convergent> cf_exact(mpq_class x, int depth, long guard_bits) {
  if (depth < 1) throw InvalidArgument("continued_fraction needs depth >= 1");
  if (!(x > 0 && x < 1)) throw InvalidArgument("continued_fraction needs alpha in (0, 1)");
  std::vector<Convergent> out;
  mpz_class p_prev = 1, q_prev = 0, p = 0, q = 1;
  mpz_class num = x.get_num(), den = x.get_den();
  // x = num/den; each step inverts: den/num = a + r/num
  while (static_cast<int>(out.size()) < depth && num != 0) {
    mpz_class a, r;
    mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), den.get_mpz_t(), num.get_mpz_t());
    mpz_class pn = a * p + p_prev, qn = a * q + q_prev;
    if (guard_bits >= 0 && r != 0 && 2.0 * log2_mpz(qn) >= double(guard_bits))
      throw PrecisionExhausted("continued_fraction: convergent denominators exceed the working precision");
    p_prev = p;
    q_prev = q;
    p = pn;
    q = qn;
    out.push_back({a, p, q});
    den = num;
    num = r;
  }
  return out;
}

}  // namespace

double japanese(double u) { return std::hypot(1.0, u); }

double neg_part(double x) { return std::max(-x, 0.0); }

BetaTable beta_table(const ValidatedGroup& g, int m_max) {
  if (m_max < 0) throw InvalidArgument("beta_table needs m_max >= 0");
  BetaTable t;
  t.log_beta.resize(m_max);
  t.witness.resize(m_max);
  parallel_for(static_cast<std::size_t>(m_max), [&](std::size_t i) {
    MinPositiveB mp = min_positive_b(g, static_cast<int>(i) + 1);
    t.log_beta[i] = mp.log_b;
    t.witness[i] = std::move(mp.witness);
  });
  return t;
}

GrowthSample lambda_growth(const BetaTable& table, double u) {
  if (!std::isfinite(u)) throw InvalidArgument("lambda_growth needs finite u");
  GrowthSample out;
  out.u = u;
  double br = japanese(u);
  out.base = 2.0 * br * std::log(br);
  const double au = std::abs(u);
  const double top = std::floor(au);
  if (top > table.m_max()) throw InvalidArgument("lambda_growth: beta table too short for |u|");
  const int mt = static_cast<int>(top);
  out.bracket = -std::numeric_limits<double>::infinity();
  for (int m = 1; m <= mt; ++m) {
    double v = -2.0 * (au - m) * table.log_beta[m - 1] - (m == 1 ? 0.0 : 2.0 * m * std::log(double(m)));
    if (v > out.bracket) {
      out.bracket = v;
      out.witness_m = m;
    }
  }
  if (out.witness_m && static_cast<int>(table.witness.size()) >= *out.witness_m)
    out.witness_mode = table.witness[*out.witness_m - 1];
  out.value = out.base + std::max(0.0, out.bracket);
  return out;
}

GrowthSample lambda_growth(const ValidatedGroup& g, double u) {
  if (!std::isfinite(u)) throw InvalidArgument("lambda_growth needs finite u");
  return lambda_growth(beta_table(g, static_cast<int>(std::floor(std::abs(u)))), u);
}

std::vector<GrowthSample> growth_profile(const ValidatedGroup& g, const std::vector<double>& u_grid) {
  double top = 0.0;
  for (double u : u_grid) {
    if (!std::isfinite(u)) throw InvalidArgument("growth_profile needs finite u");
    top = std::max(top, std::floor(std::abs(u)));
  }
  BetaTable t = beta_table(g, static_cast<int>(top));
  std::vector<GrowthSample> out;
  out.reserve(u_grid.size());
  for (double u : u_grid) out.push_back(lambda_growth(t, u));
  return out;
}

double lambda_x(const std::vector<ValidatedGroup>& groups, double u) {
  if (groups.empty()) throw EmptyInput("lambda_x needs at least one cusp");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& g : groups) best = std::max(best, lambda_growth(g, u).value);
  return best;
}

DiophantineFit check_diophantine(const BetaTable& table, double gamma_limit) {
  const int mm = table.m_max();
  if (mm < 4) throw InvalidArgument("check_diophantine needs m_max >= 4");
  DiophantineFit fit;
  for (long lo = 1; lo <= mm; lo *= 2) {
    long hi = std::min<long>(2 * lo - 1, mm);
    long arg = lo;
    for (long m = lo + 1; m <= hi; ++m)
      if (table.log_beta[m - 1] < table.log_beta[arg - 1]) arg = m;
    fit.envelope_m.push_back(static_cast<int>(arg));
    fit.envelope_log_beta.push_back(table.log_beta[arg - 1]);
  }
  const std::size_t k = fit.envelope_m.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double x = std::log(double(fit.envelope_m[i])), y = fit.envelope_log_beta[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double den = k * sxx - sx * sx;
  double slope = den > 0.0 ? (k * sxy - sx * sy) / den : 0.0;
  double log_c = (sy - slope * sx) / double(k);
  fit.gamma_fit = -slope;
  fit.c_fit = std::exp(log_c);
  double min_shift = std::numeric_limits<double>::infinity();
  fit.max_dip = -std::numeric_limits<double>::infinity();
  for (int m = 1; m <= mm; ++m) {
    double lm = std::log(double(m));
    double lb = table.log_beta[m - 1];
    fit.max_dip = std::max(fit.max_dip, (log_c - fit.gamma_fit * lm) - lb);
    min_shift = std::min(min_shift, lb + fit.gamma_fit * lm);
  }
  fit.c_lower = std::exp(min_shift);
  fit.bounded_below = fit.max_dip <= kLn2;
  fit.diophantine = fit.gamma_fit <= gamma_limit;
  std::ostringstream os;
  os << "m_max=" << mm << " envelope_points=" << k << " gamma_fit=" << fit.gamma_fit << " c_fit=" << fit.c_fit
     << " c_lower=" << fit.c_lower << " max_dip_nats=" << fit.max_dip
     << (fit.bounded_below ? " envelope bounded below by fit" : " envelope dips below fit")
     << (fit.diophantine ? "; diophantine" : "; non-diophantine");
  fit.report = os.str();
  return fit;
}

DiophantineFit check_diophantine(const ValidatedGroup& g, int m_max, double gamma_limit) {
  if (m_max < 4) throw InvalidArgument("check_diophantine needs m_max >= 4");
  return check_diophantine(beta_table(g, m_max), gamma_limit);
}

std::vector<Convergent> continued_fraction(const mpq_class& alpha, int depth) {
  return cf_exact(alpha, depth, -1);
}

std::vector<Convergent> continued_fraction(const BigReal& alpha, int depth) {
  // an MPFR value is an exact dyadic rational; only convergents well inside
  // its precision are meaningful
  mpq_class x;
  mpfr_get_q(x.get_mpq_t(), alpha.get());
  return cf_exact(x, depth, static_cast<long>(alpha.prec()) - 2);
}

WorstCaseResult worst_case_angle(const WorstCaseSpec& spec) {
  if (spec.q < 1 || spec.depth < 1) throw InvalidArgument("worst_case_angle needs q >= 1 and depth >= 1");
  if (!(spec.ell > 0.0)) throw InvalidArgument("worst_case_angle needs ell > 0");
  if (spec.precision_bits < 64) throw InvalidArgument("worst_case_angle needs precision_bits >= 64");
  WorstCaseResult out;
  // exponents e_l = a_l^q, so a_{l+1} = 2^{e_l}
  std::vector<mpz_class> expo;
  out.a.push_back(2);
  for (int l = 1; l <= spec.depth; ++l) {
    mpz_class e;
    mpz_pow_ui(e.get_mpz_t(), out.a.back().get_mpz_t(), static_cast<unsigned long>(spec.q));
    expo.push_back(e);
    if (l == spec.depth) break;
    if (e > spec.precision_bits) throw PrecisionExhausted("worst_case_angle: a_depth^q exceeds precision_bits - 64");
    mpz_class next = 0;
    mpz_setbit(next.get_mpz_t(), e.get_ui());
    out.a.push_back(next);
  }
  if (expo.back() + 64 > spec.precision_bits)
    throw PrecisionExhausted("worst_case_angle: precision_bits must be at least a_depth^q + 64");

  const int bits = spec.precision_bits;
  out.theta_turns = BigReal(bits);
  mpfr_set_ui(out.theta_turns.get(), 0, MPFR_RNDN);
  BigReal term(bits);
  for (int l = 0; l < spec.depth; ++l) {
    // 1/a_1 = 2^{-1}; 1/a_l = 2^{-e_{l-1}}
    long sh = l == 0 ? 1 : static_cast<long>(expo[l - 1].get_ui());
    mpfr_set_ui_2exp(term.get(), 1, -sh, MPFR_RNDN);
    mpfr_add(out.theta_turns.get(), out.theta_turns.get(), term.get(), MPFR_RNDN);
  }
  out.group = CuspGroup{3, 1, {Generator{{AngleSpec::from_big(out.theta_turns)}, {spec.ell}}}};
  ValidatedGroup g = validate_group(out.group);

  for (int k = 1; k < spec.depth; ++k) {
    const mpz_class& ak = out.a[k - 1];
    if (!ak.fits_slong_p() || ak > std::numeric_limits<int>::max())
      throw PrecisionExhausted("worst_case_angle: a_k too large to index a mode");
    WorstCaseRow row;
    row.k = k;
    row.m = ak.get_si();
    mpz_class jsum = 0;
    for (int l = 0; l < k; ++l) jsum += ak / out.a[l];
    row.j = -jsum.get_si();
    double log_ak = std::log(double(row.m));
    row.log_predicted_b = std::log(2.0 * kPi / spec.ell) + log_ak - expo[k - 1].get_d() * kLn2;
    row.predicted_b = std::exp(row.log_predicted_b);

    auto classes = holonomy_angles(g, static_cast<int>(row.m));
    auto it = std::find_if(classes.begin(), classes.end(),
                           [&](const HolonomyClass& c) { return c.weight == std::vector<int>{int(row.m)}; });
    if (it == classes.end()) throw InvalidArgument("worst_case_angle: weight +a_k class missing");
    // the class stores frac(m theta/2pi); shift j by floor(m theta/2pi)
    BigReal mt(bits);
    mpfr_mul_si(mt.get(), out.theta_turns.get(), row.m, MPFR_RNDN);
    mpfr_floor(mt.get(), mt.get());
    long shift = mpfr_get_si(mt.get(), MPFR_RNDN);
    BValue bv = b_value(g, *it, {row.j + shift});
    row.computed_b = bv.b;
    row.log_computed_b = bv.log_b;
    out.table.push_back(row);
  }
  return out;
}

}  // namespace reslab
