#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "reslab/cusp_model.hpp"
#include "reslab/hp.hpp"

namespace reslab {

// Japanese bracket sqrt(1 + u^2).
double japanese(double u);
// [x]_- = max(-x, 0)
double neg_part(double x);

// beta(m) = min_positive_b(g, m) for m = 1..m_max, kept in log form.
struct BetaTable {
  std::vector<double> log_beta;  // index m - 1
  std::vector<Mode> witness;     // may be empty for synthetic tables
  int m_max() const { return static_cast<int>(log_beta.size()); }
};

BetaTable beta_table(const ValidatedGroup& g, int m_max);

struct GrowthSample {
  double u = 0.0;
  double value = 0.0;
  double base = 0.0;     // 2<u> log<u>
  double bracket = 0.0;  // unclamped sup, -inf on an empty range
  std::optional<int> witness_m;
  std::optional<Mode> witness_mode;
};

/// Lambda(u) = 2<u>log<u> + max(0, sup_{1<=m<=|u|} [2(|u|-m) log(1/beta(m)) - 2m log m]).
/// Ties in the sup go to the smallest m.
GrowthSample lambda_growth(const ValidatedGroup& g, double u);
GrowthSample lambda_growth(const BetaTable& table, double u);
// one shared beta table for the whole grid
std::vector<GrowthSample> growth_profile(const ValidatedGroup& g, const std::vector<double>& u_grid);

/// max of lambda_growth over the cusps; throws EmptyInput.
double lambda_x(const std::vector<ValidatedGroup>& groups, double u);

struct DiophantineFit {
  double c_fit = 0.0;
  double gamma_fit = 0.0;
  double c_lower = 0.0;    // largest c with beta(m) >= c m^{-gamma_fit} for all m
  double max_dip = 0.0;    // max over m of (fit - log beta(m)), nats
  bool bounded_below = false;  // max_dip <= log 2
  bool diophantine = false;    // gamma_fit <= gamma_limit
  std::vector<int> envelope_m;
  std::vector<double> envelope_log_beta;
  std::string report;
};

/// Least-squares fit of log beta(m) = log c - gamma log m over the dyadic
/// lower envelope (minimum of beta over each block [2^k, 2^{k+1}) within
/// 1..m_max).
DiophantineFit check_diophantine(const ValidatedGroup& g, int m_max, double gamma_limit = 2.0);
DiophantineFit check_diophantine(const BetaTable& table, double gamma_limit = 2.0);

struct Convergent {
  mpz_class a;  // partial quotient
  mpz_class p;
  mpz_class q;
};

/// Convergents of alpha in (0, 1), at most depth of them. Stops early when the
/// expansion terminates; throws PrecisionExhausted once 2 log2 q_k would reach
/// the working precision.
std::vector<Convergent> continued_fraction(const BigReal& alpha, int depth);
std::vector<Convergent> continued_fraction(const mpq_class& alpha, int depth);

struct WorstCaseSpec {
  int q = 1;
  int depth = 4;
  double ell = 1.0;
  int precision_bits = 65600;
};

struct WorstCaseRow {
  int k = 0;
  long m = 0;  // a_k
  long j = 0;  // -sum_{l<=k} a_k / a_l
  double predicted_b = 0.0;  // (2 pi a_k / ell) 2^{-a_k^q}
  double computed_b = 0.0;
  double log_predicted_b = 0.0;
  double log_computed_b = 0.0;
};

struct WorstCaseResult {
  BigReal theta_turns{64};      // theta / 2 pi = sum_{l<=depth} 1/a_l
  std::vector<mpz_class> a;     // a_1..a_depth
  std::vector<WorstCaseRow> table;  // k < depth
  CuspGroup group;              // n = 3, rank 1, rotation theta, translation ell
};

/// a_1 = 2, a_{l+1} = 2^{a_l^q}; needs precision_bits >= a_depth^q + 64.
WorstCaseResult worst_case_angle(const WorstCaseSpec& spec);

}  // namespace reslab
