#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "reslab/hp.hpp"
#include "reslab/hyperbolic_kernel.hpp"
#include "reslab/specfn.hpp"

namespace reslab {

// Rotation angle stored as a fraction of a full turn, theta / 2 pi.
class AngleSpec {
 public:
  enum class Kind { Rational, Decimal };

  static AngleSpec rational(long p, long q);
  // "p/q" or an integer; throws AngleParse
  static AngleSpec parse_rational(const std::string& text);
  // decimal string evaluated at precision_bits (>= 64); throws AngleParse
  static AngleSpec decimal(const std::string& value, int precision_bits);
  static AngleSpec from_big(const BigReal& value);

  Kind kind() const { return kind_; }
  int precision_bits() const { return bits_; }
  // reduced to [0, 1)
  const mpq_class& turns_exact() const { return q_; }
  const BigReal& turns() const { return hp_; }
  double radians() const;
  std::string text() const;

 private:
  Kind kind_ = Kind::Rational;
  int bits_ = 128;
  mpq_class q_;
  BigReal hp_{128};
  std::string text_;
};

struct Generator {
  std::vector<AngleSpec> rotation_angles;  // one per shared rotation plane
  std::vector<double> translation;         // length k0
};

struct CuspGroup {
  int n = 0;     // manifold dimension n + 1
  int rank = 0;  // k0
  std::vector<Generator> generators;
  // rank-1, fiber dimension 2, one plane: index modes by m in Z with the
  // single weight m instead of m in N0 with weights +-m
  bool signed_m = false;
};

struct HarmonicWeight {
  std::vector<int> weight;
  std::uint64_t multiplicity = 0;
};

// Angles of one holonomy class at a degree m: all weights sharing the same
// angle vector are merged and their multiplicities summed.
struct HolonomyClass {
  std::vector<double> angles;  // alpha_j in [0, 2 pi)
  std::uint64_t multiplicity = 0;
  std::vector<int> weight;     // first (lexicographically largest) weight of the class
  std::vector<mpq_class> turns_exact;  // alpha_j / 2 pi, exact groups only
  std::vector<BigReal> turns;          // alpha_j / 2 pi at working precision
};

struct Mode {
  int m = 0;
  int p = 0;  // index into holonomy_angles(g, m)
  std::vector<long> vstar;  // coefficients in the dual basis
  std::vector<double> angles;
  double b = 0.0;
  double log_b = 0.0;  // log b_I, finite for nonzero b even when b underflows
  bool is_zero = false;
  std::uint64_t multiplicity = 0;
};

struct BValue {
  double b = 0.0;
  double log_b = 0.0;
  bool is_zero = false;
};

class ValidatedGroup {
 public:
  explicit ValidatedGroup(CuspGroup g);

  const CuspGroup& group() const { return g_; }
  int n() const { return g_.n; }
  int rank() const { return g_.rank; }
  int planes() const { return t_; }
  int fiber_dim() const { return g_.n - g_.rank; }
  bool exact() const { return exact_; }
  int precision_bits() const { return bits_; }
  const Eigen::MatrixXd& translations() const { return v_; }  // columns v_j
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& dual() const { return dual_; }  // columns v*_j
  double dual_min_eig() const { return dual_min_eig_; }

 private:
  CuspGroup g_;
  int t_ = 0;
  bool exact_ = true;
  int bits_ = 128;
  Eigen::MatrixXd v_, gram_, dual_;
  double dual_min_eig_ = 0.0;
};

/// Throws RankDeficient, PlaneOverflow, DimensionMismatch or InvalidArgument.
ValidatedGroup validate_group(const CuspGroup& g);

std::vector<Eigen::VectorXd> dual_basis(const ValidatedGroup& g);

/// Weight multiplicities of the t-torus acting on degree-m harmonics in d
/// variables (t rotation planes, d - 2t fixed coordinates).
std::vector<HarmonicWeight> harmonic_weights(int d, int t, int m);

std::vector<HolonomyClass> holonomy_angles(const ValidatedGroup& g, int m);

/// b = |sum_j alpha_j v*_j + 2 pi v*| = 2 pi |sum_j (turns_j + n_j) v*_j|.
BValue b_value(const ValidatedGroup& g, const HolonomyClass& cls, const std::vector<long>& vstar);
BValue b_value(const ValidatedGroup& g, int m, int p, const std::vector<long>& vstar);

struct EnumerateOptions {
  std::size_t cap = 2'000'000;  // ExplosionGuard threshold on predicted candidates
};

/// All modes with m <= m_max and b <= b_max, ordered by (m, p, v*).
std::vector<Mode> enumerate_modes(const ValidatedGroup& g, int m_max, double b_max,
                                  const EnumerateOptions& opt = {});

struct MinPositiveB {
  double b = 0.0;
  double log_b = 0.0;
  Mode witness;
};

/// Smallest nonzero b at degree m; zeros are excluded exactly for rational
/// angles and below 10^{-bits/4} otherwise.
MinPositiveB min_positive_b(const ValidatedGroup& g, int m);

/// -f'' - ((d-1)/r) f' + (m(m+d-2)/r^2) f + b^2 f on the uniform grid
/// r_i = r0 + i h. Second-order central differences inside, second-order
/// one-sided stencils at the two ends.
std::vector<double> delta_i_apply(int d, int m, double b, double r0, double h, const std::vector<double>& f);

/// F_{s,x,x'}(tau) = K_l(x tau) I_l(x' tau) for x > x', I_l(x tau) K_l(x' tau)
/// for x < x', lambda = s - n/2.
Complex f_kernel(Complex s, int n, double x, double xp, double tau_arg);

/// (2/pi) (r r')^{-(d-2)/2} J_nu(r t) J_nu(r' t) t, nu = (d-2)/2 + m.
double spectral_density(int d, int m, double t, double r, double rp);

struct ModeQuadrature {
  double rel_tol = 1e-10;
  double decay_nats = 40.0;  // truncate once e^{-|x-x'| t} falls below e^{-decay_nats}
  double t_max = 4000.0;
  unsigned max_depth = 18;
};

/// int_0^inf F_{s,x,x'}(sqrt(t^2 + b^2)) (r r')^{-(d-2)/2} J_nu(r t) J_nu(r' t) t dt,
/// i.e. pi/2 times the spectral_density measure. Requires Re s > n/2.
KernelValue mode_resolvent_kernel(const ValidatedGroup& g, const Mode& mode, Complex s, double x, double r,
                                  double xp, double rp, const ModeQuadrature& quad = {});

}  // namespace reslab
