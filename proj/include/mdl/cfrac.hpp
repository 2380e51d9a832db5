#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mdl/fixed.hpp"

namespace mdl {

struct AnalyticSeries;

struct AlphaSpec {
  enum class Kind { Rational, Quadratic, Quotients, Furstenberg };
  Kind kind = Kind::Rational;
  // Rational
  mpz_class p = 0, q = 1;
  // Quadratic: [a0; pre..., period, period, ...]
  mpz_class a0 = 0;
  std::vector<mpz_class> pre, period;
  // Quotients: a_0..a_K. tail_log2 > 0 means the expansion continues
  // (irrationally) with log2 q_{K+1} >= tail_log2; 0 means the list is the whole number.
  std::vector<mpz_class> quotients;
  double tail_log2 = 0.0;
  // Furstenberg
  double tau = 1.0;
  int depth = 5;

  int precision_bits = 128;  // width of the fixed-point fraction used for n*alpha mod 1

  static AlphaSpec rational(const mpz_class& p, const mpz_class& q);
  static AlphaSpec quadratic(const mpz_class& a0, std::vector<mpz_class> pre, std::vector<mpz_class> period);
  static AlphaSpec explicit_quotients(std::vector<mpz_class> a, double tail_log2 = 0.0);
  static AlphaSpec furstenberg(double tau, int depth);
  static AlphaSpec golden() { return quadratic(0, {}, {1}); }     // (sqrt5 - 1)/2
  static AlphaSpec sqrt2_minus_1() { return quadratic(0, {}, {2}); }

  std::string describe() const;
};

// The number alpha as far as the spec pins it down.
struct AlphaValue {
  bool rational = false;
  mpq_class exact;   // valid when rational
  mpq_class lo, hi;  // alpha in [lo, hi] (a point when rational)
  Phase frac;        // alpha mod 1, 128-bit fixed point
  double err = 0.0;  // bound on |frac - (alpha mod 1)|

  double approx() const { return frac.to_double(); }
  // n*alpha mod 1
  Phase times(int64_t n) const { return n * frac; }
  // whether m*alpha is an integer (only possible when rational)
  bool multiple_is_integer(int64_t m) const;
};

struct CFExpansion {
  std::vector<mpz_class> a;     // a_0..a_K
  std::vector<mpz_class> l, q;  // convergents l_k / q_k
  bool terminated = false;      // alpha rational and fully expanded
  AlphaValue alpha;
  double tail_log2 = 0.0;       // lower bound for log2 q_{K+1} when known beyond the list
  std::string label;

  int K() const { return int(a.size()) - 1; }
  // log2 of q_{k+1} if known (exact or via tail), NaN otherwise
  double log2_successor(int k) const;
};

// Expand alpha to indices 0..depth (rational alphas may stop early).
CFExpansion cf_expand(const AlphaSpec& spec, int depth);
// enclosure width at most 2^-min_bits where the spec allows it
AlphaValue alpha_value(const AlphaSpec& spec, int min_bits = 256);

// Strict 1/(2 q_k q_{k+1}) < |alpha - l_k/q_k| < 1/(q_k q_{k+1}), decided in exact
// rationals over the alpha enclosure. PrecisionError when the enclosure cannot decide.
bool check_convergent_bracket(const CFExpansion& cf, int k);

struct QEntry {
  int k;          // index of q in the expansion
  mpz_class q;
  mpz_class q_plus;      // 0 when q+ is only known through the tail bound
  double log2_q_plus;
  bool sharp;
};
// Partition of the distinct convergent denominators whose successor is known.
std::vector<QEntry> partition_Q(const CFExpansion& cf, int64_t B);

int64_t choose_B(double tau, int64_t b2, double K_bound);

// n*alpha mod 1 with absolute error < 2^-53; PrecisionError if the budget is exceeded
double fractional_phase(const AlphaValue& alpha, int64_t n);

// Denominators q_k of the Furstenberg rule: q_0 = 1, q_1 = 2,
// a_{k+1} = max(1, round(e^{tau q_k} / q_k)). Materialized while e^{tau q_k}
// needs at most bit_budget bits; past that only a log2 lower bound is kept.
struct FurstenbergQuotients {
  std::vector<mpz_class> a, q;
  int requested_depth = 0;
  double tail_log2 = 0.0;
};
FurstenbergQuotients furstenberg_quotients(double tau, int depth, int64_t bit_budget = int64_t(1) << 17);

struct CaseReport {
  int64_t N = 0;
  double tau = 0, tau2 = 0;
  double Y = 0;
  int64_t B = 0;
  double K_bound = 0;
  std::vector<mpz_class> m, m_plus;  // sharp scales <= Y and successors (0 if only log2 known)
  std::vector<double> log2_m_plus;
  std::vector<int> m_index;          // index k with q_k = m_j
  std::vector<double> theta;         // signed m_j alpha - l_j (0 when below double range)
  std::vector<double> log10_theta;   // log10 |theta_j|
  std::vector<double> M;             // windows
  std::vector<double> Phi;
  int J = 0;
  int64_t D = 0;
  int64_t d1 = 0, b2 = 0;
  double C = 0;
  double delta = 0, log_delta = 0;
  double beta = 0, log_beta = 0;
  std::string label;  // NoSharpScale, A, B, C1, C2
  // invariant checks
  bool theta_bracket_ok = true;   // 1/(2 m+) < theta < 1/m+
  bool growth_ok = true;          // m_j+ > m_1^(B^j)
  double lnA_lhs = 0, lnA_rhs = 0, lnB_lhs = 0, lnB_rhs = 0;
};

// B <= 0 selects choose_B with K_bound = sup Phi over scales <= Y.
CaseReport classify_case(const CFExpansion& cf, const AnalyticSeries& h, int64_t N, int64_t d1, int64_t b2,
                         int64_t B = 0);

std::string case_report_json(const CaseReport& r, int indent = 2);

// sum over the window 1 <= |m| < M of |m|^2 |h(q m)|
double phi_window(const AnalyticSeries& h, const mpz_class& q, double M);

// double-precision log2 of a big integer
double log2_mpz(const mpz_class& z);

}  // namespace mdl
