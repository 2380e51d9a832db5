#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mdl/analytic.hpp"
#include "mdl/cfrac.hpp"
#include "mdl/fixed.hpp"
#include "mdl/mobius.hpp"

namespace mdl {

struct SkewFlow;
struct TorusPoint;
struct Character;
struct UnipotentAffine;

struct CorrelationSeries {
  std::vector<int64_t> checkpoints;
  std::vector<cplx> sums;        // S(N_i)
  std::vector<cplx> normalized;  // S(N_i)/N_i
  std::string meta;
  double abs_over_N(size_t i) const { return std::abs(normalized[i]); }
};

// fill(lo, hi, out) writes the phase of n = lo..hi into out[n - lo]; it must be pure.
// Terms with weight(n) == 0 are skipped. weight defaults to mu.
using PhaseFill = std::function<void(int64_t lo, int64_t hi, Phase* out)>;
CorrelationSeries mobius_series(const MobiusTable& table, const std::vector<int64_t>& checkpoints, int threads,
                                const PhaseFill& fill, const std::function<bool(int64_t)>& keep = {});

CorrelationSeries mobius_correlate(const SkewFlow& f, const TorusPoint& x, const Character& b, const MobiusTable& table,
                                   const std::vector<int64_t>& checkpoints, int threads = 0);
CorrelationSeries mobius_correlate(const UnipotentAffine& A, const std::vector<Phase>& x, const std::vector<int64_t>& v,
                                   const MobiusTable& table, const std::vector<int64_t>& checkpoints, int threads = 0);

// phi(n) = sum_i alpha[i] n^i, summed over n = l mod nu
struct PolyPhase {
  std::vector<double> alpha;  // alpha_0 .. alpha_d
  int64_t nu = 1, l = 0;
  Phase at(int64_t n) const;
};
cplx poly_exp_sum(const PolyPhase& phase, const MobiusTable& table, int64_t N, int threads = 0);

// Bilinear criterion over primes p <= e^{1/tau}, at most max_primes of them.
struct BszReport {
  double tau = 0;
  int64_t M = 0, N = 0;
  int64_t primes_tested = 0;
  int64_t prime_bound = 0;  // floor(e^{1/tau}), saturated
  bool prime_cap_hit = false;
  int64_t worst_p1 = 0, worst_p2 = 0;
  double worst_ratio = 0;  // |sum_{m<=M} f(p1 m) conj f(p2 m)| / M
  bool hypothesis_holds = false;
  double mobius_sum_ratio = 0;  // |sum_{n<=N} mu(n) f(n)| / N
  double conclusion_bound = 0;  // 2 sqrt(tau log(1/tau))
  bool conclusion_holds = false;
};
BszReport bsz_test(const std::function<cplx(int64_t)>& f, double tau, int64_t M, int64_t N, const MobiusTable& table,
                   int64_t max_primes = 10000, int threads = 0);
std::string bsz_report_json(const BszReport& r, int indent = 2);

// phi and phi_D of the case (C) third-derivative analysis at scale s
struct PhiPolys {
  int64_t D = 0, d1 = 0, d2 = 0;
  std::vector<std::pair<int64_t, cplx>> phi;    // frequency -> coefficient, window 1 <= |m| < M
  std::vector<std::pair<int64_t, cplx>> phi_D;  // same, |m| <= D
  std::vector<cplx> P;                          // e(d1 D x) phi_D(x) as a polynomial in z = e(x)
  double Phi = 0;                               // (sum_{|m|<=D} m^4 |h(m_J m)|^2)^{1/2}
  double norm_phi_D = 0;                        // ||P||_2
  double tail_bound = 0;                        // K d1^3 e^{-tau D m_J}
  double K = 0;
};
PhiPolys phi_polys(const AnalyticSeries& h, const Scale& s, int64_t D, int64_t d1, int64_t d2, double x1);
cplx eval_trig(const std::vector<std::pair<int64_t, cplx>>& p, double x);

struct LowerBoundReport {
  int degree = 0;
  std::vector<cplx> roots;
  double norm = 0;
  double min_ratio = 0;  // min |P(z)| / ((delta/3)^n ||P||_2) over kept samples
  int64_t samples_kept = 0;
  bool holds = false;
};
// coeffs[i] multiplies z^i
LowerBoundReport poly_lower_bound_check(const std::vector<cplx>& coeffs, double delta, int64_t samples);

struct VdcReport {
  bool precondition_ok = false;
  double violation_x = 0;
  double actual = 0;
  double bound = 0;  // 10 (eta^{1/2} L^{1/6} (b-a) + L^{-1/6} (b-a)^{1/2})
  double ratio = 0;
};
constexpr double kVdcConstant = 10.0;
VdcReport vdc_sum_check(const std::function<double(double)>& F, const std::function<double(double)>& F3, double Lambda,
                        double eta, double a, double b, int samples = 2000);

// ftilde_J(x) = f_J(d1 x) - f_J(d2 x) and its third derivative, termwise over the window
cplx ftilde(const AnalyticSeries& h, const Scale& s, int64_t d1, int64_t d2, double x1, double x);
cplx ftilde_third_derivative(const AnalyticSeries& h, const Scale& s, int64_t d1, int64_t d2, double x1, double x);

// Right sides of the two admissibility conditions on d1 under delta = 3 m^-10,
// in natural logs, one row per candidate scale m.
struct ConditionRow {
  mpz_class m;
  double log_rhs_622 = 0;  // (tau D - tau2) m - log(2 K m^{20 d1 D + 1})
  double log_rhs_623 = 0;  // -20 d1 D log m - log theta - 3 log Y
  bool holds_622 = false, holds_623 = false;  // rhs >= d1^3
};
struct ConditionReport {
  int64_t d1 = 0, D = 0;
  double tau = 0, tau2 = 0, K = 0, Y = 0;
  double turning_m = 0;  // rhs of the first condition increases for m beyond this
  std::vector<ConditionRow> rows;
  bool monotone_past_turn = true;
  bool eventually_holds = false;
};
ConditionReport condition_checks(const CFExpansion& cf, const AnalyticSeries& h, double tau, double tau2, int64_t d1,
                                 int64_t N);

}  // namespace mdl
