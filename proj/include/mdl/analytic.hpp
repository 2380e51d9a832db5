#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdl/cfrac.hpp"
#include "mdl/fixed.hpp"

namespace mdl {

// Sparse Fourier series sum_m h(m) e(m x).
struct AnalyticSeries {
  std::map<int64_t, cplx> coeffs;  // zero coefficients are not stored
  double tau = 1.0;                // |h(m)| <= c_up e^{-tau |m|}
  std::optional<double> tau2;      // |h(m)| >= c_low e^{-tau2 |m|} on the support pattern
  double c_up = 1.0;
  double c_low = 0.0;
  // log10 of the largest coefficient that could not be stored (frequency beyond
  // int64 or magnitude below double range); -inf when nothing was dropped
  double dropped_log10 = -1e300;

  cplx coef(int64_t m) const {
    auto it = coeffs.find(m);
    return it == coeffs.end() ? cplx{} : it->second;
  }
  void set(int64_t m, cplx v) {
    if (v == cplx{}) coeffs.erase(m);
    else coeffs[m] = v;
  }
  int64_t max_freq() const;
  // truncation M with c_up e^{-tau M} < 1e-14, capped by the largest stored frequency
  int64_t default_truncation() const;
  bool is_real(double tol = 0.0) const;
  // c_up = max |h(m)| e^{tau |m|}; c_low = min over the support of |h(m)| e^{tau2 |m|}
  void fit_constants();

  static AnalyticSeries zero(double tau = 1.0) {
    AnalyticSeries h;
    h.tau = tau;
    return h;
  }
};

AnalyticSeries operator+(const AnalyticSeries& a, const AnalyticSeries& b);

cplx eval_series(const AnalyticSeries& h, double x, int64_t M);
inline cplx eval_series(const AnalyticSeries& h, double x) { return eval_series(h, x, h.max_freq()); }
cplx eval_series(const AnalyticSeries& h, Phase x, int64_t M);

// sum_{j<n} h(x1 + j alpha), term by term
cplx birkhoff_sum_direct(const AnalyticSeries& h, double x1, const AlphaValue& alpha, int64_t n);
// sum_{|m|<=M} h(m) e(m x1) (e(n m alpha) - 1)/(e(m alpha) - 1), ratio read as n when m alpha is an integer
cplx birkhoff_sum_fourier(const AnalyticSeries& h, double x1, const AlphaValue& alpha, int64_t n, int64_t M);
// |fourier(M) - direct| allowance: dropped-coefficient mass plus a floating-point slack
double birkhoff_tail_bound(const AnalyticSeries& h, const AlphaValue& alpha, int64_t n, int64_t M);

// g(m) = h(m)/(e(m alpha) - 1) for |m| <= M, skipping q | m when exclude_q > 0
AnalyticSeries cobounding_series(const AnalyticSeries& h, const AlphaValue& alpha, int64_t exclude_q, int64_t M);
// coefficients of g(x + alpha) - g(x)
AnalyticSeries difference_series(const AnalyticSeries& g, const AlphaValue& alpha);

struct RationalDecomposition {
  AnalyticSeries g;     // cobounding part over q !| m
  AnalyticSeries beta;  // h restricted to q | m; beta(x1) is its value
  int64_t q = 1;
};
RationalDecomposition rational_case_decompose(const AnalyticSeries& h, const AlphaValue& alpha, int64_t M);

// F(n) = sum over sharp q <= Y of sum_{q<=|m|<q+, q|m} h(m) e(m x1) (e(n m alpha)-1)/(e(m alpha)-1).
// Y = +inf gives H(n) over every sharp q the expansion knows.
cplx big_H(const CFExpansion& cf, const AnalyticSeries& h, int64_t B, int64_t n, double x1, double Y);

struct Scale {
  int64_t m = 0;       // m_j
  double theta = 0.0;  // signed m_j alpha - l_j
  double M = 0.0;      // window 1 <= |k| < M
};
Scale scale_from_report(const CaseReport& r, int j);

double phi_j(const AnalyticSeries& h, const Scale& s);
// f_j(x) = sum_{1<=|k|<M} h(m k) e(m k x1) (e(x k) - 1)/(e(k theta) - 1)
cplx f_j(const AnalyticSeries& h, const Scale& s, double x1, double x);
// f_j(n theta), evaluated as a geometric sum so theta below double range is harmless
cplx F_j(const AnalyticSeries& h, const Scale& s, double x1, int64_t n);

struct TaylorCoeffs {
  cplx c0, c1, c2;
  double c3_tilde = 0.0;  // sum |k|^3 |h(m k)|
  double theta = 0.0;
  double remainder_bound_N = 0.0;  // (2 pi)^3/24 c3~ theta^3 N^4
};
TaylorCoeffs taylor_coefficients(const AnalyticSeries& h, const Scale& s, double x1, int64_t N);
// requires label B
TaylorCoeffs caseB_taylor(const AnalyticSeries& h, const CaseReport& r, double x1);
cplx taylor_reconstruct(const TaylorCoeffs& t, int64_t n);
double taylor_remainder(const TaylorCoeffs& t, int64_t n);

// Block contributions of the two series of the absolute-convergence lemma:
// first = sum over q in Q of sum_{q<=|m|<q+, q!|m} |h(m)|/||m alpha||,
// second = same over flat q with q | m.
struct SeriesBlock {
  mpz_class q;
  bool sharp = false;
  double first = 0.0, second = 0.0;
};
std::vector<SeriesBlock> convergence_blocks(const CFExpansion& cf, const AnalyticSeries& h, int64_t B);

}  // namespace mdl
