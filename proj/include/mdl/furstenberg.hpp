#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "mdl/analytic.hpp"
#include "mdl/cfrac.hpp"
#include "mdl/flows.hpp"

namespace mdl {

// q_{k+1} / e^{tau q_k} for one k. "exact" when q_{k+1} is materialized,
// "certified" when only the construction rule bounds it.
struct RatioRow {
  int k = 0;
  std::string mode;
  double lo = 0, hi = 0;  // the ratio lies in [lo, hi] (lo == hi in exact mode, up to rounding)
  bool ok = false;        // [lo, hi] inside [1/2, 2]
};

struct FurstenbergAlpha {
  AlphaSpec spec;
  FurstenbergQuotients fq;
  CFExpansion cf;
  int K = 0;
  std::vector<RatioRow> ratios;  // k = 1..K
  bool ratios_ok() const;
};
// tau in [0.5, 4], K >= 3
FurstenbergAlpha build_alpha(double tau, int K);

// theta_k = q_k alpha - l_k in natural-log magnitude with its sign, when the
// enclosure decides it; known == false otherwise
struct ThetaInfo {
  bool known = false;
  int sign = 0;
  double log_abs = 0;  // ln |theta_k|
  double value = 0;    // theta_k as a double (0 when below range)
};
ThetaInfo theta_of(const CFExpansion& cf, int k);

// h(+-q_k) = (e(+-q_k alpha) - 1)/k, k = 1..K. Frequencies beyond int64 or values
// below double range are not stored; their size goes to dropped_log10.
AnalyticSeries build_h(const FurstenbergAlpha& fa);
// g(+-q_k) = 1/k, so that g(x + alpha) - g(x) = h(x)
AnalyticSeries build_g(const FurstenbergAlpha& fa);

struct Correction {
  AnalyticSeries H;  // e^{-2 tau |m|}, |m| <= M
  AnalyticSeries G;  // H(m)/(e(m alpha) - 1), m != 0
  int64_t M = 0;
};
Correction build_correction(const FurstenbergAlpha& fa, int64_t M);
// truncation where e^{-2 tau M} drops below 1e-20
int64_t default_correction_M(double tau);

struct FurstenbergSystem {
  double tau = 1;
  int K = 0;
  FurstenbergAlpha alpha;
  AnalyticSeries h, g, H, G, combined;
  int64_t M = 0;
};
FurstenbergSystem build_system(double tau, int K, int64_t M = 0);

struct CoefRow {
  int k = 0;
  std::string q;       // decimal, or "2^" + bound when only a bound is known
  std::string mode;    // exact | certified
  double lo = 0, hi = 0;  // |(h+H)(q_k)| k e^{tau q_k} lies in [lo, hi]
  bool ok = false;        // inside [1/(4 pi), 4 pi]
};
struct CombinedReport {
  std::vector<CoefRow> rows;
  int64_t off_support_checked = 0;
  int64_t off_support_mismatch = 0;
  bool ok = false;
};
CombinedReport verify_combined_coefficients(const FurstenbergSystem& sys);

// max pointwise |g(x + alpha) - g(x) - h(x)| and |G(x + alpha) - G(x) - (H(x) - H(0))| over samples
struct CoboundaryCheck {
  double err_g = 0, err_G = 0;
};
CoboundaryCheck coboundary_errors(const FurstenbergSystem& sys, int samples, uint64_t seed);

struct IrregularityReport {
  std::vector<int64_t> windows;
  std::vector<cplx> averages;
  double oscillation = 0;  // max |A(N_i) - A(N_j)| over the later half of the windows
};
// skew flow (x1 + alpha, x2 + h(x1)) built from h alone
IrregularityReport irregularity_probe(const FurstenbergSystem& sys, const Character& b, const TorusPoint& x0,
                                      const std::vector<int64_t>& windows);

SkewFlow furstenberg_flow(const FurstenbergSystem& sys, bool with_correction);

std::string furstenberg_json(const FurstenbergSystem& sys, const CombinedReport& rep, int indent = 2);

}  // namespace mdl
