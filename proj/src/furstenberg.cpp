#include "mdl/furstenberg.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <mpfr.h>

#include "json.hpp"
#include "mdl/errors.hpp"

namespace mdl {

namespace {

struct Fr {
  mpfr_t v;
  explicit Fr(mpfr_prec_t p) { mpfr_init2(v, p); }
  ~Fr() { mpfr_clear(v); }
  Fr(const Fr&) = delete;
  Fr& operator=(const Fr&) = delete;
};

constexpr double kLo = 1.0 / (4.0 * M_PI), kHi = 4.0 * M_PI;

double log_mpq_abs(const mpq_class& x) { return (log2_mpz(abs(x.get_num())) - log2_mpz(x.get_den())) * M_LN2; }

// q e^{-tau q} for the last materialized q, as a double (0 on underflow)
double eps_of(const mpz_class& q, double tau) {
  double lq = log2_mpz(q) * M_LN2;
  if (lq > 700) return 0.0;
  double qd = q.get_d();
  double l = lq - tau * qd;
  return l < -745 ? 0.0 : std::exp(l);
}

// k e^{-tau q}: the relative weight of H(q_k) after normalizing
double h_weight(int k, const mpz_class& q, double tau) {
  double lq = log2_mpz(q) * M_LN2;
  if (lq > 700) return 0.0;
  double l = std::log(double(k)) - tau * q.get_d();
  return l < -745 ? 0.0 : std::exp(l);
}

}  // namespace

bool FurstenbergAlpha::ratios_ok() const {
  for (auto& r : ratios)
    if (!r.ok) return false;
  return !ratios.empty();
}

FurstenbergAlpha build_alpha(double tau, int K) {
  if (!(tau >= 0.5 && tau <= 4.0)) throw DomainError("build_alpha needs tau in [0.5, 4]");
  if (K < 3) throw DomainError("build_alpha needs K >= 3");
  FurstenbergAlpha fa;
  fa.K = K;
  fa.spec = AlphaSpec::furstenberg(tau, K);
  fa.fq = furstenberg_quotients(tau, K);
  fa.cf = cf_expand(fa.spec, int(fa.fq.q.size()) - 1);
  const auto& q = fa.fq.q;
  const int L = int(q.size()) - 1;
  const double epsL = eps_of(q[size_t(L)], tau);
  for (int k = 1; k <= K; ++k) {
    RatioRow r;
    r.k = k;
    if (k + 1 <= L) {
      r.mode = "exact";
      mpfr_prec_t prec = mpfr_prec_t(log2_mpz(q[size_t(k)])) + 160;
      Fr a(prec), b(prec);
      mpfr_set_z(a.v, q[size_t(k + 1)].get_mpz_t(), MPFR_RNDN);
      mpfr_log(a.v, a.v, MPFR_RNDN);
      mpfr_set_z(b.v, q[size_t(k)].get_mpz_t(), MPFR_RNDN);
      mpfr_mul_d(b.v, b.v, tau, MPFR_RNDN);
      mpfr_sub(a.v, a.v, b.v, MPFR_RNDN);
      r.lo = r.hi = std::exp(mpfr_get_d(a.v, MPFR_RNDN));
    } else {
      // |q_{k+1} - e^{tau q_k}| <= q_k/2 + q_{k-1} <= 1.5 q_k, and q e^{-tau q} only shrinks past q_L
      r.mode = "certified";
      r.lo = 1.0 - 1.5 * epsL;
      r.hi = 1.0 + 1.5 * epsL;
    }
    r.ok = r.lo >= 0.5 && r.hi <= 2.0;
    fa.ratios.push_back(r);
  }
  return fa;
}

ThetaInfo theta_of(const CFExpansion& cf, int k) {
  ThetaInfo t;
  if (k < 0 || k > cf.K()) return t;
  const mpz_class& q = cf.q[size_t(k)];
  const mpz_class& l = cf.l[size_t(k)];
  mpq_class a = q * cf.alpha.lo - l, b = q * cf.alpha.hi - l;
  if (sgn(a) == 0 || sgn(a) != sgn(b)) return t;
  // decided when the enclosure pins |theta| to a relative 2^-40
  mpq_class w = abs(b - a), m = abs(a);
  if (w * mpq_class(mpz_class(1) << 40) > m) return t;
  t.known = true;
  t.sign = sgn(a);
  const mpq_class mid = (a + b) / 2;
  t.log_abs = log_mpq_abs(mid);
  t.value = t.log_abs < -700 ? 0.0 : mid.get_d();
  return t;
}

AnalyticSeries build_h(const FurstenbergAlpha& fa) {
  AnalyticSeries h;
  h.tau = fa.spec.tau;
  const auto& cf = fa.cf;
  for (int k = 1; k <= fa.K; ++k) {
    const double lk = std::log(double(k));
    if (k > cf.K()) {
      // q_k only bounded: |h(q_k)| < 2 pi / (k q_{k+1}) with log2 q_{k+1} beyond the tail bound
      h.dropped_log10 = std::max(h.dropped_log10, (std::log(kTwoPi) - lk - cf.tail_log2 * M_LN2) / M_LN10);
      continue;
    }
    const mpz_class& q = cf.q[size_t(k)];
    ThetaInfo th = theta_of(cf, k);
    if (!th.known) {
      double l2n = cf.log2_successor(k);
      h.dropped_log10 = std::max(h.dropped_log10, (std::log(kTwoPi) - lk - l2n * M_LN2) / M_LN10);
      continue;
    }
    double lmag = std::log(kTwoPi) + th.log_abs - lk;  // |e(theta) - 1| ~ 2 pi |theta|
    if (!mpz_fits_slong_p(q.get_mpz_t()) || th.value == 0.0 || lmag < -690) {
      h.dropped_log10 = std::max(h.dropped_log10, lmag / M_LN10);
      continue;
    }
    int64_t m = q.get_si();
    cplx c = em1_real(th.value) / double(k);
    h.set(m, c);
    h.set(-m, std::conj(c));
  }
  h.fit_constants();
  return h;
}

AnalyticSeries build_g(const FurstenbergAlpha& fa) {
  AnalyticSeries g;
  g.tau = 0.0;
  for (int k = 1; k <= std::min(fa.K, fa.cf.K()); ++k) {
    const mpz_class& q = fa.cf.q[size_t(k)];
    if (!mpz_fits_slong_p(q.get_mpz_t())) continue;
    g.set(q.get_si(), 1.0 / k);
    g.set(-q.get_si(), 1.0 / k);
  }
  g.c_up = g.coeffs.empty() ? 0.0 : 1.0;
  return g;
}

int64_t default_correction_M(double tau) { return int64_t(std::ceil(std::log(1e20) / (2.0 * tau))); }

Correction build_correction(const FurstenbergAlpha& fa, int64_t M) {
  if (M < 1) throw DomainError("correction truncation must be >= 1");
  const double tau = fa.spec.tau;
  Correction c;
  c.M = M;
  c.H.tau = 2 * tau;
  c.H.tau2 = 2 * tau;
  c.G.tau = 2 * tau;
  const mpq_class mid = (fa.cf.alpha.lo + fa.cf.alpha.hi) / 2;
  for (int64_t m = -M; m <= M; ++m) {
    double v = std::exp(-2.0 * tau * double(m < 0 ? -m : m));
    if (v == 0.0) continue;
    c.H.set(m, v);
    if (m == 0) continue;
    // ||m alpha|| from the rational enclosure, so tiny distances keep their digits
    mpq_class x = mpq_class(m) * mid;
    mpz_class r;
    mpz_class twice_num = 2 * x.get_num() + x.get_den();
    mpz_fdiv_q(r.get_mpz_t(), twice_num.get_mpz_t(), mpz_class(2 * x.get_den()).get_mpz_t());
    double d = mpq_class(x - r).get_d();
    c.G.set(m, v / em1_real(d));
  }
  c.H.fit_constants();
  c.G.fit_constants();
  return c;
}

FurstenbergSystem build_system(double tau, int K, int64_t M) {
  FurstenbergSystem s;
  s.tau = tau;
  s.K = K;
  s.alpha = build_alpha(tau, K);
  s.h = build_h(s.alpha);
  s.g = build_g(s.alpha);
  s.M = M > 0 ? M : default_correction_M(tau);
  auto corr = build_correction(s.alpha, s.M);
  s.H = corr.H;
  s.G = corr.G;
  s.combined = s.h + s.H;
  s.combined.tau = tau;
  s.combined.tau2 = 2.1 * tau;
  s.combined.fit_constants();
  return s;
}

CombinedReport verify_combined_coefficients(const FurstenbergSystem& sys) {
  CombinedReport rep;
  const auto& cf = sys.alpha.cf;
  const double tau = sys.tau;
  const int L = cf.K();
  const double epsL = eps_of(cf.q[size_t(L)], tau);
  rep.ok = true;
  for (int k = 1; k <= sys.K; ++k) {
    CoefRow row;
    row.k = k;
    ThetaInfo th = k <= L ? theta_of(cf, k) : ThetaInfo{};
    if (k <= L) row.q = cf.q[size_t(k)].get_str();
    else {
      char buf[64];
      std::snprintf(buf, sizeof buf, ">= 2^%.6g", cf.tail_log2);
      row.q = buf;
    }
    if (th.known) {
      row.mode = "exact";
      const mpz_class& q = cf.q[size_t(k)];
      mpfr_prec_t prec = mpfr_prec_t(log2_mpz(q)) + 256;
      Fr t(prec), s(prec), re(prec), im(prec), e(prec), tmp(prec);
      mpq_class mid = (cf.alpha.lo + cf.alpha.hi) / 2;
      mpq_class thq = q * mid - cf.l[size_t(k)];
      mpfr_set_q(t.v, thq.get_mpq_t(), MPFR_RNDN);
      mpfr_const_pi(tmp.v, MPFR_RNDN);
      mpfr_mul(t.v, t.v, tmp.v, MPFR_RNDN);  // pi theta
      // e(theta) - 1 = -2 sin^2(pi theta) + i sin(2 pi theta)
      mpfr_sin(s.v, t.v, MPFR_RNDN);
      mpfr_sqr(re.v, s.v, MPFR_RNDN);
      mpfr_mul_si(re.v, re.v, -2, MPFR_RNDN);
      mpfr_mul_2ui(tmp.v, t.v, 1, MPFR_RNDN);
      mpfr_sin(im.v, tmp.v, MPFR_RNDN);
      // times k e^{tau q}, plus H(q) k e^{tau q} = k e^{-tau q}
      mpfr_set_z(e.v, q.get_mpz_t(), MPFR_RNDN);
      mpfr_mul_d(e.v, e.v, tau, MPFR_RNDN);
      mpfr_exp(tmp.v, e.v, MPFR_RNDN);
      mpfr_mul(re.v, re.v, tmp.v, MPFR_RNDN);
      mpfr_mul(im.v, im.v, tmp.v, MPFR_RNDN);
      mpfr_neg(e.v, e.v, MPFR_RNDN);
      mpfr_exp(tmp.v, e.v, MPFR_RNDN);
      mpfr_mul_si(tmp.v, tmp.v, k, MPFR_RNDN);
      mpfr_add(re.v, re.v, tmp.v, MPFR_RNDN);
      mpfr_hypot(tmp.v, re.v, im.v, MPFR_RNDN);
      row.lo = row.hi = mpfr_get_d(tmp.v, MPFR_RNDN);
    } else {
      // ||q_k alpha|| in (1/(2 q_{k+1}), 1/q_{k+1}), q_{k+1}/e^{tau q_k} in [1 - 1.5 eps, 1 + 1.5 eps],
      // 4 t <= 2 sin(pi t) <= 2 pi t
      row.mode = "certified";
      double w = k <= L ? h_weight(k, cf.q[size_t(k)], tau) : 0.0;
      row.lo = 2.0 / (1.0 + 1.5 * epsL) - w;
      row.hi = 2.0 * M_PI / (1.0 - 1.5 * epsL) + w;
    }
    row.ok = row.lo >= kLo && row.hi <= kHi;
    rep.ok = rep.ok && row.ok;
    rep.rows.push_back(row);
  }
  std::vector<int64_t> support;
  for (auto& [m, c] : sys.h.coeffs) support.push_back(m);
  for (auto& [m, c] : sys.H.coeffs) {
    if (std::find(support.begin(), support.end(), m) != support.end()) continue;
    ++rep.off_support_checked;
    cplx v = sys.combined.coef(m);
    if (v != cplx(std::exp(-2.0 * sys.tau * double(m < 0 ? -m : m)), 0.0)) ++rep.off_support_mismatch;
  }
  rep.ok = rep.ok && rep.off_support_mismatch == 0;
  return rep;
}

CoboundaryCheck coboundary_errors(const FurstenbergSystem& sys, int samples, uint64_t seed) {
  CoboundaryCheck c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Phase a = sys.alpha.cf.alpha.frac;
  const cplx H0 = sys.H.coef(0);
  for (int i = 0; i < samples; ++i) {
    Phase x = Phase::from_double(U(rng));
    cplx dg = eval_series(sys.g, x + a, sys.g.max_freq()) - eval_series(sys.g, x, sys.g.max_freq());
    c.err_g = std::max(c.err_g, std::abs(dg - eval_series(sys.h, x, sys.h.max_freq())));
    cplx dG = eval_series(sys.G, x + a, sys.G.max_freq()) - eval_series(sys.G, x, sys.G.max_freq());
    c.err_G = std::max(c.err_G, std::abs(dG - (eval_series(sys.H, x, sys.H.max_freq()) - H0)));
  }
  return c;
}

SkewFlow furstenberg_flow(const FurstenbergSystem& sys, bool with_correction) {
  SkewFlow f;
  f.a = 1;
  f.c = 0;
  f.d = 1;
  f.alpha_spec = sys.alpha.spec;
  f.alpha = sys.alpha.cf.alpha;
  f.h = with_correction ? sys.combined : sys.h;
  return f;
}

IrregularityReport irregularity_probe(const FurstenbergSystem& sys, const Character& b, const TorusPoint& x0,
                                      const std::vector<int64_t>& windows) {
  IrregularityReport r;
  int64_t prev = 0;
  for (auto w : windows) {
    if (w <= prev) throw DomainError("windows must be strictly increasing and positive");
    prev = w;
  }
  r.windows = windows;
  const SkewFlow f = furstenberg_flow(sys, false);
  const int64_t M = f.h.max_freq();
  long double sr = 0, si = 0;
  double B = 0;  // sum_{j<n} h(x1 + j alpha)
  B += eval_series(f.h, x0.x1, M).real();  // now B(1)
  size_t wi = 0;
  for (int64_t n = 1; n <= windows.back(); ++n) {
    Phase y1 = x0.x1 + n * f.alpha.frac;
    double v = double(b.b2) * B;
    Phase ph = b.b1 * y1 + b.b2 * x0.x2 + Phase::from_double(v - std::floor(v));
    cplx e = e_phase(ph);
    sr += e.real();
    si += e.imag();
    B += eval_series(f.h, y1, M).real();
    if (n == windows[wi]) {
      r.averages.push_back(cplx(double(sr), double(si)) / double(n));
      ++wi;
    }
  }
  size_t start = r.averages.size() / 2;
  for (size_t i = start; i < r.averages.size(); ++i)
    for (size_t j = i + 1; j < r.averages.size(); ++j)
      r.oscillation = std::max(r.oscillation, std::abs(r.averages[i] - r.averages[j]));
  return r;
}

std::string furstenberg_json(const FurstenbergSystem& sys, const CombinedReport& rep, int indent) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["tau"] = sys.tau;
  j["depth"] = sys.K;
  j["construction"] = {{"seed", {{"q0", 1}, {"q1", 2}}},
                       {"rule", "a_{k+1} = max(1, round(e^{tau q_k} / q_k))"},
                       {"ratio_bracket", {0.5, 2.0}},
                       {"ratio_bracket_note", "construction choice; the asymptotic constant is not fixed by the source"}};
  const auto& cf = sys.alpha.cf;
  ordered_json quot = ordered_json::array(), qs = ordered_json::array();
  for (auto& a : cf.a) quot.push_back(a.get_str());
  for (int k = 0; k <= sys.K; ++k) {
    if (k <= cf.K()) qs.push_back({{"k", k}, {"q", cf.q[size_t(k)].get_str()}, {"log2", log2_mpz(cf.q[size_t(k)])}});
    else qs.push_back({{"k", k}, {"q", nullptr}, {"log2_lower_bound", cf.tail_log2}});
  }
  j["quotients"] = quot;
  j["q_k"] = qs;
  ordered_json ratios = ordered_json::array();
  for (auto& r : sys.alpha.ratios)
    ratios.push_back({{"k", r.k}, {"mode", r.mode}, {"lo", r.lo}, {"hi", r.hi}, {"ok", r.ok}});
  j["ratios"] = ratios;
  ordered_json coeffs = ordered_json::array();
  for (auto& [m, c] : sys.h.coeffs) coeffs.push_back({m, c.real(), c.imag()});
  j["h_coefficients"] = coeffs;
  j["h_dropped_log10"] = sys.h.dropped_log10;
  j["H_truncation"] = sys.M;
  ordered_json rows = ordered_json::array();
  for (auto& r : rep.rows)
    rows.push_back({{"k", r.k}, {"q", r.q}, {"mode", r.mode}, {"lo", r.lo}, {"hi", r.hi}, {"ok", r.ok}});
  j["verification"] = {{"bracket", {kLo, kHi}},
                       {"rows", rows},
                       {"off_support_checked", rep.off_support_checked},
                       {"off_support_mismatch", rep.off_support_mismatch},
                       {"ok", rep.ok}};
  return j.dump(indent);
}

}  // namespace mdl
