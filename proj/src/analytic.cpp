#include "mdl/analytic.hpp"

#include <cmath>
#include <limits>

#include "mdl/errors.hpp"

namespace mdl {

namespace {

// Neumaier-compensated complex accumulator
struct CompSum {
  double sr = 0, cr = 0, si = 0, ci = 0;
  static void add1(double& s, double& c, double x) {
    double t = s + x;
    if (std::fabs(s) >= std::fabs(x)) c += (s - t) + x;
    else c += (x - t) + s;
    s = t;
  }
  void add(cplx z) {
    add1(sr, cr, z.real());
    add1(si, ci, z.imag());
  }
  cplx value() const { return {sr + cr, si + ci}; }
};

// (e(n t) - 1)/(e(t) - 1) = sum_{j<n} e(j t), read as n when t is an integer
cplx geometric_ratio(int64_t n, Phase t) {
  if (t.raw == 0) return cplx(double(n), 0.0);
  return em1_phase(n * t) / em1_phase(t);
}

cplx geometric_ratio_real(int64_t n, double t) {
  double s = std::sin(M_PI * t);
  if (s == 0.0) return cplx(double(n), 0.0);
  double num = std::sin(M_PI * double(n) * t);
  return e_real(0.5 * double(n - 1) * t) * (num / s);
}

}  // namespace

int64_t AnalyticSeries::max_freq() const {
  int64_t M = 0;
  for (auto& [m, c] : coeffs) M = std::max(M, m < 0 ? -m : m);
  return M;
}

int64_t AnalyticSeries::default_truncation() const {
  int64_t top = max_freq();
  if (top == 0) return 1;
  double M = std::ceil(std::log(std::max(c_up, 1e-300) / 1e-14) / tau);
  if (!(M >= 1)) M = 1;
  return std::min<int64_t>(top, int64_t(std::min(M, 9e18)));
}

bool AnalyticSeries::is_real(double tol) const {
  for (auto& [m, c] : coeffs)
    if (std::abs(coef(-m) - std::conj(c)) > tol) return false;
  return true;
}

void AnalyticSeries::fit_constants() {
  double lup = -std::numeric_limits<double>::infinity();
  double llow = std::numeric_limits<double>::infinity();
  for (auto& [m, c] : coeffs) {
    double am = double(m < 0 ? -m : m);
    double la = std::log(std::abs(c));
    lup = std::max(lup, la + tau * am);
    if (tau2) llow = std::min(llow, la + *tau2 * am);
  }
  c_up = coeffs.empty() ? 0.0 : std::exp(lup);
  c_low = (tau2 && !coeffs.empty()) ? std::exp(llow) : 0.0;
}

AnalyticSeries operator+(const AnalyticSeries& a, const AnalyticSeries& b) {
  AnalyticSeries r = a;
  for (auto& [m, c] : b.coeffs) r.set(m, r.coef(m) + c);
  r.tau = std::min(a.tau, b.tau);
  if (a.tau2 && b.tau2) r.tau2 = std::max(*a.tau2, *b.tau2);
  r.dropped_log10 = std::max(a.dropped_log10, b.dropped_log10);
  r.fit_constants();
  return r;
}

cplx eval_series(const AnalyticSeries& h, Phase x, int64_t M) {
  CompSum s;
  for (auto& [m, c] : h.coeffs) {
    if (m > M || m < -M) continue;
    s.add(c * e_phase(m * x));
  }
  return s.value();
}

cplx eval_series(const AnalyticSeries& h, double x, int64_t M) { return eval_series(h, Phase::from_double(x), M); }

cplx birkhoff_sum_direct(const AnalyticSeries& h, double x1, const AlphaValue& alpha, int64_t n) {
  if (n < 0) throw DomainError("birkhoff sum needs n >= 0");
  const Phase X = Phase::from_double(x1);
  const int64_t M = h.max_freq();
  CompSum s;
  Phase p = X;
  for (int64_t j = 0; j < n; ++j) {
    s.add(eval_series(h, p, M));
    p += alpha.frac;  // exact: fixed-point addition wraps mod 1
  }
  return s.value();
}

cplx birkhoff_sum_fourier(const AnalyticSeries& h, double x1, const AlphaValue& alpha, int64_t n, int64_t M) {
  if (n < 0) throw DomainError("birkhoff sum needs n >= 0");
  if (M < 1) throw DomainError("birkhoff_sum_fourier needs M >= 1");
  if (n == 0) return {};
  const Phase X = Phase::from_double(x1);
  CompSum s;
  for (auto& [m, c] : h.coeffs) {
    if (m > M || m < -M) continue;
    cplx ratio = alpha.multiple_is_integer(m) ? cplx(double(n), 0.0) : geometric_ratio(n, alpha.times(m));
    s.add(c * e_phase(m * X) * ratio);
  }
  return s.value();
}

double birkhoff_tail_bound(const AnalyticSeries& h, const AlphaValue& alpha, int64_t n, int64_t M) {
  double dropped = 0, total = 0, inv = 0;
  for (auto& [m, c] : h.coeffs) {
    double a = std::abs(c);
    total += a;
    if (m > M || m < -M) dropped += a;
    else if (!alpha.multiple_is_integer(m)) inv += a / std::max(dist_int(alpha.times(m)), 1e-300);
  }
  return double(n) * dropped + 1e-13 * double(n) * total + 1e-14 * inv;
}

AnalyticSeries cobounding_series(const AnalyticSeries& h, const AlphaValue& alpha, int64_t exclude_q, int64_t M) {
  AnalyticSeries g;
  g.tau = h.tau;
  for (auto& [m, c] : h.coeffs) {
    if (m > M || m < -M) continue;
    if (exclude_q > 0 && m % exclude_q == 0) continue;
    if (alpha.multiple_is_integer(m))
      throw DomainError("cobounding series: m*alpha is an integer at m=" + std::to_string(m));
    g.set(m, c / em1_phase(alpha.times(m)));
  }
  g.fit_constants();
  return g;
}

AnalyticSeries difference_series(const AnalyticSeries& g, const AlphaValue& alpha) {
  AnalyticSeries h;
  h.tau = g.tau;
  for (auto& [m, c] : g.coeffs) h.set(m, c * em1_phase(alpha.times(m)));
  h.fit_constants();
  return h;
}

RationalDecomposition rational_case_decompose(const AnalyticSeries& h, const AlphaValue& alpha, int64_t M) {
  if (!alpha.rational) throw DomainError("rational_case_decompose needs a rational alpha");
  RationalDecomposition r;
  mpz_class den = alpha.exact.get_den();
  if (!mpz_fits_slong_p(den.get_mpz_t())) throw CapacityError("denominator of alpha exceeds 64 bits");
  r.q = den.get_si();
  r.g = cobounding_series(h, alpha, r.q, M);
  r.beta.tau = h.tau;
  for (auto& [m, c] : h.coeffs)
    if (m <= M && m >= -M && m % r.q == 0) r.beta.set(m, c);
  r.beta.fit_constants();
  return r;
}

cplx big_H(const CFExpansion& cf, const AnalyticSeries& h, int64_t B, int64_t n, double x1, double Y) {
  const Phase X = Phase::from_double(x1);
  CompSum s;
  for (auto& e : partition_Q(cf, B)) {
    if (!e.sharp) continue;
    if (e.q.get_d() > Y) continue;
    if (!mpz_fits_slong_p(e.q.get_mpz_t())) continue;
    const int64_t q = e.q.get_si();
    for (auto& [m, c] : h.coeffs) {
      int64_t am = m < 0 ? -m : m;
      if (am < q || m % q != 0) continue;
      if (e.q_plus != 0 && mpz_class(am) >= e.q_plus) continue;
      Phase t = i128(m) * cf.alpha.frac;
      s.add(c * e_phase(m * X) * geometric_ratio(n, t));
    }
  }
  return s.value();
}

Scale scale_from_report(const CaseReport& r, int j) {
  if (j < 0 || j >= r.J) throw RangeError("scale index outside 1..J");
  Scale s;
  if (!mpz_fits_slong_p(r.m[size_t(j)].get_mpz_t())) throw CapacityError("scale m_j beyond 64 bits");
  s.m = r.m[size_t(j)].get_si();
  s.theta = r.theta[size_t(j)];
  s.M = r.M[size_t(j)];
  return s;
}

double phi_j(const AnalyticSeries& h, const Scale& s) { return phi_window(h, mpz_class(s.m), s.M); }

cplx f_j(const AnalyticSeries& h, const Scale& s, double x1, double x) {
  if (s.theta == 0.0) throw PrecisionError("theta_j below double range; evaluate F_j(n) instead");
  const Phase X = Phase::from_double(x1);
  CompSum acc;
  for (auto& [m, c] : h.coeffs) {
    if (m == 0 || m % s.m != 0) continue;
    int64_t k = m / s.m;
    if (double(k < 0 ? -k : k) >= s.M) continue;
    acc.add(c * e_phase(m * X) * em1_real(x * double(k)) / em1_real(double(k) * s.theta));
  }
  return acc.value();
}

cplx F_j(const AnalyticSeries& h, const Scale& s, double x1, int64_t n) {
  const Phase X = Phase::from_double(x1);
  CompSum acc;
  for (auto& [m, c] : h.coeffs) {
    if (m == 0 || m % s.m != 0) continue;
    int64_t k = m / s.m;
    if (double(k < 0 ? -k : k) >= s.M) continue;
    acc.add(c * e_phase(m * X) * geometric_ratio_real(n, double(k) * s.theta));
  }
  return acc.value();
}

TaylorCoeffs taylor_coefficients(const AnalyticSeries& h, const Scale& s, double x1, int64_t N) {
  TaylorCoeffs t;
  t.theta = s.theta;
  const Phase X = Phase::from_double(x1);
  const cplx i2pi(0.0, kTwoPi);
  CompSum c0, c1, c2;
  for (auto& [m, c] : h.coeffs) {
    if (m == 0 || m % s.m != 0) continue;
    int64_t k = m / s.m;
    double ak = double(k < 0 ? -k : k);
    if (ak >= s.M) continue;
    cplx v = c * e_phase(m * X);
    double kd = double(k);
    c0.add(v);
    c1.add(kd * v);
    c2.add(kd * kd * v);
    t.c3_tilde += ak * ak * ak * std::abs(c);
  }
  t.c0 = c0.value();
  t.c1 = i2pi * c1.value();
  t.c2 = i2pi * i2pi / 2.0 * c2.value();
  double th = std::fabs(s.theta);
  double Nd = double(N);
  t.remainder_bound_N = std::pow(kTwoPi, 3) / 24.0 * t.c3_tilde * th * th * th * Nd * Nd * Nd * Nd;
  return t;
}

TaylorCoeffs caseB_taylor(const AnalyticSeries& h, const CaseReport& r, double x1) {
  if (r.label != "B") throw DomainError("caseB_taylor called for case label " + r.label);
  return taylor_coefficients(h, scale_from_report(r, r.J - 1), x1, r.N);
}

cplx taylor_reconstruct(const TaylorCoeffs& t, int64_t n) {
  double nd = double(n);
  return t.c0 * nd + 0.5 * t.c1 * t.theta * nd * (nd - 1) +
         (1.0 / 6.0) * t.c2 * t.theta * t.theta * (nd - 1) * nd * (2 * nd - 1);
}

double taylor_remainder(const TaylorCoeffs& t, int64_t n) {
  // |e(u) - 1 - 2 pi i u - (2 pi i u)^2/2| <= (2 pi |u|)^3/6, summed over j < n
  double nd = double(n);
  double cubes = (nd * (nd - 1) / 2) * (nd * (nd - 1) / 2);
  double th = std::fabs(t.theta);
  return std::pow(kTwoPi, 3) / 6.0 * t.c3_tilde * th * th * th * cubes;
}

std::vector<SeriesBlock> convergence_blocks(const CFExpansion& cf, const AnalyticSeries& h, int64_t B) {
  auto parts = partition_Q(cf, B);
  std::vector<SeriesBlock> out;
  for (auto& e : parts) out.push_back({e.q, e.sharp, 0.0, 0.0});
  for (auto& [m, c] : h.coeffs) {
    if (m == 0) continue;
    mpz_class am = m < 0 ? -m : m;
    int idx = -1;
    for (size_t i = 0; i < parts.size(); ++i) {
      if (parts[i].q > am) break;
      if (parts[i].q_plus == 0 || am < parts[i].q_plus) idx = int(i);
    }
    if (idx < 0) continue;
    const auto& e = parts[size_t(idx)];
    double w = std::abs(c) / std::max(dist_int(cf.alpha.times(m)), 1e-300);
    bool divides = mpz_divisible_p(am.get_mpz_t(), e.q.get_mpz_t()) != 0;
    if (!divides) out[size_t(idx)].first += w;
    else if (!e.sharp) out[size_t(idx)].second += w;
  }
  return out;
}

}  // namespace mdl
