#include "mdl/cfrac.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mdl/analytic.hpp"
#include "mdl/errors.hpp"

namespace mdl {

namespace {

struct Mpfr {
  mpfr_t v;
  explicit Mpfr(mpfr_prec_t p) { mpfr_init2(v, p); }
  ~Mpfr() { mpfr_clear(v); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTailCap = 1e15;

mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

mpz_class floor_q(const mpq_class& x) { return floor_div(x.get_num(), x.get_den()); }

void convergents(const std::vector<mpz_class>& a, std::vector<mpz_class>& l, std::vector<mpz_class>& q) {
  l.assign(a.size(), 0);
  q.assign(a.size(), 0);
  mpz_class lm2 = 0, lm1 = 1, qm2 = 1, qm1 = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    l[k] = a[k] * lm1 + lm2;
    q[k] = a[k] * qm1 + qm2;
    lm2 = lm1;
    lm1 = l[k];
    qm2 = qm1;
    qm1 = q[k];
  }
}

std::vector<mpz_class> euclid(mpq_class x, int max_terms, bool& terminated) {
  std::vector<mpz_class> a;
  terminated = false;
  for (int k = 0; k < max_terms; ++k) {
    mpz_class f = floor_q(x);
    a.push_back(f);
    mpq_class r = x - mpq_class(f);
    if (r == 0) {
      terminated = true;
      break;
    }
    x = 1 / r;
  }
  return a;
}

std::vector<mpz_class> quadratic_terms(const AlphaSpec& s, size_t count) {
  std::vector<mpz_class> a;
  a.push_back(s.a0);
  size_t i = 0;
  while (a.size() < count) {
    if (i < s.pre.size()) a.push_back(s.pre[i]);
    else a.push_back(s.period[(i - s.pre.size()) % s.period.size()]);
    ++i;
  }
  return a;
}

void validate(const AlphaSpec& s) {
  switch (s.kind) {
    case AlphaSpec::Kind::Rational:
      if (s.q < 1) throw DomainError("rational alpha needs q >= 1");
      if (gcd(s.p, s.q) != 1) throw DomainError("rational alpha needs gcd(p, q) = 1");
      break;
    case AlphaSpec::Kind::Quadratic:
      if (s.period.empty()) throw DomainError("quadratic alpha needs a nonempty period");
      for (auto& v : s.pre) if (v < 1) throw DomainError("partial quotients a_k (k>=1) must be >= 1");
      for (auto& v : s.period) if (v < 1) throw DomainError("partial quotients a_k (k>=1) must be >= 1");
      break;
    case AlphaSpec::Kind::Quotients:
      if (s.quotients.empty()) throw DomainError("explicit quotients list is empty");
      for (size_t k = 1; k < s.quotients.size(); ++k)
        if (s.quotients[k] < 1) throw DomainError("partial quotients a_k (k>=1) must be >= 1");
      break;
    case AlphaSpec::Kind::Furstenberg:
      if (!(s.tau > 0)) throw DomainError("furstenberg alpha needs tau > 0");
      break;
  }
}

// quotients (a_0..a_K) and the tail bound for explicit or Furstenberg specs
std::vector<mpz_class> listed_quotients(const AlphaSpec& s, double& tail) {
  if (s.kind == AlphaSpec::Kind::Furstenberg) {
    auto fq = furstenberg_quotients(s.tau, s.depth);
    tail = fq.tail_log2;
    return fq.a;
  }
  tail = s.tail_log2;
  return s.quotients;
}

mpq_class ldexp_q(int64_t e) {
  // 2^e as a rational
  mpz_class one = 1;
  if (e >= 0) return mpq_class(one << e);
  return mpq_class(mpz_class(1), one << (-e));
}

void finish_value(AlphaValue& v) {
  mpq_class mid = (v.lo + v.hi) / 2;
  mpq_class fr = mid - mpq_class(floor_q(mid));
  v.frac = Phase::from_mpq(fr);
  mpq_class w = v.hi - v.lo;
  double wd = w.get_d();
  v.err = wd / 2 + std::ldexp(1.0, -127);
}

}  // namespace

double log2_mpz(const mpz_class& z) {
  if (z == 0) return -std::numeric_limits<double>::infinity();
  long e = 0;
  double d = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log2(std::fabs(d)) + double(e);
}

AlphaSpec AlphaSpec::rational(const mpz_class& p, const mpz_class& q) {
  AlphaSpec s;
  s.kind = Kind::Rational;
  mpz_class g = gcd(p, q);
  if (q < 0) g = -g;
  s.p = g == 0 ? p : mpz_class(p / g);
  s.q = g == 0 ? q : mpz_class(q / g);
  return s;
}
AlphaSpec AlphaSpec::quadratic(const mpz_class& a0, std::vector<mpz_class> pre, std::vector<mpz_class> period) {
  AlphaSpec s;
  s.kind = Kind::Quadratic;
  s.a0 = a0;
  s.pre = std::move(pre);
  s.period = std::move(period);
  return s;
}
AlphaSpec AlphaSpec::explicit_quotients(std::vector<mpz_class> a, double tail_log2) {
  AlphaSpec s;
  s.kind = Kind::Quotients;
  s.quotients = std::move(a);
  s.tail_log2 = tail_log2;
  return s;
}
AlphaSpec AlphaSpec::furstenberg(double tau, int depth) {
  AlphaSpec s;
  s.kind = Kind::Furstenberg;
  s.tau = tau;
  s.depth = depth;
  return s;
}

std::string AlphaSpec::describe() const {
  std::ostringstream os;
  auto list = [&](const std::vector<mpz_class>& v) {
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i].get_str();
  };
  switch (kind) {
    case Kind::Rational: os << "rational(" << p.get_str() << "/" << q.get_str() << ")"; break;
    case Kind::Quadratic:
      os << "quadratic[" << a0.get_str() << ";";
      list(pre);
      os << (pre.empty() ? "" : ",") << "(";
      list(period);
      os << ")]";
      break;
    case Kind::Quotients:
      os << "quotients[";
      list(quotients);
      os << "]";
      if (tail_log2 > 0) os << "+tail(log2>=" << tail_log2 << ")";
      break;
    case Kind::Furstenberg: os << "furstenberg(tau=" << tau << ",depth=" << depth << ")"; break;
  }
  return os.str();
}

bool AlphaValue::multiple_is_integer(int64_t m) const {
  if (!rational) return m == 0;
  mpz_class den = exact.get_den();
  return mpz_divisible_p(mpz_class(m).get_mpz_t(), den.get_mpz_t()) != 0;
}

double CFExpansion::log2_successor(int k) const {
  if (k + 1 <= K()) return log2_mpz(q[size_t(k + 1)]);
  if (k == K() && tail_log2 > 0) return tail_log2;
  return kNaN;
}

AlphaValue alpha_value(const AlphaSpec& spec, int min_bits) {
  validate(spec);
  AlphaValue v;
  switch (spec.kind) {
    case AlphaSpec::Kind::Rational: {
      v.rational = true;
      v.exact = mpq_class(spec.p, spec.q);
      v.exact.canonicalize();
      v.lo = v.hi = v.exact;
      break;
    }
    case AlphaSpec::Kind::Quadratic: {
      size_t count = 8;
      for (;;) {
        auto a = quadratic_terms(spec, count);
        std::vector<mpz_class> l, q;
        convergents(a, l, q);
        size_t K = a.size() - 1;
        if (log2_mpz(q[K]) + log2_mpz(q[K - 1]) > min_bits) {
          mpq_class x(l[K], q[K]), y(l[K - 1], q[K - 1]);
          x.canonicalize();
          y.canonicalize();
          v.lo = std::min(x, y);
          v.hi = std::max(x, y);
          break;
        }
        count *= 2;
      }
      break;
    }
    case AlphaSpec::Kind::Quotients:
    case AlphaSpec::Kind::Furstenberg: {
      double tail = 0;
      auto a = listed_quotients(spec, tail);
      std::vector<mpz_class> l, q;
      convergents(a, l, q);
      size_t K = a.size() - 1;
      mpq_class last(l[K], q[K]);
      last.canonicalize();
      if (tail <= 0) {
        v.rational = true;
        v.exact = last;
        v.lo = v.hi = last;
        break;
      }
      // |alpha - l_K/q_K| < 1/(q_K q_{K+1}) <= 2^{-(log2 q_K + tail)}; sign (-1)^K
      double bits = std::min(tail, double(min_bits) + 64.0);
      int64_t e = int64_t(std::floor(log2_mpz(q[K]) - 1.0)) + int64_t(std::floor(bits));
      if (e < 1) e = 1;
      mpq_class r = ldexp_q(-e);
      if (K % 2 == 0) {
        v.lo = last;
        v.hi = last + r;
      } else {
        v.lo = last - r;
        v.hi = last;
      }
      break;
    }
  }
  finish_value(v);
  return v;
}

CFExpansion cf_expand(const AlphaSpec& spec, int depth) {
  if (depth < 1) throw DomainError("cf_expand needs depth >= 1");
  validate(spec);
  CFExpansion cf;
  cf.label = spec.describe();
  std::vector<mpz_class> full;
  bool known_next = false;  // whether full has an entry past depth
  double tail = 0;
  switch (spec.kind) {
    case AlphaSpec::Kind::Rational: {
      bool term = false;
      mpq_class x(spec.p, spec.q);
      x.canonicalize();
      full = euclid(x, depth + 2, term);
      cf.terminated = term && int(full.size()) <= depth + 1;
      known_next = int(full.size()) > depth + 1;
      break;
    }
    case AlphaSpec::Kind::Quadratic:
      full = quadratic_terms(spec, size_t(depth) + 2);
      known_next = true;
      break;
    case AlphaSpec::Kind::Quotients:
    case AlphaSpec::Kind::Furstenberg:
      full = listed_quotients(spec, tail);
      known_next = int(full.size()) > depth + 1;
      if (!known_next && tail <= 0) cf.terminated = true;
      break;
  }
  std::vector<mpz_class> l, q;
  convergents(full, l, q);
  size_t n = std::min(full.size(), size_t(depth) + 1);
  cf.a.assign(full.begin(), full.begin() + long(n));
  cf.l.assign(l.begin(), l.begin() + long(n));
  cf.q.assign(q.begin(), q.begin() + long(n));
  if (known_next) cf.tail_log2 = log2_mpz(q[n]);
  else cf.tail_log2 = tail;
  int need = int(2 * log2_mpz(cf.q.back()) + 2 * std::max(0.0, std::min(cf.tail_log2, 4096.0)) + 128);
  cf.alpha = alpha_value(spec, std::max(256, need));
  return cf;
}

bool check_convergent_bracket(const CFExpansion& cf, int k) {
  if (k < 0 || k + 1 > cf.K()) throw RangeError("convergent bracket needs q_{k+1} in the expansion");
  if (cf.alpha.rational) throw DomainError("convergent bracket is stated for irrational alpha");
  const mpz_class& qk = cf.q[size_t(k)];
  const mpz_class& qn = cf.q[size_t(k + 1)];
  mpq_class r(cf.l[size_t(k)], qk);
  r.canonicalize();
  mpq_class d1 = cf.alpha.lo - r, d2 = cf.alpha.hi - r;
  if (sgn(d1) * sgn(d2) <= 0) throw PrecisionError("alpha enclosure straddles l_k/q_k");
  mpq_class a1 = abs(d1), a2 = abs(d2);
  mpq_class dmin = std::min(a1, a2), dmax = std::max(a1, a2);
  mpq_class upper(mpz_class(1), qk * qn);
  mpq_class lower(mpz_class(1), 2 * qk * qn);
  if (dmin > lower && dmax < upper) return true;
  if (dmax <= lower || dmin >= upper) return false;
  // The gap to 1/(q_k q_{k+1}) is about q_k/(q_{k+1}^2 a_{k+2}), beyond any enclosure once
  // a_{k+2} is astronomically large. Decide from |alpha - l_k/q_k| = 1/(q_k (q_{k+1} + t q_k)),
  // t = [0; a_{k+2}, ...]: t > 0 as the expansion continues, t <= 1/a_{k+2} < q_{k+1}/q_k.
  const bool continues = k + 2 <= cf.K() || cf.tail_log2 > 0;
  if (continues && k >= 1) {
    mpq_class t_hi = k + 2 <= cf.K() ? mpq_class(mpz_class(1), cf.a[size_t(k + 2)]) : mpq_class(1);
    return t_hi * qk < qn;
  }
  throw PrecisionError("alpha enclosure too wide to decide the bracket at k=" + std::to_string(k));
}

std::vector<QEntry> partition_Q(const CFExpansion& cf, int64_t B) {
  if (B < 1) throw DomainError("partition parameter B must be positive");
  std::vector<QEntry> out;
  for (int k = 0; k <= cf.K(); ++k) {
    if (k + 1 <= cf.K() && cf.q[size_t(k)] == cf.q[size_t(k + 1)]) continue;  // q_0 = q_1 = 1
    if (cf.q[size_t(k)] <= 0) continue;
    QEntry e;
    e.k = k;
    e.q = cf.q[size_t(k)];
    double lq = log2_mpz(e.q);
    if (k + 1 <= cf.K()) {
      e.q_plus = cf.q[size_t(k + 1)];
      e.log2_q_plus = log2_mpz(e.q_plus);
      if (e.q < 2) e.sharp = false;
      else if (e.log2_q_plus > double(B) * lq + 1) e.sharp = true;
      else if (e.log2_q_plus < double(B) * lq - 1) e.sharp = false;
      else {
        mpz_class qb;
        mpz_pow_ui(qb.get_mpz_t(), e.q.get_mpz_t(), (unsigned long)B);
        e.sharp = e.q_plus > qb;
      }
    } else {
      e.q_plus = 0;
      e.log2_q_plus = cf.tail_log2;
      if (e.q < 2) {
        e.sharp = false;  // 1 is flat by definition, successor or not
        out.push_back(e);
        continue;
      }
      if (cf.tail_log2 <= 0) continue;  // successor unknown
      if (cf.tail_log2 > double(B) * lq + 1) e.sharp = true;
      else continue;  // undecidable from a lower bound
    }
    out.push_back(e);
  }
  return out;
}

int64_t choose_B(double tau, int64_t b2, double K_bound) {
  if (!(tau > 0)) throw DomainError("choose_B needs tau > 0");
  if (b2 == 0) throw DomainError("choose_B needs b2 != 0");
  // the precondition asks K >= 1, yet K = e/16 is a listed input; anything positive is accepted
  if (!(K_bound > 0)) throw DomainError("choose_B needs K > 0");
  double x = std::log(16.0 * std::fabs(double(b2)) * K_bound);
  // ln of an exact integer value may land one ulp short; snap within 8 ulps
  double r = std::nearbyint(x);
  if (std::fabs(x - r) <= 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x))) x = r;
  return std::max<int64_t>(2, 4 * int64_t(std::floor(x)));
}

double fractional_phase(const AlphaValue& alpha, int64_t n) {
  if (n == 0) return 0.0;
  if (alpha.rational) {
    mpz_class num = alpha.exact.get_num() * n;
    mpz_class den = alpha.exact.get_den();
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return mpq_class(r, den).get_d();
  }
  double e = std::fabs(double(n)) * alpha.err;
  if (!(e < std::ldexp(1.0, -55)))
    throw PrecisionError("n*alpha mod 1 precision budget exceeded for n=" + std::to_string(n));
  return alpha.times(n).to_double();
}

FurstenbergQuotients furstenberg_quotients(double tau, int depth, int64_t bit_budget) {
  if (!(tau > 0)) throw DomainError("furstenberg_quotients needs tau > 0");
  FurstenbergQuotients f;
  f.requested_depth = depth;
  f.a = {0, 2};
  f.q = {1, 2};
  const double log2e = 1.4426950408889634;
  for (int guard = 0; guard < 64; ++guard) {
    const mpz_class& qk = f.q.back();
    // log2 e^{tau q_k}
    double lq = log2_mpz(qk);
    double bits = (lq > 1000) ? std::numeric_limits<double>::infinity() : tau * qk.get_d() * log2e;
    if (bits > double(bit_budget)) {
      // q_{k+1} >= e^{tau q_k}/2, kept only as a bound
      f.tail_log2 = std::min(bits - 1.0, kTailCap);
      break;
    }
    mpfr_prec_t prec = mpfr_prec_t(bits) + 96;
    Mpfr x(prec), t(prec);
    mpfr_set_z(t.v, qk.get_mpz_t(), MPFR_RNDN);
    mpfr_mul_d(t.v, t.v, tau, MPFR_RNDN);
    mpfr_exp(x.v, t.v, MPFR_RNDN);
    mpfr_div_z(x.v, x.v, qk.get_mpz_t(), MPFR_RNDN);
    mpfr_round(x.v, x.v);
    mpz_class a;
    mpfr_get_z(a.get_mpz_t(), x.v, MPFR_RNDN);
    if (a < 1) a = 1;
    mpz_class qn = a * qk + f.q[f.q.size() - 2];
    f.a.push_back(a);
    f.q.push_back(qn);
  }
  return f;
}

double phi_window(const AnalyticSeries& h, const mpz_class& q, double M) {
  if (!mpz_fits_slong_p(q.get_mpz_t())) return 0.0;
  int64_t qq = q.get_si();
  if (qq <= 0) return 0.0;
  double s = 0;
  for (auto& [m, c] : h.coeffs) {
    if (m == 0 || m % qq != 0) continue;
    int64_t k = m / qq;
    double ak = double(k < 0 ? -k : k);
    if (ak < M) s += ak * ak * std::abs(c);
  }
  return s;
}

CaseReport classify_case(const CFExpansion& cf, const AnalyticSeries& h, int64_t N, int64_t d1, int64_t b2,
                         int64_t B) {
  if (cf.alpha.rational) throw DomainError("alpha is rational: use the rational-case pipeline (rational_case_decompose)");
  if (N < 16) throw DomainError("classify_case needs N >= 16");
  if (!h.tau2) throw DomainError("classify_case needs the series to carry tau2");
  if (d1 < 1) throw DomainError("classify_case needs d1 >= 1");
  CaseReport r;
  r.N = N;
  r.d1 = d1;
  r.b2 = b2;
  r.tau = h.tau;
  r.tau2 = *h.tau2;
  const double lnN = std::log(double(N));
  r.Y = 8.0 / h.tau * lnN;
  // every q <= Y needs a known successor
  if (log2_mpz(cf.q.back()) <= std::log2(r.Y) && !(cf.tail_log2 > std::log2(r.Y)))
    throw PrecisionError("expansion too shallow: q_K <= Y; expand deeper");

  // K = sup of Phi over scales q <= Y with window q+/q
  double Kb = 1.0;
  for (int k = 0; k <= cf.K(); ++k) {
    const mpz_class& q = cf.q[size_t(k)];
    if (q < 2 || q.get_d() > r.Y) continue;
    double lsucc = cf.log2_successor(k);
    if (std::isnan(lsucc)) continue;
    double M = std::exp2(std::min(lsucc, 1000.0) - log2_mpz(q));
    Kb = std::max(Kb, phi_window(h, q, M));
  }
  r.K_bound = Kb;
  r.B = B > 0 ? B : choose_B(h.tau, b2 == 0 ? 1 : b2, Kb);

  r.D = int64_t(std::floor(r.tau2 / r.tau)) + 2;
  r.C = 20.0 * double(d1) * double(r.D) + 20.0;

  auto parts = partition_Q(cf, r.B);
  for (auto& e : parts) {
    if (!e.sharp || e.q.get_d() > r.Y) continue;
    r.m.push_back(e.q);
    r.m_plus.push_back(e.q_plus);
    r.log2_m_plus.push_back(e.log2_q_plus);
    r.m_index.push_back(e.k);
  }
  r.J = int(r.m.size());
  if (r.J == 0) {
    r.label = "NoSharpScale";
    return r;
  }
  const mpq_class mid = (cf.alpha.lo + cf.alpha.hi) / 2;
  const mpq_class half_w = (cf.alpha.hi - cf.alpha.lo) / 2;
  for (int j = 0; j < r.J; ++j) {
    int k = r.m_index[size_t(j)];
    mpq_class s = mid * mpq_class(r.m[size_t(j)]) - mpq_class(cf.l[size_t(k)]);
    mpq_class err = half_w * mpq_class(r.m[size_t(j)]);
    double l2 = log2_mpz(abs(s.get_num())) - log2_mpz(s.get_den());
    r.log10_theta.push_back(l2 * std::log10(2.0));
    double th = (l2 < -1000) ? 0.0 : s.get_d();
    r.theta.push_back(th);
    // 1/(2 m+) < |theta| < 1/m+
    mpq_class as = abs(s);
    if (r.m_plus[size_t(j)] != 0) {
      mpq_class up(mpz_class(1), r.m_plus[size_t(j)]);
      mpq_class lowb(mpz_class(1), 2 * r.m_plus[size_t(j)]);
      if (!(as - err > lowb && as + err < up)) r.theta_bracket_ok = false;
    } else {
      double lp = r.log2_m_plus[size_t(j)];
      if (!(l2 < -lp + 1e-9)) r.theta_bracket_ok = false;
    }
    double Mj = (j + 1 < r.J) ? std::exp2(std::min(r.log2_m_plus[size_t(j)], 1000.0) - log2_mpz(r.m[size_t(j)]))
                              : r.Y / r.m[size_t(j)].get_d();
    r.M.push_back(Mj);
    r.Phi.push_back(phi_window(h, r.m[size_t(j)], Mj));
    // m_j+ > m_1^(B^j)
    double rhs = std::pow(double(r.B), double(j + 1)) * log2_mpz(r.m[0]);
    if (!(r.log2_m_plus[size_t(j)] > rhs)) r.growth_ok = false;
  }
  const double lnmp = r.log2_m_plus.back() * std::log(2.0);
  const double PhiJ = r.Phi.back();
  const double lnPhi = PhiJ > 0 ? std::log(PhiJ) : -std::numeric_limits<double>::infinity();
  const double lnlnN = std::log(lnN);
  r.lnA_lhs = lnmp + lnPhi;
  r.lnA_rhs = 4.0 * r.C * lnlnN;
  r.lnB_lhs = 3.0 * lnmp;
  r.lnB_rhs = lnPhi + 4.0 * lnN + r.C * lnlnN;
  if (r.lnA_lhs <= r.lnA_rhs) r.label = "A";
  else if (r.lnB_lhs >= r.lnB_rhs) r.label = "B";
  else r.label = (lnmp <= lnN) ? "C1" : "C2";

  const double mJ = r.m.back().get_d();
  r.log_delta = std::log(3.0) - 10.0 * std::log(mJ);
  r.delta = std::exp(r.log_delta);
  r.log_beta = 2.0 * double(d1) * double(r.D) * (r.log_delta - std::log(3.0)) - std::log(r.Y);
  r.beta = std::exp(r.log_beta);
  return r;
}

std::string case_report_json(const CaseReport& r, int indent) {
  using nlohmann::json;
  auto big = [](const mpz_class& z) -> json {
    if (mpz_fits_slong_p(z.get_mpz_t())) return json(int64_t(z.get_si()));
    return json(z.get_str());
  };
  json j;
  j["N"] = r.N;
  j["tau"] = r.tau;
  j["tau2"] = r.tau2;
  j["Y"] = r.Y;
  j["B"] = r.B;
  j["K_bound"] = r.K_bound;
  j["J"] = r.J;
  j["label"] = r.label;
  j["D"] = r.D;
  j["d1"] = r.d1;
  j["b2"] = r.b2;
  j["C"] = r.C;
  json scales = json::array();
  for (int i = 0; i < r.J; ++i) {
    json s;
    s["j"] = i + 1;
    s["m"] = big(r.m[size_t(i)]);
    if (r.m_plus[size_t(i)] != 0) s["m_plus"] = log2_mpz(r.m_plus[size_t(i)]) < 2000 ? big(r.m_plus[size_t(i)]) : json("2^" + std::to_string(r.log2_m_plus[size_t(i)]));
    else s["m_plus"] = "2^>=" + std::to_string(r.log2_m_plus[size_t(i)]);
    s["log2_m_plus"] = r.log2_m_plus[size_t(i)];
    s["theta"] = r.theta[size_t(i)];
    s["log10_theta"] = r.log10_theta[size_t(i)];
    s["M"] = r.M[size_t(i)];
    s["Phi"] = r.Phi[size_t(i)];
    scales.push_back(s);
  }
  j["scales"] = scales;
  if (r.J > 0) {
    j["delta"] = r.delta;
    j["log_delta"] = r.log_delta;
    j["beta"] = r.beta;
    j["log_beta"] = r.log_beta;
    j["checks"] = {{"theta_bracket", r.theta_bracket_ok}, {"scale_growth", r.growth_ok}};
    j["tests"] = {{"lnA_lhs", r.lnA_lhs}, {"lnA_rhs", r.lnA_rhs}, {"lnB_lhs", r.lnB_lhs}, {"lnB_rhs", r.lnB_rhs}};
  }
  return j.dump(indent);
}

}  // namespace mdl
