#include "mdl/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>
#include "json.hpp"

#include "mdl/errors.hpp"
#include "mdl/flows.hpp"
#include "mdl/parallel.hpp"

namespace mdl {

namespace {

void check_checkpoints(const MobiusTable& table, const std::vector<int64_t>& cps) {
  if (cps.empty()) throw DomainError("no checkpoints given");
  int64_t prev = 0;
  for (auto c : cps) {
    if (c <= prev) throw DomainError("checkpoints must be strictly increasing and positive");
    prev = c;
  }
  if (cps.back() > table.limit())
    throw RangeError("checkpoint " + std::to_string(cps.back()) + " beyond sieve limit " + std::to_string(table.limit()));
}

CorrelationSeries finish(const std::vector<int64_t>& cps, std::vector<cplx> sums) {
  CorrelationSeries s;
  s.checkpoints = cps;
  s.sums = std::move(sums);
  for (size_t i = 0; i < cps.size(); ++i) s.normalized.push_back(s.sums[i] / double(cps[i]));
  return s;
}

}  // namespace

CorrelationSeries mobius_series(const MobiusTable& table, const std::vector<int64_t>& checkpoints, int threads,
                                const PhaseFill& fill, const std::function<bool(int64_t)>& keep) {
  check_checkpoints(table, checkpoints);
  auto sums = checkpoint_sums(checkpoints, threads, [&](int64_t lo, int64_t hi) {
    std::vector<Phase> ph(size_t(hi - lo + 1));
    fill(lo, hi, ph.data());
    std::vector<cplx> terms;
    terms.reserve(ph.size());
    for (int64_t n = lo; n <= hi; ++n) {
      int m = table.mu_unchecked(n);
      if (m == 0 || (keep && !keep(n))) continue;
      cplx e = e_phase(ph[size_t(n - lo)]);
      terms.push_back(m > 0 ? e : -e);
    }
    return pairwise_sum(terms);
  });
  return finish(checkpoints, std::move(sums));
}

CorrelationSeries mobius_correlate(const SkewFlow& f, const TorusPoint& x, const Character& b, const MobiusTable& table,
                                   const std::vector<int64_t>& checkpoints, int threads) {
  PhaseFill fill;
  if (!f.normalized()) {
    fill = [&](int64_t lo, int64_t hi, Phase* out) {
      TorusPoint y = skew_orbit_closed(f, x, lo);
      for (int64_t n = lo; n <= hi; ++n) {
        out[n - lo] = b.b1 * y.x1 + b.b2 * y.x2;
        y = skew_step(f, y);
      }
    };
  } else {
    const int64_t M = f.h.max_freq();
    fill = [&, M](int64_t lo, int64_t hi, Phase* out) {
      // B(n) = sum_{j<n} h(x1 + j alpha): Fourier side at the chunk start, then stepped
      double B = b.b2 == 0 || f.h.coeffs.empty()
                     ? 0.0
                     : birkhoff_sum_fourier(f.h, x.x1.to_double(), f.alpha, lo, std::max<int64_t>(M, 1)).real();
      for (int64_t n = lo; n <= hi; ++n) {
        i128 tri = i128(n) * i128(n - 1) / 2;
        Phase y1 = x.x1 + n * f.alpha.frac;
        Phase P = b.b1 * y1;
        if (b.b2 != 0) {
          P += b.b2 * x.x2 + (i128(b.b2) * f.c * n) * x.x1 + (i128(b.b2) * f.c * tri) * f.alpha.frac;
          double v = double(b.b2) * B;
          P += Phase::from_double(v - std::floor(v));
          if (!f.h.coeffs.empty()) B += eval_series(f.h, y1, M).real();
        }
        out[n - lo] = P;
      }
    };
  }
  auto s = mobius_series(table, checkpoints, threads, fill);
  s.meta = "skew b=(" + std::to_string(b.b1) + "," + std::to_string(b.b2) + ")";
  return s;
}

CorrelationSeries mobius_correlate(const UnipotentAffine& A, const std::vector<Phase>& x, const std::vector<int64_t>& v,
                                   const MobiusTable& table, const std::vector<int64_t>& checkpoints, int threads) {
  std::vector<UnipotentPhasePoly> polys;
  bool zero = std::all_of(v.begin(), v.end(), [](int64_t e) { return e == 0; });
  if (!zero)
    for (int64_t l = 0; l < A.nu; ++l) polys.push_back(unipotent_phase_poly(A, x, v, l));
  auto fill = [&](int64_t lo, int64_t hi, Phase* out) {
    for (int64_t n = lo; n <= hi; ++n) out[n - lo] = zero ? Phase{} : polys[size_t(n % A.nu)].at(n);
  };
  auto s = mobius_series(table, checkpoints, threads, fill);
  s.meta = "unipotent_affine";
  return s;
}

Phase PolyPhase::at(int64_t n) const {
  Phase r;
  u128 pw = 1;
  for (double a : alpha) {
    r += Phase(pw * Phase::from_double(a - std::floor(a)).raw);
    pw *= u128(i128(n));
  }
  return r;
}

cplx poly_exp_sum(const PolyPhase& phase, const MobiusTable& table, int64_t N, int threads) {
  if (phase.nu < 1 || phase.l < 0 || phase.l >= phase.nu) throw DomainError("PolyPhase needs 0 <= l < nu");
  if (N > table.limit()) throw RangeError("N beyond sieve limit");
  if (N < 1) return {};
  auto fill = [&](int64_t lo, int64_t hi, Phase* out) {
    for (int64_t n = lo; n <= hi; ++n) out[n - lo] = phase.at(n);
  };
  auto keep = [&](int64_t n) { return n % phase.nu == phase.l; };
  return mobius_series(table, {N}, threads, fill, keep).sums[0];
}

BszReport bsz_test(const std::function<cplx(int64_t)>& f, double tau, int64_t M, int64_t N, const MobiusTable& table,
                   int64_t max_primes, int threads) {
  if (!(tau > 0) || tau >= std::exp(-1.0)) throw DomainError("bsz_test needs tau in (0, 1/e)");
  if (M < 1 || N < 1) throw DomainError("bsz_test needs M, N >= 1");
  if (N > table.limit()) throw RangeError("N beyond sieve limit");
  BszReport r;
  r.tau = tau;
  r.M = M;
  r.N = N;
  double bound = std::exp(1.0 / tau);
  r.prime_bound = bound > 9e18 ? std::numeric_limits<int64_t>::max() : int64_t(std::floor(bound));
  double lnp = std::log(double(std::max<int64_t>(max_primes, 6)));
  int64_t sieve_to = int64_t(double(std::max<int64_t>(max_primes, 6)) * (lnp + std::log(lnp))) + 16;
  sieve_to = std::min(sieve_to, r.prime_bound);
  auto primes = primes_up_to(sieve_to);
  if (int64_t(primes.size()) > max_primes) {
    primes.resize(size_t(max_primes));
    r.prime_cap_hit = true;
  } else if (sieve_to < r.prime_bound) {
    r.prime_cap_hit = true;
  }
  if (primes.size() < 2) throw DomainError("no pair of distinct primes below e^{1/tau}; tau too large");
  r.primes_tested = int64_t(primes.size());

  const size_t P = primes.size();
  std::vector<std::vector<cplx>> F(P);
  parallel_for(int64_t(P), threads, [&](int64_t i) {
    auto& row = F[size_t(i)];
    row.resize(size_t(M));
    for (int64_t m = 1; m <= M; ++m) {
      cplx v = f(primes[size_t(i)] * m);
      if (std::abs(v) > 1.0 + 1e-12) throw DomainError("bsz_test needs |f| <= 1");
      row[size_t(m - 1)] = v;
    }
  });
  struct Best {
    double ratio = -1;
    size_t j = 0;
  };
  std::vector<Best> best(P);
  parallel_for(int64_t(P), threads, [&](int64_t i) {
    std::vector<cplx> prod(static_cast<size_t>(M));
    for (size_t j = size_t(i) + 1; j < P; ++j) {
      for (size_t m = 0; m < size_t(M); ++m) prod[m] = F[size_t(i)][m] * std::conj(F[j][m]);
      double ratio = std::abs(pairwise_sum(prod)) / double(M);
      if (ratio > best[size_t(i)].ratio) best[size_t(i)] = {ratio, j};
    }
  });
  size_t wi = 0;
  for (size_t i = 0; i < P; ++i)
    if (best[i].ratio > best[wi].ratio) wi = i;
  r.worst_ratio = best[wi].ratio;
  r.worst_p1 = primes[wi];
  r.worst_p2 = primes[best[wi].j];
  r.hypothesis_holds = r.worst_ratio <= tau;

  auto sums = checkpoint_sums({N}, threads, [&](int64_t lo, int64_t hi) {
    std::vector<cplx> t;
    for (int64_t n = lo; n <= hi; ++n) {
      int m = table.mu_unchecked(n);
      if (m != 0) t.push_back(double(m) * f(n));
    }
    return pairwise_sum(t);
  });
  r.mobius_sum_ratio = std::abs(sums[0]) / double(N);
  r.conclusion_bound = 2.0 * std::sqrt(tau * std::log(1.0 / tau));
  r.conclusion_holds = r.mobius_sum_ratio <= r.conclusion_bound;
  return r;
}

std::string bsz_report_json(const BszReport& r, int indent) {
  nlohmann::ordered_json j;
  j["tau"] = r.tau;
  j["M"] = r.M;
  j["N"] = r.N;
  j["prime_bound"] = r.prime_bound;
  j["primes_tested"] = r.primes_tested;
  j["prime_cap_hit"] = r.prime_cap_hit;
  j["worst_pair"] = {r.worst_p1, r.worst_p2};
  j["worst_bilinear_ratio"] = r.worst_ratio;
  j["hypothesis_holds"] = r.hypothesis_holds;
  j["mobius_sum_ratio"] = r.mobius_sum_ratio;
  j["conclusion_bound"] = r.conclusion_bound;
  j["conclusion_holds"] = r.conclusion_holds;
  return j.dump(indent);
}

cplx eval_trig(const std::vector<std::pair<int64_t, cplx>>& p, double x) {
  std::vector<cplx> t;
  t.reserve(p.size());
  const Phase X = Phase::from_double(x - std::floor(x));
  for (auto& [k, c] : p) t.push_back(c * e_phase(k * X));
  return pairwise_sum(t);
}

PhiPolys phi_polys(const AnalyticSeries& h, const Scale& s, int64_t D, int64_t d1, int64_t d2, double x1) {
  if (!(d1 > d2 && d2 >= 1)) throw DomainError("phi_polys needs d1 > d2 >= 1");
  if (D < 1) throw DomainError("phi_polys needs D >= 1");
  PhiPolys r;
  r.D = D;
  r.d1 = d1;
  r.d2 = d2;
  const double c1 = double(d1) * d1 * d1, c2 = double(d2) * d2 * d2;
  const Phase X = Phase::from_double(x1);
  std::map<int64_t, cplx> full, part;
  r.P.assign(size_t(2 * d1 * D + 1), cplx{});
  double phi2 = 0;
  for (auto& [m, c] : h.coeffs) {
    if (m == 0 || m % s.m != 0) continue;
    int64_t k = m / s.m;
    int64_t ak = k < 0 ? -k : k;
    if (double(ak) >= s.M && ak > D) continue;
    cplx w = double(k) * double(k) * c * e_phase(m * X);
    if (double(ak) < s.M) {
      full[d1 * k] += c1 * w;
      full[d2 * k] -= c2 * w;
    }
    if (ak <= D && double(ak) < s.M) {
      part[d1 * k] += c1 * w;
      part[d2 * k] -= c2 * w;
      r.P[size_t(d1 * k + d1 * D)] += c1 * w;
      r.P[size_t(d2 * k + d1 * D)] -= c2 * w;
      phi2 += std::pow(double(ak), 4) * std::norm(c);
    }
  }
  for (auto& e : full) r.phi.push_back(e);
  for (auto& e : part) r.phi_D.push_back(e);
  r.Phi = std::sqrt(phi2);
  double n2 = 0;
  for (auto& c : r.P) n2 += std::norm(c);
  r.norm_phi_D = std::sqrt(n2);
  // |phi - phi_D| <= (d1^3 + d2^3) sum_{|k|>D} k^2 c_up e^{-tau |k| m} <= K d1^3 e^{-tau D m}
  // with K = 4 c_up sum_{j>=1} (D + j)^2 e^{-tau j}, valid for m >= 1
  double K = 0;
  for (int j = 1; j < 4000; ++j) K += double(D + j) * double(D + j) * std::exp(-h.tau * j);
  r.K = 4.0 * h.c_up * K;
  r.tail_bound = r.K * c1 * std::exp(-h.tau * double(D) * double(s.m));
  return r;
}

LowerBoundReport poly_lower_bound_check(const std::vector<cplx>& coeffs, double delta, int64_t samples) {
  if (!(delta > 0 && delta < 0.5)) throw DomainError("delta must lie in (0, 1/2)");
  if (samples < 1) throw DomainError("samples must be >= 1");
  int n = int(coeffs.size()) - 1;
  while (n > 0 && coeffs[size_t(n)] == cplx{}) --n;
  if (n < 1) throw DomainError("polynomial degree must be >= 1");
  LowerBoundReport r;
  r.degree = n;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -coeffs[size_t(i)] / coeffs[size_t(n)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  if (es.info() != Eigen::Success)
    throw PrecisionError("companion eigenvalue solver did not converge (degree " + std::to_string(n) + ")");
  auto eval = [&](std::complex<long double> z) {
    std::complex<long double> acc = 0;
    for (int i = n; i >= 0; --i) acc = acc * z + std::complex<long double>(coeffs[size_t(i)]);
    return acc;
  };
  auto deriv = [&](std::complex<long double> z) {
    std::complex<long double> acc = 0;
    for (int i = n; i >= 1; --i) acc = acc * z + std::complex<long double>(coeffs[size_t(i)]) * (long double)i;
    return acc;
  };
  for (int i = 0; i < n; ++i) {
    std::complex<long double> z = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      auto d = deriv(z);
      if (std::abs(d) == 0) break;
      auto step = eval(z) / d;
      if (!(std::abs(step) < 1e-3 * (1 + std::abs(z)))) break;
      z -= step;
    }
    r.roots.push_back(cplx(double(z.real()), double(z.imag())));
  }
  double n2 = 0;
  for (int i = 0; i <= n; ++i) n2 += std::norm(coeffs[size_t(i)]);
  r.norm = std::sqrt(n2);
  const double scale = std::pow(delta / 3.0, n) * r.norm;
  double mn = std::numeric_limits<double>::infinity();
  for (int64_t j = 0; j < samples; ++j) {
    cplx z = e_real(double(j) / double(samples));
    bool inside = false;
    for (auto& w : r.roots)
      if (std::abs(z - w) < delta) {
        inside = true;
        break;
      }
    if (inside) continue;
    ++r.samples_kept;
    auto v = eval(std::complex<long double>(z));
    mn = std::min(mn, double(std::abs(v)) / scale);
  }
  r.min_ratio = mn;
  r.holds = mn >= 1.0;
  return r;
}

VdcReport vdc_sum_check(const std::function<double(double)>& F, const std::function<double(double)>& F3, double Lambda,
                        double eta, double a, double b, int samples) {
  if (!(b - a >= 1)) throw DomainError("vdc_sum_check needs b - a >= 1");
  VdcReport r;
  r.precondition_ok = Lambda > 0 && eta >= 1;
  if (!r.precondition_ok) r.violation_x = a;
  for (int i = 0; i < samples && r.precondition_ok; ++i) {
    double x = a + (b - a) * (i + 0.5) / samples;
    double v = std::fabs(F3(x));
    if (v < Lambda || v > eta * Lambda) {
      r.precondition_ok = false;
      r.violation_x = x;
    }
  }
  std::vector<cplx> t;
  for (int64_t n = int64_t(std::floor(a)) + 1; double(n) < b; ++n)
    if (double(n) > a) t.push_back(e_real(F(double(n)) - std::floor(F(double(n)))));
  r.actual = std::abs(pairwise_sum(t));
  if (Lambda > 0)
    r.bound = kVdcConstant * (std::sqrt(eta) * std::pow(Lambda, 1.0 / 6) * (b - a) +
                              std::pow(Lambda, -1.0 / 6) * std::sqrt(b - a));
  r.ratio = r.bound > 0 ? r.actual / r.bound : std::numeric_limits<double>::infinity();
  return r;
}

namespace {

template <class Term>
cplx window_sum(const AnalyticSeries& h, const Scale& s, double x1, Term term) {
  if (s.theta == 0.0) throw PrecisionError("theta_J below double range");
  const Phase X = Phase::from_double(x1);
  std::vector<cplx> t;
  for (auto& [m, c] : h.coeffs) {
    if (m == 0 || m % s.m != 0) continue;
    int64_t k = m / s.m;
    if (double(k < 0 ? -k : k) >= s.M) continue;
    t.push_back(c * e_phase(m * X) * term(k) / em1_real(double(k) * s.theta));
  }
  return pairwise_sum(t);
}

}  // namespace

cplx ftilde(const AnalyticSeries& h, const Scale& s, int64_t d1, int64_t d2, double x1, double x) {
  return window_sum(h, s, x1, [&](int64_t k) { return e_real(double(d1 * k) * x) - e_real(double(d2 * k) * x); });
}

cplx ftilde_third_derivative(const AnalyticSeries& h, const Scale& s, int64_t d1, int64_t d2, double x1, double x) {
  const cplx i2pi(0.0, kTwoPi);
  const cplx c3 = i2pi * i2pi * i2pi;
  return window_sum(h, s, x1, [&](int64_t k) {
    double kd = double(k);
    double a1 = double(d1) * d1 * d1, a2 = double(d2) * d2 * d2;
    return c3 * kd * kd * kd * (a1 * e_real(double(d1 * k) * x) - a2 * e_real(double(d2 * k) * x));
  });
}

ConditionReport condition_checks(const CFExpansion& cf, const AnalyticSeries& h, double tau, double tau2, int64_t d1,
                                 int64_t N) {
  if (!(tau > 0) || tau2 < tau) throw DomainError("condition checks need 0 < tau <= tau2");
  ConditionReport r;
  r.d1 = d1;
  r.tau = tau;
  r.tau2 = tau2;
  r.D = int64_t(std::floor(tau2 / tau)) + 2;
  r.Y = 8.0 / tau * std::log(double(N));
  double K = 0;
  for (int j = 1; j < 4000; ++j) K += double(r.D + j) * double(r.D + j) * std::exp(-tau * j);
  r.K = 4.0 * h.c_up * K;
  const double slope = tau * double(r.D) - tau2;
  const double powr = 20.0 * double(d1) * double(r.D);
  r.turning_m = (powr + 1.0) / slope;
  const double need = 3.0 * std::log(double(d1));
  mpz_class last = 0;
  for (int k = 1; k <= cf.K(); ++k) {
    const mpz_class& q = cf.q[size_t(k)];
    if (q <= 1 || q == last) continue;
    last = q;
    ConditionRow row;
    row.m = q;
    double lnm = log2_mpz(q) * M_LN2;
    double mdbl = lnm > 700 ? std::numeric_limits<double>::infinity() : q.get_d();
    row.log_rhs_622 = slope * mdbl - std::log(2.0 * r.K) - (powr + 1.0) * lnm;
    // |q alpha - l| from the enclosure midpoint
    mpq_class mid = (cf.alpha.lo + cf.alpha.hi) / 2;
    mpq_class th = q * mid - cf.l[size_t(k)];
    th = abs(th);
    double lnth = th == 0 ? -std::numeric_limits<double>::infinity()
                          : (log2_mpz(th.get_num()) - log2_mpz(th.get_den())) * M_LN2;
    row.log_rhs_623 = -powr * lnm - lnth - 3.0 * std::log(r.Y);
    row.holds_622 = row.log_rhs_622 >= need;
    row.holds_623 = row.log_rhs_623 >= need;
    r.rows.push_back(row);
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (auto& row : r.rows) {
    if (row.m.get_d() < r.turning_m) continue;
    if (!(row.log_rhs_622 > prev)) r.monotone_past_turn = false;
    prev = row.log_rhs_622;
  }
  r.eventually_holds = !r.rows.empty() && r.rows.back().holds_622;
  return r;
}

}  // namespace mdl
