#include "mdl/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <set>
#include <sstream>

#include "mdl/cfrac.hpp"
#include "mdl/config.hpp"
#include "mdl/errors.hpp"
#include "mdl/flows.hpp"
#include "mdl/furstenberg.hpp"
#include "mdl/nilflow.hpp"

namespace mdl {

namespace {

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double unif(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
int64_t irange(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

AlphaSpec random_alpha(std::mt19937_64& rng, bool allow_rational = true) {
  switch (irange(rng, 0, allow_rational ? 4 : 3)) {
    case 0: return AlphaSpec::golden();
    case 1: return AlphaSpec::sqrt2_minus_1();
    case 2: return AlphaSpec::quadratic(0, {}, {irange(rng, 1, 9), irange(rng, 1, 9)});
    case 3: return AlphaSpec::quadratic(0, {irange(rng, 1, 30)}, {irange(rng, 1, 5)});
    default: {
      int64_t q = irange(rng, 2, 1000);
      return AlphaSpec::rational(irange(rng, 1, q - 1), q);
    }
  }
}

double torus_err(Phase a, Phase b) { return dist_int(a - b); }

// integral sum over every bit of the complex doubles
bool same_bits(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0;
}

UnipotentAffine decay_unipotent() {
  return make_unipotent({{1, 0}, {1, 1}}, {mpq_class(std::sqrt(2.0) - 1.0), mpq_class(0)});
}

SkewFlow decay_skew() {
  AnalyticSeries h;
  h.tau = 1.0;
  h.set(1, cplx(0.25, 0.1));
  h.set(-1, cplx(0.25, -0.1));
  h.set(2, cplx(0.05, 0));
  h.set(-2, cplx(0.05, 0));
  h.fit_constants();
  return make_skew(1, 1, 1, AlphaSpec::golden(), h);
}

HeisAffine demo_heis() {
  return make_heis_affine(Heis{mpq_class(1, 7), mpq_class(2, 5), mpq_class(1, 3)}, IMat3{{{1, 0, 0}, {2, 1, 0}, {1, 0, 1}}});
}

}  // namespace

const MobiusTable& SuiteContext::table(int64_t N) {
  if (table_.limit() < N) {
    SieveOptions so;
    so.threads = opt.threads;
    table_ = mobius_sieve(N, so);
  }
  return table_;
}

AnalyticSeries random_series(std::mt19937_64& rng, double tau, int64_t maxm) {
  AnalyticSeries h;
  h.tau = tau;
  h.set(0, cplx(unif(rng) - 0.5, 0));
  for (int64_t m = 1; m <= maxm; ++m) {
    double r = std::exp(-tau * double(m)) * unif(rng), t = kTwoPi * unif(rng);
    cplx c = std::polar(r, t);
    h.set(m, c);
    h.set(-m, std::conj(c));
  }
  h.fit_constants();
  return h;
}

std::string series_csv(const CorrelationSeries& s) {
  std::ostringstream os;
  os << "N,re,im,abs_over_N\n";
  char buf[160];
  for (size_t i = 0; i < s.checkpoints.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(s.checkpoints[i]),
                  s.sums[i].real(), s.sums[i].imag(), s.abs_over_N(i));
    os << buf;
  }
  return os.str();
}

CheckResult check_orbit_oracle(SuiteContext& ctx) {
  CheckResult r{1, "orbit oracle equivalence", false, {}, 0};
  std::mt19937_64 rng(ctx.opt.seed + 1);
  const int64_t ns[] = {1, 10, 1000, 10000};
  double worst = 0;
  for (int it = 0; it < 100; ++it) {
    int64_t a = 1, d = 1;
    if (it % 5 == 4) {
      a = irange(rng, 0, 1) ? 1 : -1;
      d = irange(rng, 0, 1) ? 1 : -1;
    }
    auto f = make_skew(a, irange(rng, -5, 5), d, random_alpha(rng), random_series(rng, 1.0 + 2.0 * unif(rng), 6));
    TorusPoint x = TorusPoint::from_double(unif(rng), unif(rng));
    TorusPoint y = x;
    int64_t done = 0;
    for (int64_t n : ns) {
      for (; done < n; ++done) y = skew_step(f, y);
      TorusPoint z = skew_orbit_closed(f, x, n);
      worst = std::max({worst, torus_err(y.x1, z.x1), torus_err(y.x2, z.x2)});
    }
  }
  r.pass = worst <= 1e-9;
  r.detail = fmt("max coordinate error %.3g (tol 1e-9)", worst);
  return r;
}

CheckResult check_birkhoff(SuiteContext& ctx) {
  CheckResult r{2, "birkhoff fourier/direct", false, {}, 0};
  std::mt19937_64 rng(ctx.opt.seed + 2);
  int bad = 0, rational_bad = 0, rational = 0;
  double worst_ratio = 0, worst_rational = 0;
  for (int it = 0; it < 1000; ++it) {
    int64_t maxm = irange(rng, 1, 8);
    auto h = random_series(rng, 1.0 + 2.0 * unif(rng), maxm);
    auto alpha = alpha_value(random_alpha(rng));
    double x1 = unif(rng);
    int64_t n = irange(rng, 1, 10000);
    int64_t M = irange(rng, 1, maxm);
    if (alpha.rational) M = maxm;
    cplx D = birkhoff_sum_direct(h, x1, alpha, n);
    cplx F = birkhoff_sum_fourier(h, x1, alpha, n, M);
    double err = std::abs(D - F);
    if (alpha.rational) {
      ++rational;
      worst_rational = std::max(worst_rational, err);
      if (err > 1e-12) ++rational_bad;
    } else {
      double tb = birkhoff_tail_bound(h, alpha, n, M);
      worst_ratio = std::max(worst_ratio, err / tb);
      if (err > tb) ++bad;
    }
  }
  r.pass = bad == 0 && rational_bad == 0;
  std::ostringstream os;
  os << "irrational: " << bad << " over bound (max err/bound " << worst_ratio << "); rational (" << rational
     << " draws): max err " << worst_rational << " (tol 1e-12)";
  r.detail = os.str();
  return r;
}

CheckResult check_cfrac(SuiteContext&) {
  CheckResult r{3, "continued fractions", false, {}, 0};
  std::vector<std::pair<std::string, CFExpansion>> cases;
  cases.emplace_back("sqrt2-1", cf_expand(AlphaSpec::sqrt2_minus_1(), 40));
  cases.emplace_back("golden", cf_expand(AlphaSpec::golden(), 40));
  for (double tau : {0.5, 1.0, 2.0}) cases.emplace_back(fmt("furstenberg tau=%g", tau), cf_expand(AlphaSpec::furstenberg(tau, 5), 5));
  std::ostringstream os;
  bool ok = true;
  int brackets = 0;
  for (auto& [name, cf] : cases) {
    for (int k = 2; k + 1 <= cf.K(); ++k) {
      ++brackets;
      if (!check_convergent_bracket(cf, k)) {
        ok = false;
        os << name << ": bracket fails at k=" << k << "; ";
      }
    }
    for (int k = 1; k <= cf.K(); ++k) {
      // q_k >= 2^{(k-1)/2}  <=>  q_k^2 >= 2^{k-1}
      if (cf.q[size_t(k)] * cf.q[size_t(k)] < (mpz_class(1) << (k - 1))) {
        ok = false;
        os << name << ": growth fails at k=" << k << "; ";
      }
    }
    for (int64_t B : {2, 4, 8}) {
      auto part = partition_Q(cf, B);
      // every q_k with a listed successor must be filed; q_K only when the tail decides it
      std::set<std::string> seen, expect, allowed;
      for (int k = 0; k <= cf.K(); ++k) {
        allowed.insert(cf.q[size_t(k)].get_str());
        if (k < cf.K()) expect.insert(cf.q[size_t(k)].get_str());
      }
      for (auto& e : part) {
        if (!seen.insert(e.q.get_str()).second) {
          ok = false;
          os << name << ": q=" << e.q << " listed twice; ";
        }
        if (e.q_plus != 0) {
          mpz_class qb;
          mpz_pow_ui(qb.get_mpz_t(), e.q.get_mpz_t(), static_cast<unsigned long>(B));
          if (e.sharp != (e.q >= 2 && e.q_plus > qb)) {
            ok = false;
            os << name << ": q=" << e.q << " misfiled at B=" << B << "; ";
          }
        }
      }
      bool covers = std::includes(seen.begin(), seen.end(), expect.begin(), expect.end()) &&
                    std::includes(allowed.begin(), allowed.end(), seen.begin(), seen.end());
      if (!covers) {
        ok = false;
        os << name << ": partition does not cover the denominators at B=" << B << "; ";
      }
    }
  }
  r.pass = ok;
  r.detail = ok ? std::to_string(brackets) + " strict brackets, growth and partitions hold" : os.str();
  return r;
}

CheckResult check_furstenberg(SuiteContext& ctx) {
  CheckResult r{4, "furstenberg construction", false, {}, 0};
  std::ostringstream os;
  bool ok = true;
  for (double tau : {0.5, 1.0, 2.0}) {
    auto sys = build_system(tau, 5);
    auto rep = verify_combined_coefficients(sys);
    auto cb = coboundary_errors(sys, 100, ctx.opt.seed + 4);
    bool t_ok = sys.alpha.ratios_ok() && rep.ok && cb.err_g <= 1e-9 && cb.err_G <= 1e-9;
    ok = ok && t_ok;
    os << "tau=" << tau << (t_ok ? " ok" : " FAIL") << " (ratios " << (sys.alpha.ratios_ok() ? "ok" : "bad")
       << ", coefficients " << (rep.ok ? "ok" : "bad") << ", off-support " << rep.off_support_checked << "/"
       << rep.off_support_mismatch << " mismatched, coboundary " << cb.err_g << "/" << cb.err_G << "); ";
  }
  r.pass = ok;
  r.detail = os.str();
  return r;
}

CheckResult check_davenport(SuiteContext& ctx) {
  CheckResult r{5, "polynomial phase decay", false, {}, 0};
  std::mt19937_64 rng(ctx.opt.seed + 5);
  const auto& table = ctx.table(1000000);
  std::ostringstream os;
  bool ok = true;
  for (int i = 0; i < 5; ++i) {
    PolyPhase p;
    int deg = 1 + i % 3;
    for (int j = 0; j <= deg; ++j) p.alpha.push_back(unif(rng));
    double small = std::abs(poly_exp_sum(p, table, 1000, ctx.opt.threads)) / 1e3;
    double big = std::abs(poly_exp_sum(p, table, 1000000, ctx.opt.threads)) / 1e6;
    bool pass = big < 0.02 && big < small;
    ok = ok && pass;
    os << "deg " << deg << ": " << small << " -> " << big << (pass ? "" : " FAIL") << "; ";
  }
  r.pass = ok;
  r.detail = os.str();
  return r;
}

CheckResult check_bsz(SuiteContext& ctx) {
  CheckResult r{6, "bsz consistency", false, {}, 0};
  std::mt19937_64 rng(ctx.opt.seed + 6);
  const int64_t N = 100000, M = 1000;
  const auto& table = ctx.table(N);
  const double taus[] = {0.05, 0.1, 0.2, 0.3};
  int verified = 0, counter = 0;
  std::ostringstream os;
  for (int i = 0; i < 20; ++i) {
    double tau = taus[i % 4];
    BszReport rep;
    if (i < 10) {
      AlphaValue a = alpha_value(i % 5 == 4 ? AlphaSpec::rational(1, irange(rng, 2, 12)) : random_alpha(rng, false));
      rep = bsz_test([&](int64_t n) { return e_phase(a.times(n)); }, tau, M, N, table, 150, ctx.opt.threads);
    } else {
      auto f = make_skew(1, irange(rng, -2, 2), 1, random_alpha(rng, false), random_series(rng, 1.5, 4));
      TorusPoint x = TorusPoint::from_double(unif(rng), unif(rng));
      Character b{irange(rng, 0, 2), 1};
      rep = bsz_test([&](int64_t n) { return e_phase(character_phase(f, x, b, n)); }, tau, M, N, table, 150,
                     ctx.opt.threads);
    }
    if (rep.hypothesis_holds) {
      ++verified;
      if (!rep.conclusion_holds) {
        ++counter;
        os << "instance " << i << " violates: ratio " << rep.mobius_sum_ratio << " > " << rep.conclusion_bound << "; ";
      }
    }
  }
  r.pass = counter == 0;
  r.detail = std::to_string(verified) + "/20 instances verify the hypothesis, " + std::to_string(counter) +
             " counterexamples; " + os.str();
  return r;
}

CheckResult check_poly_lower_bound(SuiteContext& ctx) {
  CheckResult r{7, "polynomial lower bound", false, {}, 0};
  std::mt19937_64 rng(ctx.opt.seed + 7);
  double worst = 1e300;
  int fails = 0;
  for (int i = 0; i < 100; ++i) {
    int deg = int(irange(rng, 1, 8));
    std::vector<cplx> c(size_t(deg + 1));
    for (auto& z : c) z = std::polar(std::sqrt(unif(rng)), kTwoPi * unif(rng));
    while (std::abs(c.back()) < 1e-3) c.back() = std::polar(std::sqrt(unif(rng)), kTwoPi * unif(rng));
    auto rep = poly_lower_bound_check(c, 0.05, 10000);
    if (rep.samples_kept > 0) worst = std::min(worst, rep.min_ratio);
    if (!rep.holds) ++fails;
  }
  r.pass = fails == 0;
  r.detail = std::to_string(fails) + " failures; min ratio " + fmt("%.4g", worst);
  return r;
}

CheckResult check_heisenberg(SuiteContext& ctx) {
  CheckResult r{8, "heisenberg exactness", false, {}, 0};
  std::mt19937_64 rng(ctx.opt.seed + 8);
  auto rq = [&] {
    int64_t q = irange(rng, 1, 9);
    mpq_class v(irange(rng, -3 * q, 3 * q), q);
    v.canonicalize();
    return v;
  };
  using M2 = std::array<int64_t, 4>;
  auto mul = [](M2 x, M2 y) {
    return M2{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  };
  const M2 gens[] = {{0, -1, 1, 0}, {-1, 0, 0, -1}, {1, 2, 0, 1}, {1, 0, 2, 1}, {1, -2, 0, 1}, {1, 0, -2, 1}, {0, 1, 1, 0}};
  int configs = 0, attempts = 0, mismatches = 0;
  std::set<int64_t> nus;
  while (configs < 100 && attempts < 100000) {
    ++attempts;
    M2 A{1, 0, 0, 1};
    for (int w = int(irange(rng, 0, 3)); w > 0; --w) A = mul(A, gens[irange(rng, 0, 6)]);
    if ((A[0] * A[2]) % 2 || (A[1] * A[3]) % 2) continue;
    int64_t det = A[0] * A[3] - A[1] * A[2];
    IMat3 d{{{A[0], A[1], 0}, {A[2], A[3], 0}, {A[0] * A[2] / 2 + irange(rng, -2, 2), A[1] * A[3] / 2 + irange(rng, -2, 2), det}}};
    HeisAffine T;
    try {
      T = make_heis_affine(Heis{rq(), rq(), rq()}, d);
    } catch (const DomainError&) {
      continue;
    }
    ++configs;
    nus.insert(T.nu);
    Heis x{rq(), rq(), rq()};
    std::vector<Heis> orbit{reduce_mod_gamma(x)};
    for (int n = 1; n <= 500; ++n) orbit.push_back(nil_step(T, orbit.back()));
    for (int64_t l = 0; l < T.nu; ++l) {
      auto rep = compile_poly_orbit(T, x, l);
      for (int64_t n = l; n <= 500; n += T.nu)
        if (!(rep.eval(n) == orbit[size_t(n)]) || !(rep.eval_factors(n) == orbit[size_t(n)])) ++mismatches;
    }
  }
  int coord_fail = 0, assoc_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    Heis a{rq(), rq(), rq()}, b{rq(), rq(), rq()}, c{rq(), rq(), rq()};
    if (!(coord_second_from_first(coord_first_from_second(a)) == a)) ++coord_fail;
    std::array<mpq_class, 3> u{rq(), rq(), rq()};
    if (coord_first_from_second(coord_second_from_first(u)) != u) ++coord_fail;
    if (!(heis_mul(heis_mul(a, b), c) == heis_mul(a, heis_mul(b, c)))) ++assoc_fail;
  }
  r.pass = configs == 100 && mismatches == 0 && coord_fail == 0 && assoc_fail == 0;
  std::ostringstream os;
  os << configs << " configs (nu in {";
  for (auto v : nus) os << v << (v == *nus.rbegin() ? "" : ",");
  os << "}), " << mismatches << " orbit mismatches, " << coord_fail << " coordinate, " << assoc_fail
     << " associativity failures";
  r.detail = os.str();
  return r;
}

CheckResult check_decay(SuiteContext& ctx) {
  CheckResult r{9, "mobius correlation decay", false, {}, 0};
  const int64_t N = ctx.opt.decay_N;
  const int64_t lo = 10000;
  if (N <= lo) throw DomainError("decay run needs N above 10^4");
  const auto& table = ctx.table(N);
  auto cps = default_checkpoints(lo, N);
  std::vector<std::pair<std::string, CorrelationSeries>> runs;
  {
    auto A = decay_unipotent();
    runs.emplace_back("unipotent", mobius_correlate(A, {Phase::from_double(0.3), Phase::from_double(0.1)}, {0, 1}, table,
                                                    cps, ctx.opt.threads));
  }
  runs.emplace_back("skew", mobius_correlate(decay_skew(), TorusPoint::from_double(0.2, 0.7), Character{0, 1}, table, cps,
                                             ctx.opt.threads));
  {
    auto sys = build_system(1.0, 5);
    runs.emplace_back("furstenberg", mobius_correlate(furstenberg_flow(sys, true), TorusPoint::from_double(0.2, 0.7),
                                                      Character{0, 1}, table, cps, ctx.opt.threads));
  }
  bool ok = true;
  std::ostringstream os;
  for (auto& [name, s] : runs) {
    double a = s.abs_over_N(0), b = s.abs_over_N(s.checkpoints.size() - 1);
    bool pass = b < a;
    ok = ok && pass;
    os << name << " " << a << " -> " << b << (pass ? "" : " FAIL") << "; ";
    if (!ctx.opt.artifacts.empty())
      write_atomic((std::filesystem::path(ctx.opt.artifacts) / ("decay_" + name + ".csv")).string(), series_csv(s));
  }
  r.pass = ok;
  r.detail = "N=" + std::to_string(N) + ": " + os.str();
  return r;
}

CheckResult check_determinism(SuiteContext& ctx) {
  CheckResult r{10, "thread determinism", false, {}, 0};
  const int64_t N = ctx.opt.determinism_N;
  const auto& table = ctx.table(N);
  auto cps = default_checkpoints(1000, N);
  auto nil_cps = default_checkpoints(1000, std::min<int64_t>(N, 200000));
  auto A = decay_unipotent();
  auto skew = decay_skew();
  auto sys = build_system(1.0, 5);
  auto furst = furstenberg_flow(sys, true);
  auto heis = demo_heis();
  PolyPhase pp{{0.1, std::sqrt(2.0), std::sqrt(3.0) / 7}, 1, 0};
  auto rot = alpha_value(AlphaSpec::golden());
  std::vector<std::function<std::vector<cplx>(int)>> runs = {
      [&](int t) { return mobius_correlate(skew, TorusPoint::from_double(0.2, 0.7), {0, 1}, table, cps, t).sums; },
      [&](int t) { return mobius_correlate(furst, TorusPoint::from_double(0.2, 0.7), {0, 1}, table, cps, t).sums; },
      [&](int t) {
        return mobius_correlate(A, {Phase::from_double(0.3), Phase::from_double(0.1)}, {0, 1}, table, cps, t).sums;
      },
      [&](int t) { return correlate_nil(heis, Heis{}, NilObservable{1, 1, 1}, table, nil_cps, t).sums; },
      [&](int t) { return std::vector<cplx>{poly_exp_sum(pp, table, N, t)}; },
      [&](int t) {
        auto b = bsz_test([&](int64_t n) { return e_phase(rot.times(n)); }, 0.1, 500, std::min<int64_t>(N, 100000),
                          table, 100, t);
        return std::vector<cplx>{cplx(b.worst_ratio, b.mobius_sum_ratio)};
      }};
  const char* names[] = {"skew", "furstenberg", "unipotent", "heisenberg", "expsum", "bsz"};
  bool ok = true;
  std::ostringstream os;
  for (size_t i = 0; i < runs.size(); ++i) {
    auto ref = runs[i](1);
    bool same = true;
    for (int t : {4, 8}) same = same && same_bits(ref, runs[i](t));
    ok = ok && same;
    os << names[i] << (same ? " identical" : " DIFFERS") << "; ";
  }
  r.pass = ok;
  r.detail = "threads 1/4/8: " + os.str();
  return r;
}

CheckResult run_check(int id, SuiteContext& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    switch (id) {
      case 1: r = check_orbit_oracle(ctx); break;
      case 2: r = check_birkhoff(ctx); break;
      case 3: r = check_cfrac(ctx); break;
      case 4: r = check_furstenberg(ctx); break;
      case 5: r = check_davenport(ctx); break;
      case 6: r = check_bsz(ctx); break;
      case 7: r = check_poly_lower_bound(ctx); break;
      case 8: r = check_heisenberg(ctx); break;
      case 9: r = check_decay(ctx); break;
      case 10: r = check_determinism(ctx); break;
      default: throw UsageError("no criterion " + std::to_string(id));
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    r.id = id;
    r.name = "criterion " + std::to_string(id);
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_result(const CheckResult& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "criterion %2d %-26s %s (%.1fs) ", r.id, r.name.c_str(), r.pass ? "PASS" : "FAIL",
                r.seconds);
  return buf + r.detail;
}

}  // namespace mdl
