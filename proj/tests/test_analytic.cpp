#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mdl/analytic.hpp"
#include "mdl/cfrac.hpp"
#include "mdl/errors.hpp"
#include "mdl/furstenberg.hpp"

using namespace mdl;

namespace {

const double kPi = 3.14159265358979323846;

// plain long double evaluation of sum h(m) e(m x)
std::complex<long double> naive_eval(const AnalyticSeries& h, long double x) {
  std::complex<long double> s = 0;
  for (auto& [m, c] : h.coeffs) {
    long double t = std::fmod((long double)m * x, 1.0L);
    s += std::complex<long double>(c.real(), c.imag()) *
         std::complex<long double>(std::cos(2 * kPi * t), std::sin(2 * kPi * t));
  }
  return s;
}

cplx e(double x) { return {std::cos(2 * kPi * x), std::sin(2 * kPi * x)}; }

AnalyticSeries exp_series(double tau, int64_t M) {
  AnalyticSeries h;
  h.tau = tau;
  for (int64_t m = 1; m <= M; ++m) {
    double v = std::exp(-tau * double(m));
    h.set(m, cplx(v, 0.3 * v));
    h.set(-m, cplx(v, -0.3 * v));
  }
  h.fit_constants();
  return h;
}

AnalyticSeries cosine() {
  AnalyticSeries h;
  h.set(1, 0.5);
  h.set(-1, 0.5);
  h.fit_constants();
  return h;
}

double dist(double x) { return std::fabs(x - std::nearbyint(x)); }

}  // namespace

TEST_CASE("eval_series") {
  SUBCASE("two terms") {
    AnalyticSeries h;
    h.set(1, cplx(0.5, 0));
    h.set(-1, cplx(0.5, 0));
    for (double x : {0.0, 0.125, 0.25, 0.3, 0.77}) {
      CHECK(eval_series(h, x).real() == doctest::Approx(std::cos(2 * kPi * x)).epsilon(1e-14));
      CHECK(std::fabs(eval_series(h, x).imag()) < 1e-15);
    }
  }
  SUBCASE("period one") {
    auto h = exp_series(0.7, 30);
    for (double x : {0.1, 0.35, 0.9}) CHECK(std::abs(eval_series(h, x) - eval_series(h, x + 1.0)) < 1e-13);
  }
  SUBCASE("furstenberg h against a direct sum") {
    auto sys = build_system(1.0, 5);
    for (double x : {0.0, 0.2, 0.61803, 0.9}) {
      auto ref = naive_eval(sys.h, x);
      auto got = eval_series(sys.h, x, sys.h.max_freq());
      CHECK(std::abs(got - cplx(double(ref.real()), double(ref.imag()))) < 1e-12);
    }
  }
  SUBCASE("phase and double agree") {
    auto h = exp_series(1.0, 25);
    for (double x : {0.05, 0.5, 0.999}) {
      CHECK(std::abs(eval_series(h, Phase::from_double(x), 25) - eval_series(h, x, 25)) < 1e-13);
    }
  }
}

TEST_CASE("birkhoff sums") {
  auto a = alpha_value(AlphaSpec::sqrt2_minus_1());
  auto h = cosine();
  CHECK(birkhoff_sum_direct(h, 0.3, a, 0) == cplx{});
  CHECK(std::abs(birkhoff_sum_direct(h, 0.3, a, 1) - eval_series(h, 0.3)) < 1e-15);

  cplx direct = birkhoff_sum_direct(h, 0.3, a, 1000);
  cplx fourier = birkhoff_sum_fourier(h, 0.3, a, 1000, 1);
  CHECK(std::abs(direct - fourier) < 1e-9);

  // independent oracle: cos summed in long double
  long double s = 0, al = std::sqrt(2.0L) - 1.0L;
  for (int j = 0; j < 1000; ++j) s += std::cos(2 * kPi * std::fmod(0.3L + j * al, 1.0L));
  CHECK(std::fabs(direct.real() - double(s)) < 1e-9);

  SUBCASE("rational alpha reads the ratio as n") {
    auto half = alpha_value(AlphaSpec::rational(1, 2));
    AnalyticSeries g;
    g.set(2, cplx(0.2, 0.1));
    g.set(-2, cplx(0.2, -0.1));
    g.fit_constants();
    const double x1 = 0.17;
    cplx expect = 5.0 * (g.coef(2) * e(2 * x1) + g.coef(-2) * e(-2 * x1));
    CHECK(std::abs(birkhoff_sum_fourier(g, x1, half, 5, 2) - expect) < 1e-13);
    CHECK(std::abs(birkhoff_sum_direct(g, x1, half, 5) - expect) < 1e-13);
  }
  SUBCASE("fourier within the tail bound") {
    auto g = exp_series(1.0, 40);
    for (int64_t n : {10, 100, 1000}) {
      cplx d = birkhoff_sum_direct(g, 0.41, a, n);
      cplx f = birkhoff_sum_fourier(g, 0.41, a, n, 40);
      CHECK(std::abs(d - f) <= birkhoff_tail_bound(g, a, n, 40));
    }
  }
}

TEST_CASE("cobounding series") {
  auto a = alpha_value(AlphaSpec::sqrt2_minus_1());
  auto h = exp_series(2.0, 18);
  auto g = cobounding_series(h, a, 0, 18);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    double x = U(rng);
    cplx lhs = eval_series(g, x + a.approx()) - eval_series(g, x);
    worst = std::max(worst, std::abs(lhs - eval_series(h, x)));
  }
  CHECK(worst < 1e-9);

  SUBCASE("zero series") {
    auto z = cobounding_series(AnalyticSeries::zero(), a, 0, 50);
    CHECK(z.coeffs.empty());
  }
  SUBCASE("difference undoes cobounding") {
    auto d = difference_series(g, a);
    for (auto& [m, c] : h.coeffs) CHECK(std::abs(d.coef(m) - c) <= 1e-13 * std::abs(c));
    CHECK(d.coeffs.size() == h.coeffs.size());
  }
  SUBCASE("rational alpha obeys ||m alpha|| >= 1/q") {
    auto r = alpha_value(AlphaSpec::rational(3, 7));
    auto hh = exp_series(0.5, 30);
    auto gg = cobounding_series(hh, r, 7, 30);
    for (auto& [m, c] : gg.coeffs) {
      CHECK(m % 7 != 0);
      CHECK(dist(double(m) * 3.0 / 7.0) >= 1.0 / 7.0 - 1e-15);
      // |e(t) - 1| = 2|sin(pi t)| >= 4||t||
      CHECK(std::abs(c) <= std::abs(hh.coef(m)) * 7.0 / 4.0 * (1 + 1e-12));
    }
  }
}

TEST_CASE("rational decomposition") {
  SUBCASE("alpha = 0") {
    auto z = alpha_value(AlphaSpec::rational(0, 1));
    auto h = exp_series(1.0, 10);
    auto r = rational_case_decompose(h, z, 10);
    CHECK(r.q == 1);
    CHECK(r.g.coeffs.empty());
    CHECK(r.beta.coeffs == h.coeffs);
  }
  SUBCASE("support +-1 at alpha = 1/2") {
    auto half = alpha_value(AlphaSpec::rational(1, 2));
    AnalyticSeries h;
    h.set(1, cplx(0.3, 0.2));
    h.set(-1, cplx(0.3, -0.2));
    auto r = rational_case_decompose(h, half, 5);
    CHECK(r.q == 2);
    CHECK(r.beta.coeffs.empty());
    CHECK(std::abs(r.g.coef(1) - h.coef(1) / -2.0) < 1e-15);
    CHECK(std::abs(r.g.coef(-1) - h.coef(-1) / -2.0) < 1e-15);
  }
  SUBCASE("reconstruction") {
    auto al = alpha_value(AlphaSpec::rational(2, 5));
    auto h = exp_series(0.8, 25);
    auto r = rational_case_decompose(h, al, 25);
    const double x1 = 0.123;
    const int64_t n = 1000;
    cplx lhs = birkhoff_sum_direct(h, x1, al, n);
    cplx rhs = eval_series(r.g, Phase::from_double(x1) + al.times(n), 25) - eval_series(r.g, x1, 25) +
               double(n) * eval_series(r.beta, x1, 25);
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
  CHECK_THROWS_AS(rational_case_decompose(cosine(), alpha_value(AlphaSpec::golden()), 5), DomainError);
}

TEST_CASE("big H") {
  SUBCASE("no sharp scale gives zero") {
    auto cf = cf_expand(AlphaSpec::golden(), 30);
    auto h = exp_series(1.0, 30);
    CHECK(big_H(cf, h, 8, 100, 0.2, 1e9) == cplx{});
  }
  auto sys = build_system(1.0, 5);
  const auto& cf = sys.alpha.cf;
  SUBCASE("single window by hand") {
    // q = 9 is the only sharp scale below 20 at B = 4
    AnalyticSeries h;
    h.set(9, cplx(0.01, 0.02));
    h.set(-9, cplx(0.01, -0.02));
    const double x1 = 0.37;
    auto th = theta_of(cf, 2);
    REQUIRE(th.known);
    REQUIRE(cf.q[2] == 9);
    for (int64_t n : {1, 7, 500}) {
      cplx expect{};
      for (int s : {1, -1}) {
        double t = s * th.value;
        expect += h.coef(9 * s) * e(9 * s * x1) * (e(double(n) * t) - 1.0) / (e(t) - 1.0);
      }
      CHECK(std::abs(big_H(cf, h, 4, n, x1, 20) - expect) < 1e-9 * std::abs(expect));
    }
  }
  SUBCASE("truncation at Y") {
    const double Y = 20;
    for (int64_t n : {1, 10, 100, 1000}) {
      cplx a = big_H(cf, sys.combined, 4, n, 0.3, Y);
      cplx b = big_H(cf, sys.combined, 4, n, 0.3, INFINITY);
      CHECK(std::abs(a - b) <= std::exp(-Y) * double(n));
    }
  }
}

TEST_CASE("scales and Taylor data") {
  SUBCASE("phi") {
    Scale s{9, 1e-4, 3.0};
    CHECK(phi_j(AnalyticSeries::zero(), s) == 0.0);
    AnalyticSeries h;
    h.set(9, 0.25);
    h.set(-9, 0.25);
    CHECK(phi_j(h, s) == doctest::Approx(0.5));
    h.set(18, 0.1);
    CHECK(phi_j(h, s) == doctest::Approx(0.5 + 4 * 0.1));
    h.set(27, 1.0);  // outside the window |k| < 3
    CHECK(phi_j(h, s) == doctest::Approx(0.9));
  }
  SUBCASE("phi decreases in tau") {
    Scale s{3, 1e-3, 6.0};
    double prev = INFINITY;
    for (double tau : {0.5, 1.0, 2.0, 3.0}) {
      double p = phi_j(exp_series(tau, 40), s);
      CHECK(p < prev);
      prev = p;
    }
  }
  SUBCASE("reconstruction within the remainder") {
    auto sys = build_system(1.0, 5);
    auto th = theta_of(sys.alpha.cf, 2);
    REQUIRE(th.known);
    Scale s{9, th.value, 4.0};
    AnalyticSeries h = exp_series(0.05, 40);
    auto t = taylor_coefficients(h, s, 0.21, 200);
    for (int64_t n : {1, 2, 10, 50, 200}) {
      cplx F = F_j(h, s, 0.21, n);
      CHECK(std::abs(F - f_j(h, s, 0.21, double(n) * s.theta)) < 1e-9 * (1 + std::abs(F)));
      CHECK(std::abs(F - taylor_reconstruct(t, n)) <= taylor_remainder(t, n) + 1e-10);
    }
    CHECK(taylor_remainder(t, 200) <= t.remainder_bound_N);
  }
  SUBCASE("single coefficient closed form") {
    AnalyticSeries h;
    const cplx v(0.4, -0.1);
    h.set(5, v);
    Scale s{5, 2e-3, 2.0};
    auto t = taylor_coefficients(h, s, 0.6, 10);
    cplx w = v * e(5 * 0.6);
    cplx i2pi(0, 2 * kPi);
    CHECK(std::abs(t.c0 - w) < 1e-14);
    CHECK(std::abs(t.c1 - i2pi * w) < 1e-13);
    CHECK(std::abs(t.c2 - i2pi * i2pi / 2.0 * w) < 1e-12);
  }
  SUBCASE("case B entry points") {
    CaseReport r;
    r.label = "B";
    r.N = 100;
    r.J = 1;
    r.m = {mpz_class(9)};
    r.theta = {1e-4};
    r.M = {3.0};
    auto t = caseB_taylor(AnalyticSeries::zero(), r, 0.2);
    CHECK(t.c0 == cplx{});
    CHECK(t.c1 == cplx{});
    CHECK(t.c2 == cplx{});
    r.label = "A";
    CHECK_THROWS_AS(caseB_taylor(AnalyticSeries::zero(), r, 0.2), DomainError);
    CHECK_THROWS_AS(scale_from_report(r, 1), RangeError);
  }
}

TEST_CASE("cocycle identity") {
  auto a = alpha_value(AlphaSpec::golden());
  auto h = exp_series(1.2, 20);
  const double x1 = 0.55;
  for (int64_t m : {3, 40}) {
    for (int64_t n : {5, 77}) {
      cplx whole = birkhoff_sum_direct(h, x1, a, m + n);
      cplx split = birkhoff_sum_direct(h, x1, a, m) +
                   birkhoff_sum_direct(h, (Phase::from_double(x1) + a.times(m)).to_double(), a, n);
      CHECK(std::abs(whole - split) < 1e-11);
    }
  }
}
