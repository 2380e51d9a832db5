#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mdl/errors.hpp"
#include "mdl/flows.hpp"

using namespace mdl;

namespace {

const long double kPiL = 3.141592653589793238462643383279502884L;

double circ(Phase a, Phase b) { return std::fabs((a - b).centered()); }

AnalyticSeries real_series(double tau, int64_t M, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  AnalyticSeries h;
  h.tau = tau;
  for (int64_t m = 1; m <= M; ++m) {
    double w = std::exp(-tau * double(m));
    cplx c(U(rng) * w, U(rng) * w);
    h.set(m, c);
    h.set(-m, std::conj(c));
  }
  h.fit_constants();
  return h;
}

long double frac(long double v) { return v - std::floor(v); }

// naive long double iteration of (x1, x2) -> (a x1 + alpha, c x1 + d x2 + h(x1))
std::pair<long double, long double> iterate_ld(const SkewFlow& f, long double x1, long double x2, long double al,
                                               int64_t n) {
  for (int64_t j = 0; j < n; ++j) {
    long double hv = 0;
    for (auto& [m, c] : f.h.coeffs) {
      long double t = 2 * kPiL * frac((long double)m * x1);
      hv += c.real() * std::cos(t) - c.imag() * std::sin(t);
    }
    long double y1 = frac(f.a * x1 + al);
    long double y2 = frac(f.c * x1 + f.d * x2 + hv);
    x1 = y1;
    x2 = y2;
  }
  return {x1, x2};
}

double circ_ld(Phase a, long double b) {
  long double d = (long double)a.to_double() - b;
  d -= std::nearbyint(d);
  return double(std::fabs(d));
}

// x -> W x + t mod 1 in exact rationals
std::vector<mpq_class> exact_step(const std::vector<std::vector<mpz_class>>& W, const std::vector<mpq_class>& t,
                                  const std::vector<mpq_class>& x) {
  size_t m = x.size();
  std::vector<mpq_class> y(m);
  for (size_t i = 0; i < m; ++i) {
    mpq_class acc = t[i];
    for (size_t j = 0; j < m; ++j) acc += W[i][j] * x[j];
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), acc.get_num_mpz_t(), acc.get_den_mpz_t());
    acc -= fl;
    acc.canonicalize();
    y[i] = acc;
  }
  return y;
}

}  // namespace

TEST_CASE("skew_step") {
  SUBCASE("pure rotation") {
    auto f = make_skew(1, 0, 1, AlphaSpec::sqrt2_minus_1(), AnalyticSeries::zero());
    auto p = TorusPoint::from_double(0.3, 0.6);
    auto q = skew_step(f, p);
    CHECK(q.x2 == p.x2);
    CHECK(q.x1 == p.x1 + f.alpha.frac);
  }
  SUBCASE("origin with c = 1") {
    auto f = make_skew(1, 1, 1, AlphaSpec::rational(1, 4), AnalyticSeries::zero());
    auto q = skew_step(f, TorusPoint{});
    CHECK(q.x1.to_double() == 0.25);
    CHECK(q.x2.to_double() == 0.0);
  }
  SUBCASE("matches the closed form at n = 1") {
    auto f = make_skew(1, 3, 1, AlphaSpec::golden(), real_series(0.8, 12, 3));
    auto p = TorusPoint::from_double(0.71, 0.05);
    for (auto mode : {BirkhoffMode::Direct, BirkhoffMode::Fourier}) {
      auto a = skew_step(f, p), b = skew_orbit_closed(f, p, 1, mode);
      CHECK(circ(a.x1, b.x1) < 1e-14);
      CHECK(circ(a.x2, b.x2) < 1e-13);
    }
  }
  SUBCASE("a = -1 variant") {
    auto h = real_series(1.0, 6, 9);
    auto f = make_skew(-1, 2, -1, AlphaSpec::sqrt2_minus_1(), h);
    CHECK(!f.normalized());
    const double x1 = 0.2, x2 = 0.45;
    auto q = skew_step(f, TorusPoint::from_double(x1, x2));
    double al = std::sqrt(2.0) - 1;
    double e1 = -x1 + al, e2 = 2 * x1 - x2 + eval_series(h, x1).real();
    CHECK(circ(q.x1, Phase::from_double(e1 - std::floor(e1))) < 1e-14);
    CHECK(circ(q.x2, Phase::from_double(e2 - std::floor(e2))) < 1e-13);
    // non-normalized closed form is plain iteration
    auto p = TorusPoint::from_double(x1, x2);
    TorusPoint it = p;
    for (int j = 0; j < 50; ++j) it = skew_step(f, it);
    auto cl = skew_orbit_closed(f, p, 50);
    CHECK(cl.x1 == it.x1);
    CHECK(cl.x2 == it.x2);
  }
  SUBCASE("ad must be a unit") {
    CHECK_THROWS_AS(make_skew(2, 1, 1, AlphaSpec::golden(), AnalyticSeries::zero()), DomainError);
    AnalyticSeries h;
    h.set(1, cplx(0, 1));
    CHECK_THROWS_AS(make_skew(1, 1, 1, AlphaSpec::golden(), h), DomainError);
  }
}

TEST_CASE("closed orbit against iteration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 3; ++trial) {
    auto h = real_series(0.6 + 0.3 * trial, 10, 100 + trial);
    auto f = make_skew(1, trial, 1, AlphaSpec::sqrt2_minus_1(), h);
    auto p = TorusPoint::from_double(U(rng), U(rng));
    CHECK(skew_orbit_closed(f, p, 0).x1 == p.x1);
    CHECK(skew_orbit_closed(f, p, 0).x2 == p.x2);

    const int64_t n = 10000;
    TorusPoint it = p;
    for (int64_t j = 0; j < n; ++j) it = skew_step(f, it);
    for (auto mode : {BirkhoffMode::Direct, BirkhoffMode::Fourier}) {
      auto cl = skew_orbit_closed(f, p, n, mode);
      CHECK(circ(cl.x1, it.x1) < 1e-9);
      CHECK(circ(cl.x2, it.x2) < 1e-9);
    }
    auto [l1, l2] = iterate_ld(f, p.x1.to_double(), p.x2.to_double(), std::sqrt(2.0L) - 1, 2000);
    auto cl = skew_orbit_closed(f, p, 2000);
    CHECK(circ_ld(cl.x1, l1) < 1e-9);
    CHECK(circ_ld(cl.x2, l2) < 1e-9);
  }
  CHECK_THROWS_AS(skew_orbit_closed(make_skew(1, 0, 1, AlphaSpec::golden(), AnalyticSeries::zero()), {}, -1),
                  DomainError);
}

TEST_CASE("character phase") {
  auto h = real_series(1.0, 8, 5);
  auto f = make_skew(1, 2, 1, AlphaSpec::golden(), h);
  auto p = TorusPoint::from_double(0.13, 0.58);
  CHECK(character_phase(f, p, {0, 0}, 77).raw == 0);
  CHECK(circ(character_phase(f, p, {1, 0}, 77), p.x1 + f.alpha.times(77)) < 1e-15);

  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int64_t> B(-5, 5), Nn(0, 3000);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    Character b{B(rng), B(rng)};
    int64_t n = Nn(rng);
    auto y = skew_orbit_closed(f, p, n);
    Phase direct = b.b1 * y.x1 + b.b2 * y.x2;
    worst = std::max(worst, circ(character_phase(f, p, b, n), direct));
  }
  CHECK(worst < 1e-9);

  SUBCASE("b2 = 0 never touches h") {
    auto g = real_series(0.4, 20, 77);
    auto f2 = make_skew(1, 2, 1, AlphaSpec::golden(), g);
    for (int64_t n : {0, 1, 10, 12345}) CHECK(character_phase(f, p, {3, 0}, n) == character_phase(f2, p, {3, 0}, n));
  }
}

TEST_CASE("orbit properties") {
  auto h = real_series(0.9, 10, 8);
  auto f = make_skew(1, 1, 1, AlphaSpec::sqrt2_minus_1(), h);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0, 1);
  std::uniform_int_distribution<int64_t> Nn(0, 5000);
  SUBCASE("semigroup") {
    for (int i = 0; i < 30; ++i) {
      auto p = TorusPoint::from_double(U(rng), U(rng));
      int64_t n = Nn(rng), m = Nn(rng);
      auto a = skew_orbit_closed(f, p, n + m);
      auto b = skew_orbit_closed(f, skew_orbit_closed(f, p, n), m);
      CHECK(circ(a.x1, b.x1) < 1e-9);
      CHECK(circ(a.x2, b.x2) < 1e-9);
    }
  }
  SUBCASE("fibre differences persist") {
    auto p = TorusPoint::from_double(0.3, 0.1), pp = TorusPoint::from_double(0.3, 0.85);
    Phase d0 = p.x2 - pp.x2;
    TorusPoint a = p, b = pp;
    for (int64_t n = 1; n <= 500; ++n) {
      a = skew_step(f, a);
      b = skew_step(f, b);
      CHECK((a.x2 - b.x2) == d0);
    }
    for (int64_t n : {7, 1000, 99999}) CHECK((skew_orbit_closed(f, p, n).x2 - skew_orbit_closed(f, pp, n).x2) == d0);
  }
}

TEST_CASE("unipotent phase polynomial") {
  SUBCASE("identity map") {
    auto A = make_unipotent({{1, 0}, {0, 1}}, {0, 0});
    CHECK(A.nu == 1);
    CHECK(A.k == 0);
    std::vector<Phase> x{Phase::from_double(0.2), Phase::from_double(0.7)};
    auto P = unipotent_phase_poly(A, x, {2, 1}, 0);
    CHECK(P.degree() == 0);
    for (int64_t n : {0, 5, 100}) CHECK(circ(P.at(n), Phase::from_double(0.1)) < 1e-15);
  }
  SUBCASE("shear") {
    auto A = make_unipotent({{1, 0}, {1, 1}}, {0, 0});
    CHECK(A.k == 1);
    const double x1 = 0.3125, x2 = 0.0625;  // dyadic, so the monomial form is exact
    std::vector<Phase> x{Phase::from_double(x1), Phase::from_double(x2)};
    auto P = unipotent_phase_poly(A, x, {0, 1}, 0);
    CHECK(P.degree() == 1);
    REQUIRE(P.mono.size() >= 2);
    auto near = [](double a, double b) { return std::fabs(a - b - std::nearbyint(a - b)) < 1e-15; };
    CHECK(near(P.mono[0], x2));
    CHECK(near(P.mono[1], x1));
    for (size_t i = 2; i < P.mono.size(); ++i) CHECK(P.mono[i] == 0.0);
    for (int64_t n : {0, 1, 17, 1000}) CHECK(circ(P.at(n), Phase::from_double(x2) + n * Phase::from_double(x1)) < 1e-15);
  }
  SUBCASE("random unitriangular 3x3 against exact matrix powers") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> E(-3, 3), Q(1, 12);
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<std::vector<mpz_class>> W{{1, 0, 0}, {E(rng), 1, 0}, {E(rng), E(rng), 1}};
      if (trial % 2) W[0][0] = -1;  // quasi-unipotent with nu = 2
      std::vector<mpq_class> t{mpq_class(Q(rng), 13), mpq_class(0), mpq_class(Q(rng), 7)};
      for (auto& v : t) v.canonicalize();
      auto A = make_unipotent(W, t);
      std::vector<mpq_class> x0{mpq_class(Q(rng), 17), mpq_class(Q(rng), 19), mpq_class(Q(rng), 23)};
      for (auto& v : x0) v.canonicalize();
      std::vector<Phase> x;
      for (auto& v : x0) x.push_back(Phase::from_mpq(v));
      std::vector<int64_t> vv{E(rng), E(rng), 1};
      CAPTURE(trial);
      for (int64_t l = 0; l < A.nu; ++l) {
        auto P = unipotent_phase_poly(A, x, vv, l);
        CHECK(P.degree() <= augmented_order(A));
        CHECK(augmented_order(A) <= A.k + 1);
        double worst = 0;
        auto xs = x0;
        for (int64_t n = 0; n <= 1000; ++n) {
          if (n % A.nu == l) {
            std::vector<Phase> y;
            for (auto& v : xs) y.push_back(Phase::from_mpq(v));
            Phase direct = vv[0] * y[0] + vv[1] * y[1] + vv[2] * y[2];
            worst = std::max(worst, circ(P.at(n), direct));
          }
          xs = exact_step(W, t, xs);
        }
        CHECK(worst < 1e-12);
        if (A.nu > 1) CHECK_THROWS_AS(P.at(l + 1), DomainError);
      }
    }
  }
  SUBCASE("errors") {
    auto A = make_unipotent({{1, 0}, {1, 1}}, {0, 0});
    std::vector<Phase> x(2);
    CHECK_THROWS_AS(unipotent_phase_poly(A, x, {0, 0}, 0), DomainError);
    CHECK_THROWS_AS(unipotent_phase_poly(A, x, {0, 1}, 1), DomainError);
    CHECK_THROWS_AS(make_unipotent({{2, 1}, {1, 1}}, {0, 0}), DomainError);
    CHECK_THROWS_AS(make_unipotent({{2, 0}, {0, 1}}, {0, 0}), DomainError);
  }
}

TEST_CASE("unipotent orbit agrees with the phase polynomial") {
  auto A = make_unipotent({{1, 0, 0}, {2, 1, 0}, {1, 3, 1}}, {mpq_class(1, 3), 0, 0});
  std::vector<Phase> x{Phase::from_double(0.1), Phase::from_double(0.2), Phase::from_double(0.3)};
  auto P = unipotent_phase_poly(A, x, {0, 0, 1}, 0);
  CHECK(P.degree() == 3);
  std::vector<Phase> y = x;
  for (int64_t n = 0; n <= 300; ++n) {
    CHECK(circ(P.at(n), y[2]) < 1e-12);
    auto z = unipotent_orbit(A, x, n);
    CHECK(circ(z[2], y[2]) < 1e-12);
    y = unipotent_step(A, y);
  }
}
