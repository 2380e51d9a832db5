#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "json.hpp"
#include "mdl/errors.hpp"
#include "mdl/furstenberg.hpp"

using namespace mdl;

namespace {

const double kPi = 3.14159265358979323846;

double dist(double x) { return std::fabs(x - std::nearbyint(x)); }

}  // namespace

TEST_CASE("alpha construction") {
  SUBCASE("tau = 1 from the seed") {
    auto fa = build_alpha(1.0, 5);
    const auto& q = fa.cf.q;
    CHECK(q[0] == 1);
    CHECK(q[1] == 2);
    // e^2 = 7.389..., a_2 = round(e^2 / 2) = 4
    CHECK(fa.cf.a[2] == 4);
    CHECK(q[2] == 9);
    CHECK(9.0 / std::exp(2.0) >= 0.5);
    CHECK(9.0 / std::exp(2.0) <= 2.0);
    CHECK(q[3] == 8102);  // round(e^9 / 9) = 900, 900 * 9 + 2
  }
  SUBCASE("ratio invariant across tau") {
    for (double tau : {0.5, 1.0, 2.0}) {
      auto fa = build_alpha(tau, 5);
      CAPTURE(tau);
      CHECK(fa.ratios_ok());
      CHECK(fa.ratios.size() == 5);
      for (auto& r : fa.ratios) {
        CHECK(r.lo <= r.hi);
        CHECK(r.ok);
      }
      // recurrence and the convergent bracket are inherited from the expansion
      for (int k = 2; k <= fa.cf.K(); ++k) {
        CHECK(fa.cf.q[size_t(k)] == fa.cf.a[size_t(k)] * fa.cf.q[size_t(k - 1)] + fa.cf.q[size_t(k - 2)]);
        if (k + 1 <= fa.cf.K()) CHECK(check_convergent_bracket(fa.cf, k));
      }
    }
  }
  SUBCASE("exact ratio rows by hand") {
    auto fa = build_alpha(1.0, 3);
    REQUIRE(fa.ratios[0].mode == "exact");
    CHECK(fa.ratios[0].lo == doctest::Approx(9.0 / std::exp(2.0)).epsilon(1e-14));
    CHECK(fa.ratios[1].lo == doctest::Approx(8102.0 / std::exp(9.0)).epsilon(1e-12));
  }
  SUBCASE("depth 3 lists four denominators") {
    auto sys = build_system(1.0, 3);
    auto j = nlohmann::json::parse(furstenberg_json(sys, verify_combined_coefficients(sys)));
    CHECK(j["q_k"].size() == 4);
    CHECK(j["q_k"][2]["q"] == "9");
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(build_alpha(0.25, 5), DomainError);
    CHECK_THROWS_AS(build_alpha(5.0, 5), DomainError);
    CHECK_THROWS_AS(build_alpha(1.0, 2), DomainError);
  }
}

TEST_CASE("h") {
  for (double tau : {0.5, 1.0, 2.0}) {
    auto fa = build_alpha(tau, 5);
    auto h = build_h(fa);
    const auto& cf = fa.cf;
    CAPTURE(tau);
    CHECK(h.is_real());
    for (auto& [m, c] : h.coeffs) CHECK(h.coef(-m) == std::conj(c));
    for (int k = 1; k + 1 <= cf.K(); ++k) {
      if (!cf.q[size_t(k)].fits_slong_p()) break;
      int64_t q = cf.q[size_t(k)].get_si();
      cplx c = h.coef(q);
      if (c == cplx{}) continue;  // below double range, accounted in dropped_log10
      CHECK(check_convergent_bracket(cf, k));
      CHECK(std::abs(c) < 2 * kPi / (double(k) * cf.q[size_t(k + 1)].get_d()));
      // direct value from the convergent: theta = q alpha - l
      auto th = theta_of(cf, k);
      REQUIRE(th.known);
      cplx expect = (cplx(std::cos(2 * kPi * th.value), std::sin(2 * kPi * th.value)) - 1.0) / double(k);
      CHECK(std::abs(c - expect) <= 1e-12 * std::abs(expect));
    }
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 100; ++i) CHECK(std::fabs(eval_series(h, U(rng)).imag()) < 1e-12);
  }
  SUBCASE("support is {+-q_k}") {
    auto sys = build_system(0.5, 5);
    for (auto& [m, c] : sys.h.coeffs) {
      bool found = false;
      for (auto& q : sys.alpha.cf.q)
        if (q > 1 && q.fits_slong_p() && (m == q.get_si() || m == -q.get_si())) found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("correction") {
  SUBCASE("coboundary identities") {
    for (double tau : {0.5, 1.0, 2.0}) {
      auto sys = build_system(tau, 5);
      auto e = coboundary_errors(sys, 100, 99);
      CHECK(e.err_g < 1e-9);
      CHECK(e.err_G < 1e-9);
      CHECK(sys.G.coef(0) == cplx{});
      CHECK(sys.H.coef(0) == cplx(1.0));
    }
  }
  SUBCASE("H coefficients") {
    auto c = build_correction(build_alpha(1.0, 5), 30);
    CHECK(c.M == 30);
    for (int64_t m = -30; m <= 30; ++m) CHECK(c.H.coef(m) == cplx(std::exp(-2.0 * double(m < 0 ? -m : m))));
    CHECK(c.H.coef(31) == cplx{});
    CHECK(default_correction_M(1.0) == int64_t(std::ceil(std::log(1e20) / 2.0)));
  }
  SUBCASE("block sums shrink like e^{-tau q_k}") {
    for (double tau : {0.5, 1.0, 2.0}) {
      auto sys = build_system(tau, 5);
      const auto& cf = sys.alpha.cf;
      const double al = cf.alpha.approx();
      for (int k = 1; k + 1 <= cf.K(); ++k) {
        if (!cf.q[size_t(k + 1)].fits_slong_p()) break;
        int64_t q = cf.q[size_t(k)].get_si(), qn = cf.q[size_t(k + 1)].get_si();
        double s = 0;
        for (int64_t m = q; m < qn && m <= sys.M; ++m)
          if (m % q) s += sys.H.coef(m).real() / dist(double(m) * al);
        CAPTURE(k);
        CHECK(s * std::exp(tau * double(q)) < 1.0);
      }
    }
  }
}

TEST_CASE("combined coefficients") {
  for (double tau : {0.5, 1.0, 2.0}) {
    auto sys = build_system(tau, 5);
    auto rep = verify_combined_coefficients(sys);
    CAPTURE(tau);
    CHECK(rep.ok);
    CHECK(rep.off_support_checked > 0);
    CHECK(rep.off_support_mismatch == 0);
    CHECK(rep.rows.size() == 5);
    for (auto& r : rep.rows) {
      CHECK(r.lo >= 1 / (4 * kPi));
      CHECK(r.hi <= 4 * kPi);
    }
    CHECK(sys.combined.tau == tau);
    REQUIRE(sys.combined.tau2.has_value());
    CHECK(*sys.combined.tau2 > 2 * tau);
    CHECK(sys.combined.c_low > 0);
    for (auto& [m, c] : sys.combined.coeffs)
      CHECK(std::abs(c) <= sys.combined.c_up * std::exp(-tau * double(m < 0 ? -m : m)) * (1 + 1e-12));
  }
  auto sys = build_system(1.0, 5);
  SUBCASE("between q_2 and q_3 only H remains") {
    for (int64_t m = 10; m <= sys.M; ++m) CHECK(sys.combined.coef(m) == cplx(std::exp(-2.0 * double(m))));
  }
  SUBCASE("k = 2 by hand") {
    auto rep = verify_combined_coefficients(sys);
    auto& r = rep.rows[1];
    CHECK(r.k == 2);
    CHECK(r.q == "9");
    auto th = theta_of(sys.alpha.cf, 2);
    cplx hv = (cplx(std::cos(2 * kPi * th.value), std::sin(2 * kPi * th.value)) - 1.0) / 2.0 + std::exp(-18.0);
    double ratio = std::abs(hv) * 2 * std::exp(9.0);
    CHECK(r.lo <= ratio * (1 + 1e-9));
    CHECK(r.hi >= ratio * (1 - 1e-9));
    CHECK(r.ok);
  }
}

TEST_CASE("irregularity probe") {
  auto sys = build_system(1.0, 5);
  auto x0 = TorusPoint::from_double(0.1, 0.2);
  SUBCASE("trivial character") {
    auto r = irregularity_probe(sys, {0, 0}, x0, {10, 100, 1000});
    for (auto& a : r.averages) CHECK(a == cplx(1.0));
    CHECK(r.oscillation == 0.0);
  }
  SUBCASE("rotation factor equidistributes") {
    std::vector<int64_t> w{100, 1000, 10000, 100000};
    auto r = irregularity_probe(sys, {1, 0}, x0, w);
    const double s = std::fabs(std::sin(kPi * sys.alpha.cf.alpha.approx()));
    for (size_t i = 0; i < w.size(); ++i) CHECK(std::abs(r.averages[i]) <= 1.0 / (double(w[i]) * s) + 1e-12);
    CHECK(r.oscillation < 1e-3);
  }
  SUBCASE("fibre character at the denominators") {
    // empirical threshold, see the recorded run
    auto r = irregularity_probe(sys, {0, 1}, x0, {2, 9, 8102});
    CHECK(r.oscillation > 0.05);
  }
}

TEST_CASE("sharp scales for tau = 2") {
  auto sys = build_system(2.0, 5);
  auto r = classify_case(sys.alpha.cf, sys.combined, 1000000, 1, 1);
  CHECK(r.J >= 1);
  CHECK(r.label != "NoSharpScale");
}
