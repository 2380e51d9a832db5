#pragma once
#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "mdl/analytic.hpp"
#include "mdl/cfrac.hpp"
#include "mdl/fixed.hpp"

namespace mdl {

struct TorusPoint {
  Phase x1, x2;
  static TorusPoint from_double(double a, double b) { return {Phase::from_double(a), Phase::from_double(b)}; }
};

struct Character {
  int64_t b1 = 0, b2 = 0;
};

// T(x1, x2) = (a x1 + alpha, c x1 + d x2 + h(x1)) on T^2, ad = +-1
struct SkewFlow {
  int64_t a = 1, c = 0, d = 1;
  AlphaSpec alpha_spec;
  AlphaValue alpha;
  AnalyticSeries h;

  bool normalized() const { return a == 1 && d == 1; }
};
SkewFlow make_skew(int64_t a, int64_t c, int64_t d, const AlphaSpec& alpha, const AnalyticSeries& h);

enum class BirkhoffMode { Direct, Fourier };

TorusPoint skew_step(const SkewFlow& f, const TorusPoint& p);
// T^n p; closed form when a = d = 1, otherwise n-fold iteration
TorusPoint skew_orbit_closed(const SkewFlow& f, const TorusPoint& p, int64_t n, BirkhoffMode mode = BirkhoffMode::Fourier);
// <b, T^n p> mod 1 as P(n) + b2 * Birkhoff sum
Phase character_phase(const SkewFlow& f, const TorusPoint& p, const Character& b, int64_t n,
                      BirkhoffMode mode = BirkhoffMode::Fourier);

// x -> W x + t on T^m. A coordinate with cyclic[i] = r > 0 lives in (1/r)Z/Z.
struct UnipotentAffine {
  int m = 0;
  std::vector<std::vector<mpz_class>> W;
  std::vector<mpq_class> t;
  std::vector<int64_t> cyclic;
  int64_t nu = 1;  // W^nu = I + N
  int k = 0;       // N^(k+1) = 0, N^k != 0 (k = 0 when N = 0)
  std::vector<std::vector<mpz_class>> N;
};
UnipotentAffine make_unipotent(std::vector<std::vector<mpz_class>> W, std::vector<mpq_class> t,
                               std::vector<int64_t> cyclic = {});

std::vector<Phase> unipotent_step(const UnipotentAffine& A, const std::vector<Phase>& x);
std::vector<Phase> unipotent_orbit(const UnipotentAffine& A, const std::vector<Phase>& x, int64_t n);

// phi(n) with psi_v(T^n x) = e(phi(n)) on n = l + nu q:
// phi = sum_t C(q, t) c_t, c_t = <v, N_aug^t T^l x> (exact mod 1).
struct UnipotentPhasePoly {
  int64_t nu = 1, l = 0;
  std::vector<Phase> c;        // binomial-basis coefficients in q
  std::vector<double> mono;    // phi as a real polynomial in n (any lift of the c_t)
  int degree() const;
  Phase at(int64_t n) const;   // requires n = l mod nu
};
UnipotentPhasePoly unipotent_phase_poly(const UnipotentAffine& A, const std::vector<Phase>& x,
                                        const std::vector<int64_t>& v, int64_t l);

// nilpotency order of the augmented N (translation folded in); bounds the phase degree
int augmented_order(const UnipotentAffine& A);

}  // namespace mdl
