#pragma once
// 3-dimensional Heisenberg group, [X1, X2] = X3. Elements are held in
// second-kind coordinates g = exp(v1 X1) exp(v2 X2) exp(v3 X3), exact rationals.
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mdl/correlate.hpp"
#include "mdl/mobius.hpp"

namespace mdl {

struct Heis {
  mpq_class v1 = 0, v2 = 0, v3 = 0;
  bool operator==(const Heis& o) const { return v1 == o.v1 && v2 == o.v2 && v3 == o.v3; }
};

Heis heis_mul(const Heis& a, const Heis& b);
Heis heis_inv(const Heis& a);
Heis heis_pow(const Heis& a, const mpz_class& k);

// first-kind coordinates u with g = exp(u1 X1 + u2 X2 + u3 X3)
std::array<mpq_class, 3> coord_first_from_second(const Heis& v);
Heis coord_second_from_first(const std::array<mpq_class, 3>& u);

// right coset representative with v1, v2, v3 in [0, 1)
Heis reduce_mod_gamma(const Heis& v);

using IMat3 = std::array<std::array<int64_t, 3>, 3>;

// T(x Gamma) = g sigma(x) Gamma, sigma(exp X) = exp(dsigma X)
struct HeisAffine {
  Heis g;
  IMat3 dsigma{};  // columns are the images of X1, X2, X3
  int64_t nu = 1;  // dsigma^nu unipotent
};
HeisAffine make_heis_affine(const Heis& g, const IMat3& dsigma);

Heis heis_sigma(const IMat3& d, const Heis& x);
Heis nil_step(const HeisAffine& T, const Heis& x);  // reduced
Heis nil_orbit(const HeisAffine& T, const Heis& x, int64_t n);

struct QPoly {
  std::vector<mpq_class> c;  // c[i] x^i
  int degree() const;
  mpq_class operator()(const mpq_class& x) const;
};

// T^n(x Gamma) = b_1^{h_1(n)} ... b_k^{h_k(n)} Gamma on n = l mod nu.
// Factors come grouped by coordinate: b = exp(c X_j), h(n) = n^e.
struct PolyOrbitRep {
  int64_t nu = 1, l = 0;
  struct Factor {
    Heis b;
    int coord;  // j
    int power;  // h(n) = n^power
  };
  std::vector<Factor> factors;
  std::array<QPoly, 3> Z;  // second-kind coordinates as polynomials in n (before reduction)
  int y_degree = 0;        // degree in q of dSigma^q applied to the start point
  int k() const { return int(factors.size()); }
  Heis eval(int64_t n) const;          // reduced, from Z
  Heis eval_factors(int64_t n) const;  // reduced, multiplying the factors out
};
PolyOrbitRep compile_poly_orbit(const HeisAffine& T, const Heis& x, int64_t l);

// f(v) = e(p v1 + q v2 + r v3) on the reduced representative
struct NilObservable {
  int64_t p = 0, q = 0, r = 0;
};
// residue < 0 sums over every n <= N, otherwise over n = residue mod nu
CorrelationSeries correlate_nil(const HeisAffine& T, const Heis& x, const NilObservable& f, const MobiusTable& table,
                                const std::vector<int64_t>& checkpoints, int threads = 0, int64_t residue = -1);

}  // namespace mdl
