#include "mdl/nilflow.hpp"

#include <string>

#include "mdl/errors.hpp"
#include "mdl/parallel.hpp"

namespace mdl {

namespace {

// matrix coordinates: g = [[1, a, c], [0, 1, b], [0, 0, 1]], c = v3 + v1 v2
struct Mat {
  mpq_class a, b, c;
};
Mat to_mat(const Heis& v) { return {v.v1, v.v2, v.v3 + v.v1 * v.v2}; }
Heis from_mat(const Mat& m) { return {m.a, m.b, m.c - m.a * m.b}; }

mpq_class floor_q(const mpq_class& x) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return mpq_class(f);
}

using M3 = std::array<std::array<mpz_class, 3>, 3>;

M3 to_m3(const IMat3& d) {
  M3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = mpz_class(std::to_string(d[i][j]));
  return r;
}

M3 mul3(const M3& A, const M3& B) {
  M3 C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      C[i][j] = 0;
      for (int k = 0; k < 3; ++k) C[i][j] += A[i][k] * B[k][j];
    }
  return C;
}

bool zero3(const M3& A) {
  for (auto& r : A)
    for (auto& v : r)
      if (v != 0) return false;
  return true;
}

// polynomial helpers over mpq
QPoly padd(const QPoly& a, const QPoly& b) {
  QPoly r;
  r.c.assign(std::max(a.c.size(), b.c.size()), 0);
  for (size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
  for (size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
  return r;
}
QPoly pmul(const QPoly& a, const QPoly& b) {
  QPoly r;
  if (a.c.empty() || b.c.empty()) return r;
  r.c.assign(a.c.size() + b.c.size() - 1, 0);
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}
QPoly pscale(const QPoly& a, const mpq_class& s) {
  QPoly r = a;
  for (auto& v : r.c) v *= s;
  return r;
}
QPoly pconst(const mpq_class& v) { return QPoly{{v}}; }

// interpolate the polynomial of degree <= d through (i, vals[i]), i = 0..d
QPoly interpolate(const std::vector<mpq_class>& vals) {
  QPoly r;
  const size_t n = vals.size();
  for (size_t i = 0; i < n; ++i) {
    QPoly basis = pconst(1);
    mpq_class den = 1;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      basis = pmul(basis, QPoly{{mpq_class(-(long)j), mpq_class(1)}});
      den *= mpq_class((long)i - (long)j);
    }
    r = padd(r, pscale(basis, vals[i] / den));
  }
  return r;
}

// S(q) = sum_{j<q} p(j)
QPoly prefix_sum(const QPoly& p) {
  const int d = std::max(p.degree(), 0);
  std::vector<mpq_class> vals;
  mpq_class acc = 0;
  for (int q = 0; q <= d + 1; ++q) {
    vals.push_back(acc);
    acc += p(mpq_class(q));
  }
  return interpolate(vals);
}

// p((n - l)/nu) as a polynomial in n
QPoly substitute(const QPoly& p, int64_t l, int64_t nu) {
  mpq_class c0(-l, nu);
  c0.canonicalize();
  QPoly lin{{c0, mpq_class(1, nu)}};
  lin.c[0].canonicalize();
  lin.c[1].canonicalize();
  QPoly r, pw = pconst(1);
  for (size_t i = 0; i < p.c.size(); ++i) {
    r = padd(r, pscale(pw, p.c[i]));
    pw = pmul(pw, lin);
  }
  return r;
}

// first-kind coordinates of Sigma^q(w) as polynomials in q, dSigma = I + N with N^3 = 0
std::array<QPoly, 3> orbit_first(const M3& N, const std::array<mpq_class, 3>& u) {
  std::array<mpq_class, 3> Nu{}, NNu{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) Nu[i] += N[i][k] * u[k];
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) NNu[i] += N[i][k] * Nu[k];
  std::array<QPoly, 3> r;
  // C(q,0) u + C(q,1) N u + C(q,2) N^2 u
  for (int i = 0; i < 3; ++i) r[i] = QPoly{{u[i], Nu[i] - NNu[i] / 2, NNu[i] / 2}};
  return r;
}

struct PMat {
  QPoly a, b, c;
};
PMat first_to_pmat(const std::array<QPoly, 3>& U) {
  return {U[0], U[1], padd(U[2], pscale(pmul(U[0], U[1]), mpq_class(1, 2)))};
}

void trim(QPoly& p) {
  while (!p.c.empty() && p.c.back() == 0) p.c.pop_back();
}

}  // namespace

Heis heis_mul(const Heis& x, const Heis& y) { return {x.v1 + y.v1, x.v2 + y.v2, x.v3 + y.v3 - y.v1 * x.v2}; }

Heis heis_inv(const Heis& x) { return {-x.v1, -x.v2, -x.v3 - x.v1 * x.v2}; }

Heis heis_pow(const Heis& x, const mpz_class& k) {
  if (k < 0) return heis_pow(heis_inv(x), -k);
  Mat m = to_mat(x);
  mpq_class kq(k);
  mpq_class tri(k * (k - 1), 2);
  tri.canonicalize();
  return from_mat({kq * m.a, kq * m.b, kq * m.c + tri * m.a * m.b});
}

std::array<mpq_class, 3> coord_first_from_second(const Heis& v) { return {v.v1, v.v2, v.v3 + v.v1 * v.v2 / 2}; }

Heis coord_second_from_first(const std::array<mpq_class, 3>& u) { return {u[0], u[1], u[2] - u[0] * u[1] / 2}; }

Heis reduce_mod_gamma(const Heis& v) {
  mpq_class f1 = floor_q(v.v1), f2 = floor_q(v.v2);
  mpq_class t = v.v3 + f1 * v.v2;
  return {v.v1 - f1, v.v2 - f2, t - floor_q(t)};
}

HeisAffine make_heis_affine(const Heis& g, const IMat3& d) {
  if (d[0][2] != 0 || d[1][2] != 0) throw DomainError("dsigma must map X3 into the center");
  const int64_t a = d[0][0], b = d[0][1], c = d[1][0], dd = d[1][1];
  const int64_t det2 = a * dd - b * c;
  if (det2 != 1 && det2 != -1) throw DomainError("dsigma upper block must have determinant +-1");
  if (d[2][2] != det2) throw DomainError("dsigma must act on X3 by the determinant of its upper block");
  mpq_class ac2(a * c, 2), bd2(b * dd, 2);
  ac2.canonicalize();
  bd2.canonicalize();
  mpq_class e2 = mpq_class(d[2][0]) - ac2;
  mpq_class f2 = mpq_class(d[2][1]) - bd2;
  e2.canonicalize();
  f2.canonicalize();
  if (e2.get_den() != 1 || f2.get_den() != 1) throw DomainError("sigma does not preserve the integer lattice");
  HeisAffine T;
  T.g = g;
  T.dsigma = d;
  M3 D = to_m3(d), P;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) P[i][j] = i == j ? 1 : 0;
  for (int64_t nu = 1; nu <= 12; ++nu) {
    P = mul3(P, D);
    M3 N = P;
    for (int i = 0; i < 3; ++i) N[i][i] -= 1;
    if (zero3(mul3(mul3(N, N), N))) {
      T.nu = nu;
      return T;
    }
  }
  throw DomainError("dsigma is not quasi-unipotent (positive entropy)");
}

Heis heis_sigma(const IMat3& d, const Heis& x) {
  auto u = coord_first_from_second(x);
  std::array<mpq_class, 3> w{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) w[i] += mpq_class(d[i][j]) * u[j];
  return coord_second_from_first(w);
}

Heis nil_step(const HeisAffine& T, const Heis& x) { return reduce_mod_gamma(heis_mul(T.g, heis_sigma(T.dsigma, x))); }

Heis nil_orbit(const HeisAffine& T, const Heis& x, int64_t n) {
  Heis y = reduce_mod_gamma(x);
  for (int64_t i = 0; i < n; ++i) y = nil_step(T, y);
  return y;
}

int QPoly::degree() const {
  int d = int(c.size()) - 1;
  while (d >= 0 && c[size_t(d)] == 0) --d;
  return d;  // -1 for the zero polynomial
}

mpq_class QPoly::operator()(const mpq_class& x) const {
  mpq_class acc = 0;
  for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

Heis PolyOrbitRep::eval(int64_t n) const {
  mpq_class x(mpz_class(std::to_string(n)));
  return reduce_mod_gamma({Z[0](x), Z[1](x), Z[2](x)});
}

Heis PolyOrbitRep::eval_factors(int64_t n) const {
  Heis acc;
  mpz_class nz(std::to_string(n));
  for (auto& f : factors) {
    mpz_class e;
    mpz_pow_ui(e.get_mpz_t(), nz.get_mpz_t(), (unsigned long)f.power);
    acc = heis_mul(acc, heis_pow(f.b, e));
  }
  return reduce_mod_gamma(acc);
}

PolyOrbitRep compile_poly_orbit(const HeisAffine& T, const Heis& x, int64_t l) {
  if (l < 0 || l >= T.nu) throw DomainError("residue l outside [0, nu)");
  PolyOrbitRep R;
  R.nu = T.nu;
  R.l = l;

  const Heis y = nil_orbit(T, x, l);
  Heis gnu;
  Heis s = T.g;
  for (int64_t i = 0; i < T.nu; ++i) {
    gnu = heis_mul(gnu, s);
    s = heis_sigma(T.dsigma, s);
  }
  M3 D = to_m3(T.dsigma), P;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) P[i][j] = i == j ? 1 : 0;
  for (int64_t i = 0; i < T.nu; ++i) P = mul3(P, D);
  M3 N = P;
  for (int i = 0; i < 3; ++i) N[i][i] -= 1;

  // G_q = prod_{j<q} Sigma^j(g_nu)
  PMat gj = first_to_pmat(orbit_first(N, coord_first_from_second(gnu)));
  QPoly Sa = prefix_sum(gj.a), Sb = prefix_sum(gj.b), Sc = prefix_sum(gj.c);
  QPoly cross = prefix_sum(pmul(Sa, gj.b));
  PMat G{Sa, Sb, padd(Sc, cross)};

  auto Yfirst = orbit_first(N, coord_first_from_second(y));
  R.y_degree = 0;
  for (auto& p : Yfirst) R.y_degree = std::max(R.y_degree, p.degree());
  PMat Ym = first_to_pmat(Yfirst);

  PMat tot{padd(G.a, Ym.a), padd(G.b, Ym.b), padd(padd(G.c, Ym.c), pmul(G.a, Ym.b))};
  QPoly v3 = padd(tot.c, pscale(pmul(tot.a, tot.b), -1));
  std::array<QPoly, 3> Zq{tot.a, tot.b, v3};
  for (int j = 0; j < 3; ++j) {
    R.Z[j] = substitute(Zq[j], l, T.nu);
    trim(R.Z[j]);
    for (size_t e = 0; e < R.Z[j].c.size(); ++e) {
      if (R.Z[j].c[e] == 0) continue;
      Heis b;
      (j == 0 ? b.v1 : j == 1 ? b.v2 : b.v3) = R.Z[j].c[e];
      R.factors.push_back({b, j + 1, int(e)});
    }
  }
  return R;
}

CorrelationSeries correlate_nil(const HeisAffine& T, const Heis& x, const NilObservable& f, const MobiusTable& table,
                                const std::vector<int64_t>& checkpoints, int threads, int64_t residue) {
  if (residue >= T.nu) throw DomainError("residue outside [0, nu)");
  std::vector<PolyOrbitRep> reps;
  for (int64_t l = 0; l < T.nu; ++l) reps.push_back(compile_poly_orbit(T, x, l));
  const bool trivial = f.p == 0 && f.q == 0 && f.r == 0;
  auto fill = [&](int64_t lo, int64_t hi, Phase* out) {
    if (trivial) {
      for (int64_t n = lo; n <= hi; ++n) out[n - lo] = Phase{};
      return;
    }
    for (int64_t n = lo; n <= hi; ++n) {
      const auto& R = reps[size_t(n % T.nu)];
      mpq_class nq(mpz_class(std::to_string(n)));
      mpq_class z1 = R.Z[0](nq), z2 = R.Z[1](nq);
      mpq_class ph = mpq_class(f.p) * z1 + mpq_class(f.q) * z2;
      if (f.r != 0) ph += mpq_class(f.r) * (R.Z[2](nq) + floor_q(z1) * z2);
      out[n - lo] = Phase::from_mpq(ph);
    }
  };
  std::function<bool(int64_t)> keep;
  if (residue >= 0) keep = [&](int64_t n) { return n % T.nu == residue; };
  auto s = mobius_series(table, checkpoints, threads, fill, keep);
  s.meta = "heisenberg";
  return s;
}

}  // namespace mdl
