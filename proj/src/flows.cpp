#include "mdl/flows.hpp"

#include <cmath>
#include <string>

#include "mdl/errors.hpp"

namespace mdl {

namespace {

using ZMat = std::vector<std::vector<mpz_class>>;

Phase frac_of(double v) { return Phase::from_double(v - std::floor(v)); }

Phase h_at(const AnalyticSeries& h, Phase x) { return frac_of(eval_series(h, x, h.max_freq()).real()); }

Phase birkhoff_phase(const SkewFlow& f, Phase x1, int64_t n, BirkhoffMode mode, int64_t mult) {
  if (n == 0 || f.h.coeffs.empty()) return Phase{};
  double x = x1.to_double();
  cplx B = mode == BirkhoffMode::Direct ? birkhoff_sum_direct(f.h, x, f.alpha, n)
                                        : birkhoff_sum_fourier(f.h, x, f.alpha, n, f.h.max_freq());
  return frac_of(double(mult) * B.real());
}

ZMat identity(int m) {
  ZMat I(size_t(m), std::vector<mpz_class>(size_t(m), 0));
  for (int i = 0; i < m; ++i) I[size_t(i)][size_t(i)] = 1;
  return I;
}

ZMat matmul(const ZMat& A, const ZMat& B) {
  size_t m = A.size();
  ZMat C(m, std::vector<mpz_class>(m, 0));
  for (size_t i = 0; i < m; ++i)
    for (size_t k = 0; k < m; ++k) {
      if (A[i][k] == 0) continue;
      for (size_t j = 0; j < m; ++j) C[i][j] += A[i][k] * B[k][j];
    }
  return C;
}

bool is_zero(const ZMat& A) {
  for (auto& r : A)
    for (auto& v : r)
      if (v != 0) return false;
  return true;
}

size_t max_bits(const ZMat& A) {
  size_t b = 0;
  for (auto& r : A)
    for (auto& v : r) b = std::max(b, mpz_sizeinbase(v.get_mpz_t(), 2));
  return b;
}

mpz_class det_bareiss(ZMat A) {
  size_t n = A.size();
  mpz_class prev = 1;
  int sign = 1;
  for (size_t k = 0; k < n; ++k) {
    if (A[k][k] == 0) {
      size_t p = k + 1;
      while (p < n && A[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(A[k], A[p]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i)
      for (size_t j = k + 1; j < n; ++j) {
        A[i][j] = A[i][j] * A[k][k] - A[i][k] * A[k][j];
        mpz_divexact(A[i][j].get_mpz_t(), A[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    prev = A[k][k];
  }
  return sign * A[n - 1][n - 1];
}

Phase zmul(const mpz_class& a, Phase x) { return Phase(mpz_to_u128(a) * x.raw); }

// C(q, t) mod 2^128
u128 binom_mod(int64_t q, int t) {
  u128 r = 1;
  bool exact = true;
  i128 acc = 1;
  for (int i = 0; i < t; ++i) {
    i128 next;
    if (__builtin_mul_overflow(acc, i128(q - i), &next)) {
      exact = false;
      break;
    }
    acc = next / (i + 1);
  }
  if (exact) return u128(acc);
  mpz_class z;
  mpz_bin_ui(z.get_mpz_t(), mpz_class(std::to_string(q)).get_mpz_t(), (unsigned long)t);
  r = mpz_to_u128(z);
  return r;
}

}  // namespace

SkewFlow make_skew(int64_t a, int64_t c, int64_t d, const AlphaSpec& alpha, const AnalyticSeries& h) {
  if (a * d != 1 && a * d != -1) throw DomainError("skew flow needs ad = +-1");
  if (!h.is_real(1e-12)) throw DomainError("skew flow needs a real-valued h");
  SkewFlow f;
  f.a = a;
  f.c = c;
  f.d = d;
  f.alpha_spec = alpha;
  f.alpha = alpha_value(alpha);
  f.h = h;
  return f;
}

TorusPoint skew_step(const SkewFlow& f, const TorusPoint& p) {
  TorusPoint r;
  r.x1 = f.a * p.x1 + f.alpha.frac;
  r.x2 = f.c * p.x1 + f.d * p.x2 + h_at(f.h, p.x1);
  return r;
}

TorusPoint skew_orbit_closed(const SkewFlow& f, const TorusPoint& p, int64_t n, BirkhoffMode mode) {
  if (n < 0) throw DomainError("orbit needs n >= 0");
  if (!f.normalized()) {
    TorusPoint y = p;
    for (int64_t j = 0; j < n; ++j) y = skew_step(f, y);
    return y;
  }
  TorusPoint y;
  y.x1 = p.x1 + n * f.alpha.frac;
  i128 tri = i128(n) * i128(n - 1) / 2;
  y.x2 = p.x2 + (i128(f.c) * n) * p.x1 + (i128(f.c) * tri) * f.alpha.frac + birkhoff_phase(f, p.x1, n, mode, 1);
  return y;
}

Phase character_phase(const SkewFlow& f, const TorusPoint& p, const Character& b, int64_t n, BirkhoffMode mode) {
  if (n < 0) throw DomainError("orbit needs n >= 0");
  if (!f.normalized()) {
    TorusPoint y = skew_orbit_closed(f, p, n, mode);
    return b.b1 * y.x1 + b.b2 * y.x2;
  }
  // P(n) assembled exactly in fixed point; the h part only enters through b2
  i128 tri = i128(n) * i128(n - 1) / 2;
  Phase P = b.b1 * p.x1 + (i128(b.b1) * n) * f.alpha.frac;
  if (b.b2 == 0) return P;
  P += b.b2 * p.x2 + (i128(b.b2) * f.c * n) * p.x1 + (i128(b.b2) * f.c * tri) * f.alpha.frac;
  return P + birkhoff_phase(f, p.x1, n, mode, b.b2);
}

UnipotentAffine make_unipotent(ZMat W, std::vector<mpq_class> t, std::vector<int64_t> cyclic) {
  const size_t m = W.size();
  if (m == 0) throw DomainError("unipotent map needs dimension >= 1");
  for (auto& r : W)
    if (r.size() != m) throw DomainError("unipotent matrix must be square");
  if (t.empty()) t.assign(m, 0);
  if (t.size() != m) throw DomainError("translation length differs from dimension");
  if (cyclic.empty()) cyclic.assign(m, 0);
  if (cyclic.size() != m) throw DomainError("cyclic list length differs from dimension");
  mpz_class det = det_bareiss(W);
  if (det != 1 && det != -1) throw DomainError("unipotent map needs det W = +-1");
  for (size_t i = 0; i < m; ++i) {
    if (cyclic[i] < 0) throw DomainError("cyclic modulus must be >= 0");
    if (cyclic[i] == 0) continue;
    mpq_class ti = t[i] * cyclic[i];
    ti.canonicalize();
    if (ti.get_den() != 1) throw DomainError("translation leaves the finite cyclic coordinate " + std::to_string(i));
    for (size_t j = 0; j < m; ++j) {
      if (W[i][j] == 0) continue;
      if (cyclic[j] == 0) throw DomainError("matrix couples a torus coordinate into a cyclic one");
      mpq_class w(W[i][j] * cyclic[i], cyclic[j]);
      w.canonicalize();
      if (w.get_den() != 1) throw DomainError("matrix does not preserve the finite cyclic subgroup");
    }
  }
  UnipotentAffine A;
  A.m = int(m);
  A.W = W;
  A.t = t;
  A.cyclic = cyclic;
  const ZMat I = identity(int(m));
  ZMat P = I;
  for (int64_t nu = 1; nu <= 5040; ++nu) {
    P = matmul(P, W);
    if (max_bits(P) > 4096) break;
    ZMat Nm = P;
    for (size_t i = 0; i < m; ++i) Nm[i][i] -= 1;
    ZMat pw = Nm;
    int k = 0;
    while (!is_zero(pw) && k < int(m)) {
      pw = matmul(pw, Nm);
      ++k;
    }
    if (is_zero(pw)) {
      A.nu = nu;
      A.k = k;
      A.N = Nm;
      return A;
    }
  }
  throw DomainError("W is not quasi-unipotent (positive entropy)");
}

std::vector<Phase> unipotent_step(const UnipotentAffine& A, const std::vector<Phase>& x) {
  if (int(x.size()) != A.m) throw DomainError("point dimension differs from map");
  std::vector<Phase> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    Phase s = Phase::from_mpq(A.t[i]);
    for (size_t j = 0; j < x.size(); ++j) s += zmul(A.W[i][j], x[j]);
    y[i] = s;
  }
  return y;
}

std::vector<Phase> unipotent_orbit(const UnipotentAffine& A, const std::vector<Phase>& x, int64_t n) {
  std::vector<Phase> y = x;
  for (int64_t j = 0; j < n; ++j) y = unipotent_step(A, y);
  return y;
}

int augmented_order(const UnipotentAffine& A) {
  // N_aug = [[N, s], [0, 0]], s = sum_{i<nu} W^i t; N_aug^(j+1) = [[N^(j+1), N^j s], 0]
  const size_t m = size_t(A.m);
  std::vector<mpq_class> s(m, 0), tv = A.t;
  for (int64_t i = 0; i < A.nu; ++i) {
    for (size_t r = 0; r < m; ++r) s[r] += tv[r];
    std::vector<mpq_class> nx(m, 0);
    for (size_t r = 0; r < m; ++r)
      for (size_t c = 0; c < m; ++c) nx[r] += A.W[r][c] * tv[c];
    tv = nx;
  }
  // smallest K with N^(K+1) = 0 and N^K s = 0
  std::vector<mpq_class> v = s;
  int K = 0;
  auto zero_vec = [](const std::vector<mpq_class>& u) {
    for (auto& e : u)
      if (e != 0) return false;
    return true;
  };
  while (!zero_vec(v)) {
    std::vector<mpq_class> nx(m, 0);
    for (size_t r = 0; r < m; ++r)
      for (size_t c = 0; c < m; ++c) nx[r] += A.N[r][c] * v[c];
    v = nx;
    ++K;
  }
  return std::max(A.k, K);
}

int UnipotentPhasePoly::degree() const {
  int d = int(c.size()) - 1;
  while (d > 0 && c[size_t(d)].raw == 0) --d;
  return d;
}

Phase UnipotentPhasePoly::at(int64_t n) const {
  if (((n - l) % nu + nu) % nu != 0) throw DomainError("n outside the residue class of this phase polynomial");
  int64_t q = (n - l) / nu;
  Phase r;
  for (size_t t = 0; t < c.size(); ++t) r += Phase(binom_mod(q, int(t)) * c[t].raw);
  return r;
}

UnipotentPhasePoly unipotent_phase_poly(const UnipotentAffine& A, const std::vector<Phase>& x,
                                        const std::vector<int64_t>& v, int64_t l) {
  const size_t m = size_t(A.m);
  if (x.size() != m || v.size() != m) throw DomainError("dimension mismatch in unipotent_phase_poly");
  bool nz = false;
  for (auto e : v) nz = nz || e != 0;
  if (!nz) throw DomainError("character v must be nonzero");
  if (l < 0 || l >= A.nu) throw DomainError("residue l outside [0, nu)");

  std::vector<mpq_class> s(m, 0), tv = A.t;
  for (int64_t i = 0; i < A.nu; ++i) {
    for (size_t r = 0; r < m; ++r) s[r] += tv[r];
    std::vector<mpq_class> nx(m, 0);
    for (size_t r = 0; r < m; ++r)
      for (size_t c = 0; c < m; ++c) nx[r] += A.W[r][c] * tv[c];
    tv = nx;
  }
  const int K = augmented_order(A);
  auto dot = [&](const std::vector<Phase>& u) {
    Phase acc;
    for (size_t i = 0; i < m; ++i) acc += v[i] * u[i];
    return acc;
  };
  auto applyN = [&](const std::vector<Phase>& u) {
    std::vector<Phase> r(m);
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j) r[i] += zmul(A.N[i][j], u[j]);
    return r;
  };

  UnipotentPhasePoly P;
  P.nu = A.nu;
  P.l = l;
  std::vector<Phase> y = unipotent_orbit(A, x, l);
  P.c.push_back(dot(y));
  if (K >= 1) {
    std::vector<Phase> xi = applyN(y);
    for (size_t i = 0; i < m; ++i) xi[i] += Phase::from_mpq(s[i]);
    P.c.push_back(dot(xi));
    for (int t = 2; t <= K; ++t) {
      xi = applyN(xi);
      P.c.push_back(dot(xi));
    }
  }
  P.c.resize(size_t(P.degree()) + 1);

  // monomial form in n: C((n-l)/nu, t) expanded with real arithmetic
  P.mono.assign(P.c.size(), 0.0);
  std::vector<double> basis{1.0};  // C(q, t) as a polynomial in n
  for (size_t t = 0; t < P.c.size(); ++t) {
    if (t > 0) {
      std::vector<double> nb(basis.size() + 1, 0.0);
      // multiply by ((n - l)/nu - (t-1)) / t
      double shift = -double(l) / double(A.nu) - double(t - 1);
      for (size_t i = 0; i < basis.size(); ++i) {
        nb[i + 1] += basis[i] / double(A.nu) / double(t);
        nb[i] += basis[i] * shift / double(t);
      }
      basis = nb;
    }
    double ct = P.c[t].to_double();
    for (size_t i = 0; i < basis.size(); ++i) P.mono[i] += ct * basis[i];
  }
  return P;
}

}  // namespace mdl
