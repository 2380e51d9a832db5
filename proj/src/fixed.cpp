#include "mdl/fixed.hpp"

#include <cmath>

namespace mdl {

Phase Phase::from_double(double x) {
  double f = x - std::floor(x);  // exact for doubles
  if (f >= 1.0) f = 0.0;
  // split into two 64-bit halves; each step is exact
  double hi = std::ldexp(f, 64);
  double hi_int = std::floor(hi);
  double lo = std::ldexp(hi - hi_int, 64);
  u128 r = (u128(uint64_t(hi_int)) << 64) | u128(uint64_t(std::floor(lo)));
  return Phase(r);
}

u128 mpz_to_u128(const mpz_class& z) {
  mpz_class m = z;
  mpz_fdiv_r_2exp(m.get_mpz_t(), m.get_mpz_t(), 128);
  mpz_class hi = m >> 64;
  mpz_class lo = m - (hi << 64);
  uint64_t h = 0, l = 0;
  mpz_export(&h, nullptr, -1, sizeof(uint64_t), 0, 0, hi.get_mpz_t());
  mpz_export(&l, nullptr, -1, sizeof(uint64_t), 0, 0, lo.get_mpz_t());
  return (u128(h) << 64) | u128(l);
}

Phase Phase::from_mpq(const mpq_class& x) {
  mpz_class num = x.get_num();
  num <<= 128;
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
  return Phase(mpz_to_u128(q));
}

Phase Phase::from_mpz(const mpz_class&) { return Phase(0); }

double Phase::to_double() const {
  return std::ldexp(double(uint64_t(raw >> 64)), -64) + std::ldexp(double(uint64_t(raw)), -128);
}

double Phase::centered() const {
  i128 s = i128(raw);
  double hi = double(int64_t(s >> 64));
  double lo = double(uint64_t(raw));
  return std::ldexp(hi, -64) + std::ldexp(lo, -128);
}

cplx e_phase(Phase p) { return e_real(p.centered()); }

cplx em1_real(double x) {
  // e(x) - 1 = 2i sin(pi x) e(x/2)
  double s = std::sin(kTwoPi * 0.5 * x);
  return cplx(0.0, 2.0 * s) * e_real(0.5 * x);
}

cplx em1_phase(Phase p) { return em1_real(p.centered()); }

}  // namespace mdl
