#pragma once
// Points of R/Z held as 128-bit fixed-point fractions: x mod 1 == raw / 2^128.
// Integer multiples wrap modulo 2^128, so n*x mod 1 is exact for integer n.
#include <complex>
#include <cstdint>
#include <type_traits>
#include <gmpxx.h>

namespace mdl {

using u128 = unsigned __int128;
using i128 = __int128;
using cplx = std::complex<double>;

struct Phase {
  u128 raw = 0;

  Phase() = default;
  explicit constexpr Phase(u128 r) : raw(r) {}

  static Phase from_double(double x);
  static Phase from_mpq(const mpq_class& x);
  static Phase from_mpz(const mpz_class& x);  // always zero; kept for symmetry in templates

  // in [0,1)
  double to_double() const;
  // in [-1/2, 1/2)
  double centered() const;

  Phase operator+(Phase o) const { return Phase(raw + o.raw); }
  Phase operator-(Phase o) const { return Phase(raw - o.raw); }
  Phase operator-() const { return Phase(u128(0) - raw); }
  Phase& operator+=(Phase o) { raw += o.raw; return *this; }
  Phase& operator-=(Phase o) { raw -= o.raw; return *this; }
  bool operator==(const Phase&) const = default;
};

template <class T>
  requires std::is_integral_v<T> || std::is_same_v<T, i128> || std::is_same_v<T, u128>
inline Phase operator*(T k, Phase p) {
  return Phase(u128(i128(k)) * p.raw);
}

// integer mod 2^128, for multipliers that outgrow 64 bits (binomials, n^d)
u128 mpz_to_u128(const mpz_class& z);

constexpr double kTwoPi = 6.283185307179586476925286766559;

// e(x) = exp(2 pi i x)
cplx e_phase(Phase p);
inline cplx e_real(double x) {
  double s, c;
  ::sincos(kTwoPi * x, &s, &c);
  return {c, s};
}
// e(x) - 1 without cancellation near integers
cplx em1_phase(Phase p);
cplx em1_real(double x);

// ||x||, distance to the nearest integer
inline double dist_int(Phase p) {
  double c = p.centered();
  return c < 0 ? -c : c;
}

}  // namespace mdl
