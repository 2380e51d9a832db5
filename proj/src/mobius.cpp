#include "mdl/mobius.hpp"

#include <cmath>
#include <new>
#include <ostream>
#include <string>

#include "mdl/errors.hpp"
#include "mdl/parallel.hpp"

namespace mdl {

int MobiusTable::mu(int64_t n) const {
  if (n < 1 || n > limit_) throw RangeError("mu(" + std::to_string(n) + ") outside sieve range [1, " + std::to_string(limit_) + "]");
  return mu_unchecked(n);
}

std::vector<int64_t> primes_up_to(int64_t x) {
  std::vector<int64_t> ps;
  if (x < 2) return ps;
  std::vector<bool> comp(size_t(x) + 1, false);
  for (int64_t i = 2; i <= x; ++i) {
    if (comp[size_t(i)]) continue;
    ps.push_back(i);
    for (int64_t j = i * i; j <= x; j += i) comp[size_t(j)] = true;
  }
  return ps;
}

namespace {

int64_t isqrt(int64_t n) {
  int64_t r = int64_t(std::sqrt(double(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Sieve [lo, hi] into the packed arrays. lo is a multiple of 64 (or 0), so
// no word is shared with another segment.
void sieve_segment(int64_t lo, int64_t hi, const std::vector<int64_t>& primes, uint64_t* mu_words,
                   uint64_t* lam_words) {
  const int64_t len = hi - lo + 1;
  std::vector<uint64_t> rem{}; rem.resize(size_t(len));
  std::vector<int8_t> sgn(size_t(len), 1);
  std::vector<uint8_t> par(size_t(len), 0);
  for (int64_t i = 0; i < len; ++i) rem[size_t(i)] = uint64_t(lo + i);
  for (int64_t p : primes) {
    if (p * p > hi) break;
    int64_t first = ((lo + p - 1) / p) * p;
    if (first == 0) first = p;
    for (int64_t n = first; n <= hi; n += p) {
      size_t i = size_t(n - lo);
      uint64_t r = rem[i] / uint64_t(p);
      int e = 1;
      while (r % uint64_t(p) == 0) {
        r /= uint64_t(p);
        ++e;
      }
      rem[i] = r;
      par[i] ^= uint8_t(e & 1);
      sgn[i] = (e >= 2) ? 0 : int8_t(-sgn[i]);
    }
  }
  for (int64_t i = 0; i < len; ++i) {
    int64_t n = lo + i;
    if (n == 0) continue;
    int s = sgn[size_t(i)];
    uint8_t pr = par[size_t(i)];
    if (rem[size_t(i)] > 1) {
      s = -s;
      pr ^= 1;
    }
    uint64_t code = s == 1 ? 1u : (s == -1 ? 2u : 0u);
    mu_words[uint64_t(n) >> 5] |= code << ((uint64_t(n) & 31) * 2);
    if (lam_words && pr) lam_words[uint64_t(n) >> 6] |= uint64_t(1) << (uint64_t(n) & 63);
  }
}

}  // namespace

MobiusTable mobius_sieve_impl(int64_t limit, int64_t segment, int threads, bool with_lam) {
  MobiusTable t;
  t.limit_ = limit;
  try {
    t.mu_.assign(size_t(limit / 32 + 1), 0);
    if (with_lam) t.lam_.assign(size_t(limit / 64 + 1), 0);
  } catch (const std::bad_alloc&) {
    throw CapacityError("allocation failed for sieve limit " + std::to_string(limit));
  }
  const auto primes = primes_up_to(isqrt(limit));
  const int64_t nseg = limit / segment + 1;
  uint64_t* mw = t.mu_.data();
  uint64_t* lw = with_lam ? t.lam_.data() : nullptr;
  parallel_for(nseg, threads, [&](int64_t s) {
    int64_t lo = s * segment;
    int64_t hi = std::min(limit, lo + segment - 1);
    if (lo <= hi) sieve_segment(lo, hi, primes, mw, lw);
  });
  return t;
}

MobiusTable mobius_sieve(int64_t limit, const SieveOptions& opt) {
  if (limit < 1) throw CapacityError("sieve limit must be >= 1");
  if (limit > int64_t(1000000000)) throw CapacityError("sieve limit beyond supported range");
  int64_t seg = std::max<int64_t>(64, opt.segment);
  seg = (seg + 63) / 64 * 64;
  return mobius_sieve_impl(limit, seg, opt.threads, opt.with_liouville);
}

int liouville(const MobiusTable& t, int64_t n) {
  if (n < 1 || n > t.limit()) throw RangeError("liouville(" + std::to_string(n) + ") outside sieve range");
  if (!t.has_liouville()) throw DomainError("table was sieved without Liouville data");
  return t.liouville_unchecked(n);
}

int64_t mertens(const MobiusTable& t, int64_t N) {
  if (N > t.limit()) throw RangeError("mertens(" + std::to_string(N) + ") beyond sieve limit");
  int64_t s = 0;
  for (int64_t n = 1; n <= N; ++n) s += t.mu_unchecked(n);
  return s;
}

void write_mobius_csv(const MobiusTable& t, std::ostream& os) {
  os << "n,mu\n";
  for (auto [n, m] : t) os << n << ',' << m << '\n';
}

}  // namespace mdl
