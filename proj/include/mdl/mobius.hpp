#pragma once
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mdl {

// mu(n) for 1 <= n <= limit, packed two bits per value (00 -> 0, 01 -> +1, 10 -> -1),
// plus the Liouville sign packed one bit per value (set -> -1).
class MobiusTable {
 public:
  MobiusTable() = default;

  int64_t limit() const { return limit_; }
  bool has_liouville() const { return !lam_.empty(); }

  int mu(int64_t n) const;  // throws RangeError outside [1, limit]
  int mu_unchecked(int64_t n) const {
    uint64_t w = mu_[uint64_t(n) >> 5];
    unsigned c = unsigned((w >> ((uint64_t(n) & 31) * 2)) & 3u);
    return c == 1 ? 1 : (c == 2 ? -1 : 0);
  }
  int liouville_unchecked(int64_t n) const {
    return ((lam_[uint64_t(n) >> 6] >> (uint64_t(n) & 63)) & 1u) ? -1 : 1;
  }

  // forward iteration yielding (n, mu(n)) without per-call range checks
  struct Entry {
    int64_t n;
    int mu;
  };
  class iterator {
   public:
    iterator(const MobiusTable* t, int64_t n) : t_(t), n_(n) {}
    Entry operator*() const { return {n_, t_->mu_unchecked(n_)}; }
    iterator& operator++() { ++n_; return *this; }
    bool operator!=(const iterator& o) const { return n_ != o.n_; }
   private:
    const MobiusTable* t_;
    int64_t n_;
  };
  iterator begin() const { return {this, 1}; }
  iterator end() const { return {this, limit_ + 1}; }

  const std::vector<uint64_t>& packed_mu() const { return mu_; }

 private:
  friend MobiusTable mobius_sieve_impl(int64_t, int64_t, int, bool);
  int64_t limit_ = 0;
  std::vector<uint64_t> mu_;   // 32 values per word, index n (slot 0 unused)
  std::vector<uint64_t> lam_;  // 64 values per word
};

struct SieveOptions {
  int64_t segment = int64_t(1) << 20;  // rounded up to a multiple of 64
  int threads = 0;
  bool with_liouville = true;
};

MobiusTable mobius_sieve(int64_t limit, const SieveOptions& opt = {});

// (-1)^Omega(n)
int liouville(const MobiusTable& t, int64_t n);

// Mertens function M(N) = sum_{n<=N} mu(n)
int64_t mertens(const MobiusTable& t, int64_t N);

// CSV "n,mu" rows for 1..limit
void write_mobius_csv(const MobiusTable& t, std::ostream& os);

// primes <= x by a plain Eratosthenes sieve
std::vector<int64_t> primes_up_to(int64_t x);

}  // namespace mdl
