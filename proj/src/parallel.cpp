#include "mdl/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <mutex>

#include "mdl/errors.hpp"

namespace mdl {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kThreadsEnv)) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

void parallel_for(int64_t count, int threads, const std::function<void(int64_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count <= 1) {
    for (int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int nt = int(std::min<int64_t>(threads, count));
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::complex<double> pairwise_sum(const std::complex<double>* v, int64_t n) {
  if (n <= 0) return {0.0, 0.0};
  if (n <= 8) {
    std::complex<double> s = v[0];
    for (int64_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  int64_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

std::vector<std::complex<double>> checkpoint_sums(
    const std::vector<int64_t>& checkpoints, int threads,
    const std::function<std::complex<double>(int64_t, int64_t)>& chunk_sum) {
  struct Chunk {
    int64_t lo, hi;
    size_t seg;
  };
  std::vector<Chunk> chunks;
  int64_t prev = 0;
  for (size_t s = 0; s < checkpoints.size(); ++s) {
    int64_t c = checkpoints[s];
    if (c <= prev) throw DomainError("checkpoints must be strictly increasing and positive");
    for (int64_t lo = prev + 1; lo <= c; lo += kChunk) chunks.push_back({lo, std::min(c, lo + kChunk - 1), s});
    prev = c;
  }
  std::vector<std::complex<double>> part(chunks.size());
  parallel_for(int64_t(chunks.size()), threads,
               [&](int64_t i) { part[i] = chunk_sum(chunks[i].lo, chunks[i].hi); });
  std::vector<std::complex<double>> out(checkpoints.size());
  std::complex<double> acc{0.0, 0.0};
  size_t b = 0;
  for (size_t s = 0; s < checkpoints.size(); ++s) {
    size_t e = b;
    while (e < chunks.size() && chunks[e].seg == s) ++e;
    acc += pairwise_sum(part.data() + b, int64_t(e - b));
    out[s] = acc;
    b = e;
  }
  return out;
}

}  // namespace mdl
