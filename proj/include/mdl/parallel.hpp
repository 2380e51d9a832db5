#pragma once
// Fixed-size chunking with an order-fixed reduction: chunk boundaries never
// depend on the thread count, so results are bit-identical for any --threads.
#include <atomic>
#include <complex>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace mdl {

constexpr const char* kThreadsEnv = "MDLAB_THREADS";
constexpr int64_t kChunk = 1 << 15;

// 0 means: $MDLAB_THREADS if set, else hardware concurrency
int resolve_threads(int requested);

// fn(i) for i in [0, count); work handed out dynamically
void parallel_for(int64_t count, int threads, const std::function<void(int64_t)>& fn);

// Pairwise sum in a fixed tree shape.
std::complex<double> pairwise_sum(const std::complex<double>* v, int64_t n);
inline std::complex<double> pairwise_sum(const std::vector<std::complex<double>>& v) {
  return pairwise_sum(v.data(), int64_t(v.size()));
}

// Sum term(n) over n in [1, checkpoints.back()] and report the prefix sums at each
// checkpoint. term must be pure. Segments between checkpoints are chunked from
// their own start, chunk partials summed pairwise, segments accumulated in order.
std::vector<std::complex<double>> checkpoint_sums(
    const std::vector<int64_t>& checkpoints, int threads,
    const std::function<std::complex<double>(int64_t lo, int64_t hi)>& chunk_sum);

}  // namespace mdl
