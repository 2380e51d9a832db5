#pragma once
// Property suites shared by `mdlab verify` and the acceptance binary.
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdl/analytic.hpp"
#include "mdl/correlate.hpp"
#include "mdl/mobius.hpp"

namespace mdl {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct SuiteOptions {
  uint64_t seed = 20261018;
  int threads = 0;
  int64_t decay_N = 10000000;  // criterion 9 endpoint
  int64_t determinism_N = 2000000;
  std::string artifacts;       // criterion 9 writes its series here when nonempty
};

// Sieve shared across suites, grown on demand.
class SuiteContext {
 public:
  explicit SuiteContext(SuiteOptions o) : opt(std::move(o)) {}
  const MobiusTable& table(int64_t N);
  SuiteOptions opt;

 private:
  MobiusTable table_;
};

// random real series on |m| <= maxm with |h(m)| <= e^{-tau |m|}
AnalyticSeries random_series(std::mt19937_64& rng, double tau, int64_t maxm);

std::string series_csv(const CorrelationSeries& s);

CheckResult check_orbit_oracle(SuiteContext& ctx);        // 1
CheckResult check_birkhoff(SuiteContext& ctx);            // 2
CheckResult check_cfrac(SuiteContext& ctx);               // 3
CheckResult check_furstenberg(SuiteContext& ctx);         // 4
CheckResult check_davenport(SuiteContext& ctx);           // 5
CheckResult check_bsz(SuiteContext& ctx);                 // 6
CheckResult check_poly_lower_bound(SuiteContext& ctx);    // 7
CheckResult check_heisenberg(SuiteContext& ctx);          // 8
CheckResult check_decay(SuiteContext& ctx);               // 9
CheckResult check_determinism(SuiteContext& ctx);         // 10

// runs one criterion by id, timing it and turning exceptions into failures
CheckResult run_check(int id, SuiteContext& ctx);
std::string format_result(const CheckResult& r);

}  // namespace mdl
