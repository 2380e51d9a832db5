#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdl/analytic.hpp"
#include "mdl/cfrac.hpp"
#include "mdl/flows.hpp"
#include "mdl/nilflow.hpp"

namespace mdl {

using json = nlohmann::json;

// "p/q", "golden", "sqrt2-1", "periodic:a0;p1,p2,..", "quotients:a0,a1,..",
// "furstenberg:tau,K", or the equivalent JSON object
AlphaSpec parse_alpha(const json& j);
AlphaSpec parse_alpha(const std::string& s);

// {"type":"coeffs","tau":t,"entries":[[m,re,im],..]} or {"type":"furstenberg","tau":t,"depth":K}
// With "real": true (default) each entry also sets the conjugate at -m.
AnalyticSeries parse_series(const json& j);

std::vector<int64_t> parse_checkpoints(const json& j);
// 1,2,5 pattern from lo up to N, always ending at N
std::vector<int64_t> default_checkpoints(int64_t lo, int64_t N);

struct ExperimentConfig {
  std::string flow;  // skew | unipotent_affine | heisenberg
  json raw;
  AlphaSpec alpha;
  SkewFlow skew;
  TorusPoint x;
  Character b;
  UnipotentAffine unip;
  std::vector<Phase> ux;
  std::vector<int64_t> v;
  HeisAffine heis;
  Heis hx;
  NilObservable obs;
  std::vector<int64_t> checkpoints;
  std::string out;
  uint64_t seed = 1;
};
// Schema-checked; UsageError on a malformed document, DomainError on invalid values.
ExperimentConfig parse_config(const json& j);
json load_json_file(const std::string& path);

// FNV-1a over the canonical dump
std::string config_hash(const json& j);
json provenance(const json& config, int threads);

// write to path.tmp then rename; "-" writes to stdout
void write_atomic(const std::string& path, const std::string& content);

constexpr const char* kVersion = "mdlab 1.0.0";

}  // namespace mdl
