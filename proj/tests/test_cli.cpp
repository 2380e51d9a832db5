#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr together
};

Run run(const std::string& args) {
  std::string cmd = std::string(MDLAB_BIN) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("mdlab_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d / name;
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream o(p);
  o << s;
}

// trial division
int mu_oracle(int64_t n) {
  int s = 1;
  for (int64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    s = -s;
  }
  return n > 1 ? -s : s;
}

}  // namespace

TEST_CASE("sieve csv") {
  auto r = run("sieve --limit 100 --emit-csv -");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,mu");
  int rows = 0;
  int64_t weighted = 0, oracle = 0;
  while (std::getline(in, line)) {
    ++rows;
    auto comma = line.find(',');
    int64_t n = std::stoll(line.substr(0, comma));
    int mu = std::stoi(line.substr(comma + 1));
    CHECK(n == rows);
    CHECK(mu == mu_oracle(n));
    weighted += n * mu;
    oracle += n * mu_oracle(n);
  }
  CHECK(rows == 100);
  CHECK(weighted == oracle);
  CHECK(weighted == 275);  // sum n mu(n), frozen from the oracle

  auto j = run("sieve --limit 100");
  REQUIRE(j.code == 0);
  CHECK(nlohmann::json::parse(j.out)["mertens"] == 1);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("frobnicate").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("sieve").code == 2);
  CHECK(run("sieve --limit abc").code == 2);
  auto bad = scratch("bad.json");
  write(bad, "{not json");
  CHECK(run("correlate --config " + bad.string()).code == 2);
  write(bad, R"({"flow": {"type": "torus-ish"}})");
  CHECK(run("correlate --config " + bad.string()).code == 2);
  CHECK(run("correlate --config /nonexistent/cfg.json").code == 2);
}

TEST_CASE("domain errors exit 3") {
  auto r = run(R"(classify --alpha 3/7 --h '{"type":"coeffs","tau":1,"tau2":1.5,"entries":[[1,0.3]]}')");
  CHECK(r.code == 3);
  CHECK(r.out.find("rational") != std::string::npos);
  CHECK(run("sieve --limit 0").code == 3);
  auto bad = scratch("ad.json");
  write(bad, R"({"flow": {"type": "skew", "a": 2, "alpha": "golden",
                 "h": {"type": "coeffs", "tau": 1, "entries": [[1, 0.1]]}}})");
  CHECK(run("correlate --config " + bad.string()).code == 3);
}

TEST_CASE("cfrac table") {
  auto r = run("cfrac --alpha sqrt2-1 --depth 5");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,a_k,l_k,q_k,set");
  const char* q[] = {"1", "2", "5", "12", "29", "70"};
  for (int k = 0; k <= 5; ++k) {
    REQUIRE(std::getline(in, line));
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    REQUIRE(f.size() == 5);
    CHECK(f[0] == std::to_string(k));
    CHECK(f[3] == q[k]);
  }
  auto j = run("cfrac --alpha 1/2 --json");
  REQUIRE(j.code == 0);
  CHECK(nlohmann::json::accept(j.out));
}

TEST_CASE("correlate output is identical across thread counts") {
  auto cfg = scratch("skew.json");
  write(cfg, R"({"flow": {"type": "skew", "c": 1, "alpha": "golden",
                          "h": {"type": "coeffs", "tau": 1, "entries": [[1, 0.25, 0.1], [2, 0.05]]},
                          "x": [0.1, 0.2], "character": [1, 1]},
                 "checkpoints": {"N": 200000, "from": 1000}})");
  auto a = scratch("a.csv"), b = scratch("b.csv");
  REQUIRE(run("--threads 1 correlate --config " + cfg.string() + " --out " + a.string()).code == 0);
  REQUIRE(run("--threads 4 correlate --config " + cfg.string() + " --out " + b.string()).code == 0);
  std::string sa = slurp(a), sb = slurp(b);
  CHECK(!sa.empty());
  CHECK(sa == sb);
  CHECK(sa.rfind("N,re,im,abs_over_N\n", 0) == 0);
  CHECK(sa.find("\n200000,") != std::string::npos);
  // provenance goes to a sidecar so the artifact itself stays comparable
  auto prov = nlohmann::json::parse(slurp(a.string() + ".provenance.json"));
  CHECK(prov.contains("config_hash"));
  CHECK(prov["threads"] == 1);
  CHECK(nlohmann::json::parse(slurp(b.string() + ".provenance.json"))["config_hash"] == prov["config_hash"]);

  // overriding the character and checkpoints from the command line
  auto c = scratch("c.csv");
  REQUIRE(run("correlate --config " + cfg.string() + " --b 0,0 --checkpoints 1e2,1e3 --out " + c.string()).code == 0);
  CHECK(slurp(c) == "N,re,im,abs_over_N\n100,1,0,0.01\n1000,2,0,0.002\n");  // Mertens 1 and 2
}

TEST_CASE("bare flow configs") {
  auto cfg = scratch("unip.json");
  write(cfg, R"({"type": "unipotent_affine", "matrix": [[1, 0], [1, 1]], "translation": ["1/3", 0],
                 "checkpoints": [100, 1000]})");
  auto r = run("correlate --config " + cfg.string() + " --out -");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("N,re,im,abs_over_N\n100,", 0) == 0);
}

TEST_CASE("furstenberg json") {
  auto out = scratch("f.json");
  REQUIRE(run("furstenberg --tau 1 --depth 3 --emit-json " + out.string()).code == 0);
  auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["q_k"].size() == 4);
  CHECK(j["q_k"][2]["q"] == "9");
  CHECK(j["construction"]["seed"]["q1"] == 2);
  CHECK(j.contains("verification"));
}

TEST_CASE("expsum, bsz, nilflow and verify run") {
  auto e = run("expsum --coeffs 0,0,1.4142135623730951 --N 10000 --checkpoints 100,10000");
  CHECK(e.code == 0);
  CHECK(e.out.find("10000,") != std::string::npos);
  auto b = run("bsz --f sqrt2-1 --tau 0.2 --M 1000 --N 10000");
  REQUIRE(b.code == 0);
  auto bj = nlohmann::json::parse(b.out);
  CHECK(bj.contains("hypothesis_holds"));
  CHECK(bj.contains("conclusion_holds"));
  auto cfg = scratch("heis.json");
  write(cfg, R"({"flow": {"type": "heisenberg", "g": ["1/7", "2/5", "1/3"],
                          "dsigma": [[1, 0, 0], [2, 1, 0], [1, 0, 1]]},
                 "checkpoints": [1000, 10000]})");
  auto n = run("nilflow --config " + cfg.string());
  CHECK(n.code == 0);
  CHECK(run("verify --only 3,7").code == 0);
}
