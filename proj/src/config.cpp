#include "mdl/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mdl/errors.hpp"
#include "mdl/furstenberg.hpp"
#include "mdl/parallel.hpp"

namespace mdl {

namespace {

[[noreturn]] void schema(const std::string& m) { throw UsageError("config: " + m); }

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema(std::string("missing field '") + key + "'");
  return j.at(key);
}

int64_t as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) schema(std::string(what) + " must be an integer");
  return j.get<int64_t>();
}

double as_num(const json& j, const char* what) {
  if (!j.is_number()) schema(std::string(what) + " must be a number");
  return j.get<double>();
}

mpz_class as_mpz(const json& j, const char* what) {
  if (j.is_number_integer()) return mpz_class(std::to_string(j.get<int64_t>()));
  if (j.is_string()) {
    mpz_class z;
    if (z.set_str(j.get<std::string>(), 10) != 0) schema(std::string(what) + " is not an integer string");
    return z;
  }
  schema(std::string(what) + " must be an integer or a decimal string");
}

// numbers are taken at their exact binary value; strings may be "p/q"
mpq_class as_mpq(const json& j, const char* what) {
  if (j.is_number_integer()) return mpq_class(mpz_class(std::to_string(j.get<int64_t>())));
  if (j.is_number()) return mpq_class(j.get<double>());
  if (j.is_string()) {
    mpq_class q;
    if (q.set_str(j.get<std::string>(), 10) != 0) schema(std::string(what) + " is not a rational string");
    if (q.get_den() == 0) throw DomainError(std::string(what) + " has zero denominator");
    q.canonicalize();
    return q;
  }
  schema(std::string(what) + " must be a number or a \"p/q\" string");
}

std::vector<mpz_class> split_mpz(const std::string& s, char sep) {
  std::vector<mpz_class> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (tok.empty()) continue;
    mpz_class z;
    if (z.set_str(tok, 10) != 0) schema("bad integer '" + tok + "' in alpha");
    out.push_back(z);
  }
  return out;
}

std::vector<Phase> phase_vec(const json& j, const char* what) {
  if (!j.is_array()) schema(std::string(what) + " must be an array");
  std::vector<Phase> out;
  for (auto& e : j) out.push_back(Phase::from_mpq(as_mpq(e, what)));
  return out;
}

}  // namespace

AlphaSpec parse_alpha(const std::string& s) {
  if (s == "golden") return AlphaSpec::golden();
  if (s == "sqrt2-1") return AlphaSpec::sqrt2_minus_1();
  auto colon = s.find(':');
  if (colon != std::string::npos) {
    std::string kind = s.substr(0, colon), rest = s.substr(colon + 1);
    if (kind == "quotients") {
      auto a = split_mpz(rest, ',');
      if (a.empty()) schema("quotients list is empty");
      return AlphaSpec::explicit_quotients(a);
    }
    if (kind == "periodic") {
      auto semi = rest.find(';');
      if (semi == std::string::npos) schema("periodic alpha needs 'a0;p1,p2,...'");
      auto a0 = split_mpz(rest.substr(0, semi), ',');
      auto per = split_mpz(rest.substr(semi + 1), ',');
      if (a0.size() != 1 || per.empty()) schema("periodic alpha needs one a0 and a nonempty period");
      return AlphaSpec::quadratic(a0[0], {}, per);
    }
    if (kind == "furstenberg") {
      double tau;
      int K;
      if (std::sscanf(rest.c_str(), "%lf,%d", &tau, &K) != 2) schema("furstenberg alpha needs 'tau,K'");
      return AlphaSpec::furstenberg(tau, K);
    }
    schema("unknown alpha kind '" + kind + "'");
  }
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    mpz_class p, q;
    if (p.set_str(s.substr(0, slash), 10) != 0 || q.set_str(s.substr(slash + 1), 10) != 0)
      schema("bad rational alpha '" + s + "'");
    if (q == 0) throw DomainError("alpha has zero denominator");
    return AlphaSpec::rational(p, q);
  }
  mpz_class p;
  if (p.set_str(s, 10) == 0) return AlphaSpec::rational(p, 1);
  schema("unrecognized alpha '" + s + "'");
}

AlphaSpec parse_alpha(const json& j) {
  if (j.is_string()) return parse_alpha(j.get<std::string>());
  if (!j.is_object()) schema("alpha must be a string or an object");
  std::string kind = need(j, "kind").get<std::string>();
  AlphaSpec s;
  if (kind == "rational") {
    s = AlphaSpec::rational(as_mpz(need(j, "p"), "p"), as_mpz(need(j, "q"), "q"));
  } else if (kind == "quadratic") {
    std::vector<mpz_class> pre, per;
    if (j.contains("pre"))
      for (auto& e : j["pre"]) pre.push_back(as_mpz(e, "pre"));
    for (auto& e : need(j, "period")) per.push_back(as_mpz(e, "period"));
    if (per.empty()) schema("quadratic alpha needs a nonempty period");
    s = AlphaSpec::quadratic(as_mpz(j.value("a0", json(0)), "a0"), pre, per);
  } else if (kind == "quotients") {
    std::vector<mpz_class> a;
    for (auto& e : need(j, "a")) a.push_back(as_mpz(e, "a"));
    if (a.empty()) schema("quotients list is empty");
    s = AlphaSpec::explicit_quotients(a, j.value("tail_log2", 0.0));
  } else if (kind == "furstenberg") {
    s = AlphaSpec::furstenberg(as_num(need(j, "tau"), "tau"), int(as_int(need(j, "depth"), "depth")));
  } else {
    schema("unknown alpha kind '" + kind + "'");
  }
  if (j.contains("precision_bits")) s.precision_bits = int(as_int(j["precision_bits"], "precision_bits"));
  return s;
}

AnalyticSeries parse_series(const json& j) {
  std::string type = need(j, "type").get<std::string>();
  if (type == "furstenberg") {
    auto sys = build_system(as_num(need(j, "tau"), "tau"), int(as_int(need(j, "depth"), "depth")),
                            j.contains("M") ? as_int(j["M"], "M") : 0);
    return j.value("correction", true) ? sys.combined : sys.h;
  }
  if (type != "coeffs") schema("unknown series type '" + type + "'");
  AnalyticSeries h;
  h.tau = as_num(need(j, "tau"), "tau");
  if (h.tau <= 0) throw DomainError("series tau must be positive");
  if (j.contains("tau2")) h.tau2 = as_num(j["tau2"], "tau2");
  bool real = j.value("real", true);
  for (auto& e : need(j, "entries")) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3) schema("series entry must be [m, re] or [m, re, im]");
    int64_t m = as_int(e[0], "entry frequency");
    cplx c(as_num(e[1], "entry re"), e.size() == 3 ? as_num(e[2], "entry im") : 0.0);
    h.set(m, c);
    if (real && m != 0) h.set(-m, std::conj(c));
    if (real && m == 0 && c.imag() != 0) throw DomainError("real series needs a real constant term");
  }
  h.fit_constants();
  return h;
}

std::vector<int64_t> default_checkpoints(int64_t lo, int64_t N) {
  if (lo < 1 || N < 1) throw DomainError("checkpoints must be positive");
  std::vector<int64_t> out;
  for (int64_t p = 1; p <= N && p > 0; p *= 10)
    for (int64_t m : {1, 2, 5}) {
      int64_t c = p * m;
      if (c >= lo && c < N) out.push_back(c);
    }
  out.push_back(N);
  return out;
}

std::vector<int64_t> parse_checkpoints(const json& j) {
  std::vector<int64_t> out;
  if (j.is_array()) {
    for (auto& e : j) out.push_back(as_int(e, "checkpoint"));
  } else if (j.is_object()) {
    out = default_checkpoints(j.value("from", int64_t(1000)), as_int(need(j, "N"), "N"));
  } else {
    schema("checkpoints must be an array or {\"N\":..,\"from\":..}");
  }
  if (out.empty()) schema("no checkpoints");
  for (size_t i = 0; i < out.size(); ++i)
    if (out[i] < 1 || (i && out[i] <= out[i - 1])) throw DomainError("checkpoints must be positive and increasing");
  return out;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) schema("top level must be an object");
  ExperimentConfig c;
  c.raw = j;
  // a bare flow object is accepted as the whole config
  const json& f = j.contains("flow") || !j.contains("type") ? need(j, "flow") : j;
  c.flow = need(f, "type").get<std::string>();
  if (c.flow == "skew") {
    c.alpha = parse_alpha(need(f, "alpha"));
    c.skew = make_skew(f.value("a", int64_t(1)), f.value("c", int64_t(0)), f.value("d", int64_t(1)), c.alpha,
                       parse_series(need(f, "h")));
    auto x = phase_vec(f.value("x", json::array({0, 0})), "x");
    if (x.size() != 2) schema("skew x must have 2 coordinates");
    c.x = {x[0], x[1]};
    const json& b = f.value("character", json::array({0, 1}));
    if (!b.is_array() || b.size() != 2) schema("character must be [b1, b2]");
    c.b = {as_int(b[0], "b1"), as_int(b[1], "b2")};
  } else if (c.flow == "unipotent_affine") {
    std::vector<std::vector<mpz_class>> W;
    for (auto& row : f.contains("matrix") ? f["matrix"] : need(f, "W")) {
      std::vector<mpz_class> r;
      for (auto& e : row) r.push_back(as_mpz(e, "W entry"));
      W.push_back(r);
    }
    std::vector<mpq_class> t;
    for (auto& e : f.contains("translation") ? f["translation"] : need(f, "t")) t.push_back(as_mpq(e, "t"));
    std::vector<int64_t> cyc;
    if (f.contains("cyclic"))
      for (auto& e : f["cyclic"]) cyc.push_back(as_int(e, "cyclic"));
    c.unip = make_unipotent(W, t, cyc);
    // defaults: start at the origin, observe the last coordinate
    c.ux = f.contains("x") ? phase_vec(f["x"], "x") : std::vector<Phase>(size_t(c.unip.m));
    if (f.contains("v"))
      for (auto& e : f["v"]) c.v.push_back(as_int(e, "v"));
    else {
      c.v.assign(size_t(c.unip.m), 0);
      c.v.back() = 1;
    }
    if (int(c.ux.size()) != c.unip.m || int(c.v.size()) != c.unip.m) throw DomainError("x and v must match W");
  } else if (c.flow == "heisenberg") {
    auto trip = [&](const json& a, const char* what) {
      if (!a.is_array() || a.size() != 3) schema(std::string(what) + " must have 3 coordinates");
      return Heis{as_mpq(a[0], what), as_mpq(a[1], what), as_mpq(a[2], what)};
    };
    IMat3 d{};
    const json& D = need(f, "dsigma");
    if (!D.is_array() || D.size() != 3) schema("dsigma must be 3x3");
    for (int i = 0; i < 3; ++i) {
      if (!D[size_t(i)].is_array() || D[size_t(i)].size() != 3) schema("dsigma must be 3x3");
      for (int k = 0; k < 3; ++k) d[size_t(i)][size_t(k)] = as_int(D[size_t(i)][size_t(k)], "dsigma entry");
    }
    c.heis = make_heis_affine(trip(need(f, "g"), "g"), d);
    c.hx = trip(f.value("x", json::array({0, 0, 0})), "x");
    const json& o = f.value("observable", json{{"horizontal", {0, 1}}, {"central", 0}});
    const json& hz = need(o, "horizontal");
    if (!hz.is_array() || hz.size() != 2) schema("observable.horizontal must be [p, q]");
    c.obs = {as_int(hz[0], "p"), as_int(hz[1], "q"), o.value("central", int64_t(0))};
  } else {
    schema("unknown flow type '" + c.flow + "'");
  }
  c.checkpoints = parse_checkpoints(j.value("checkpoints", json{{"N", 100000}}));
  c.out = j.value("output", std::string("-"));
  c.seed = j.value("seed", uint64_t(1));
  return c;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string config_hash(const json& j) {
  std::string s = j.dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json provenance(const json& config, int threads) {
  return {{"config_hash", config_hash(config)},
          {"version", kVersion},
          {"modules", {{"mobius", 1}, {"cfrac", 1}, {"analytic", 1}, {"flows", 1}, {"nilflow", 1},
                       {"furstenberg", 1}, {"correlate", 1}, {"cli", 1}}},
          {"gmp", gmp_version},
          {"threads", resolve_threads(threads)}};
}

void write_atomic(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CapacityError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw CapacityError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

}  // namespace mdl
