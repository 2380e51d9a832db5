// mdlab: command-line driver for the library. Artifacts go to --out ("-" is stdout);
// a file artifact gets a <out>.provenance.json sidecar.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mdl/cfrac.hpp"
#include "mdl/checks.hpp"
#include "mdl/config.hpp"
#include "mdl/correlate.hpp"
#include "mdl/errors.hpp"
#include "mdl/flows.hpp"
#include "mdl/furstenberg.hpp"
#include "mdl/mobius.hpp"
#include "mdl/nilflow.hpp"
#include "mdl/parallel.hpp"

using namespace mdl;

namespace {

int g_threads = 0;

void emit(const std::string& out, const std::string& content, const json& cfg) {
  write_atomic(out, content);
  if (out != "-") write_atomic(out + ".provenance.json", provenance(cfg, g_threads).dump(2) + "\n");
}

// a series argument is either inline JSON or a path to a JSON file
json json_arg(const std::string& s) {
  auto first = s.find_first_not_of(" \t\n");
  if (first != std::string::npos && (s[first] == '{' || s[first] == '[')) {
    try {
      return json::parse(s);
    } catch (const json::exception& e) {
      throw UsageError(std::string("inline JSON does not parse: ") + e.what());
    }
  }
  return load_json_file(s);
}

std::string cf_json(const CFExpansion& cf, int64_t B) {
  nlohmann::ordered_json j;
  j["alpha"] = cf.label;
  j["alpha_approx"] = cf.alpha.approx();
  j["terminated"] = cf.terminated;
  j["tail_log2"] = cf.tail_log2;
  auto rows = nlohmann::ordered_json::array();
  for (int k = 0; k <= cf.K(); ++k) {
    nlohmann::ordered_json r{{"k", k}, {"a", cf.a[size_t(k)].get_str()}, {"l", cf.l[size_t(k)].get_str()},
                             {"q", cf.q[size_t(k)].get_str()}};
    if (!cf.alpha.rational && k >= 1 && k + 1 <= cf.K()) {
      try {
        r["bracket"] = check_convergent_bracket(cf, k);
      } catch (const PrecisionError&) {
        r["bracket"] = "undecided";
      }
    }
    rows.push_back(r);
  }
  j["convergents"] = rows;
  auto part = nlohmann::ordered_json::array();
  for (auto& e : partition_Q(cf, B))
    part.push_back({{"k", e.k},
                    {"q", e.q.get_str()},
                    {"q_plus", e.q_plus == 0 ? json(nullptr) : json(e.q_plus.get_str())},
                    {"log2_q_plus", e.log2_q_plus},
                    {"class", e.sharp ? "sharp" : "flat"}});
  j["B"] = B;
  j["partition"] = part;
  return j.dump(2) + "\n";
}

std::string cf_table(const CFExpansion& cf, int64_t B) {
  std::map<int, std::string> set;
  for (auto& e : partition_Q(cf, B)) set[e.k] = e.sharp ? "sharp" : "flat";
  std::ostringstream os;
  os << "k,a_k,l_k,q_k,set\n";
  for (int k = 0; k <= cf.K(); ++k) {
    std::string s = set.count(k) ? set[k] : "";
    // q_0 = q_1 = 1 is a single element of Q, filed at k = 1
    if (s.empty()) s = (k == 0 && cf.K() >= 1 && cf.q[1] == cf.q[0]) ? set[1] : "undecided";
    os << k << ',' << cf.a[size_t(k)] << ',' << cf.l[size_t(k)] << ',' << cf.q[size_t(k)] << ',' << s << '\n';
  }
  return os.str();
}

std::vector<int64_t> checkpoints_from(int64_t N, int64_t from, const std::string& list) {
  if (!list.empty()) {
    std::vector<int64_t> v;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      size_t used = 0;
      double d = 0;
      try {
        d = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || d != std::floor(d) || d < 1 || d > 9e18) throw UsageError("bad checkpoint '" + tok + "'");
      v.push_back(int64_t(d));
    }
    return parse_checkpoints(json(v));
  }
  return default_checkpoints(std::min(from, N), N);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdlab: Mobius disjointness lab"};
  app.require_subcommand(1);
  app.add_option("--threads", g_threads, "worker threads (0: $MDLAB_THREADS or all cores)");
  app.set_version_flag("--version", kVersion);

  // sieve
  auto* sieve = app.add_subcommand("sieve", "Mobius table");
  int64_t sieve_limit = 0;
  std::string sieve_csv;
  sieve->add_option("--limit", sieve_limit, "sieve 1..limit")->required();
  sieve->add_option("--emit-csv", sieve_csv, "write n,mu rows to this path ('-' for stdout)");

  // cfrac
  auto* cfrac = app.add_subcommand("cfrac", "continued fraction expansion and Q partition");
  std::string cf_alpha, cf_out = "-";
  int cf_depth = 20;
  int64_t cf_B = 4;
  cfrac->add_option("--alpha", cf_alpha, "golden | sqrt2-1 | p/q | periodic:a0;p.. | quotients:a0,.. | furstenberg:tau,K")
      ->required();
  cfrac->add_option("--depth", cf_depth);
  cfrac->add_option("--partition-b,--B", cf_B, "flat/sharp threshold");
  bool cf_json_out = false;
  cfrac->add_flag("--json", cf_json_out, "full JSON report instead of the k,a_k,l_k,q_k,set table");
  cfrac->add_option("--out", cf_out);

  // classify
  auto* classify = app.add_subcommand("classify", "case (A)/(B)/(C) classification at scale N");
  classify->set_help_flag("--help", "print this help");  // frees the name h for the series option
  std::string cl_alpha, cl_series, cl_out = "-";
  int64_t cl_N = 1000000, cl_d1 = 1, cl_b2 = 1, cl_B = 0;
  int cl_depth = 30;
  classify->add_option("--alpha", cl_alpha)->required();
  classify->add_option("--h,--series", cl_series, "series JSON (inline or file); needs tau2")->required();
  classify->add_option("--n,--N", cl_N);
  classify->add_option("--d1", cl_d1);
  classify->add_option("--b2", cl_b2);
  classify->add_option("--B", cl_B, "0 selects B from tau and b2");
  classify->add_option("--depth", cl_depth);
  classify->add_option("--out", cl_out);

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Mobius correlation series for a configured flow");
  std::string co_config, co_out;
  correlate->add_option("--config", co_config)->required();
  std::vector<int64_t> co_b;
  std::string co_cps;
  correlate->add_option("--out", co_out, "overrides the config's output path");
  correlate->add_option("--b", co_b, "character b1,b2 (skew flows)")->delimiter(',')->expected(2);
  correlate->add_option("--checkpoints", co_cps, "comma-separated, e.g. 1e3,1e4,1e5");

  // expsum
  auto* expsum = app.add_subcommand("expsum", "sum of mu(n) e(phi(n)) for a polynomial phase");
  std::vector<double> es_coeffs;
  int64_t es_N = 1000000, es_nu = 1, es_l = 0, es_from = 1000;
  std::string es_cps, es_out = "-";
  expsum->add_option("--coeffs", es_coeffs, "alpha_0 alpha_1 ... (low to high)")->required()->delimiter(',');
  expsum->add_option("--N", es_N);
  expsum->add_option("--nu", es_nu);
  expsum->add_option("--l", es_l);
  expsum->add_option("--from", es_from);
  expsum->add_option("--checkpoints", es_cps, "comma-separated list");
  expsum->add_option("--out", es_out);

  // bsz
  auto* bsz = app.add_subcommand("bsz", "bilinear criterion test");
  std::string bz_f, bz_out = "-";
  double bz_tau = 0.1;
  int64_t bz_M = 1000, bz_N = 100000, bz_maxp = 10000;
  bsz->add_option("--f", bz_f, "alpha spec for e(n alpha), or a skew flow config (.json) for e(<b, T^n x>)")
      ->required();
  bsz->add_option("--tau", bz_tau);
  bsz->add_option("--m,--M", bz_M);
  bsz->add_option("--n,--N", bz_N);
  bsz->add_option("--max-primes", bz_maxp);
  bsz->add_option("--out", bz_out);

  // furstenberg
  auto* furst = app.add_subcommand("furstenberg", "irregular example: alpha, h, g, H, G and checks");
  double fu_tau = 1.0;
  int fu_K = 5;
  int64_t fu_M = 0;
  std::string fu_out = "-", fu_probe;
  furst->add_option("--tau", fu_tau);
  furst->add_option("--depth", fu_K);
  furst->add_option("--M", fu_M, "truncation of H (0: automatic)");
  furst->add_option("--probe", fu_probe, "write Birkhoff averages of the h-only flow to this CSV");
  furst->add_option("--emit-json,--out", fu_out);

  // nilflow
  auto* nil = app.add_subcommand("nilflow", "polynomial orbit form and correlation on the Heisenberg nilmanifold");
  std::string ni_config, ni_out = "-", ni_csv;
  int64_t ni_residue = -1;
  nil->add_option("--config", ni_config)->required();
  nil->add_option("--residue", ni_residue, "restrict the correlation to n = residue mod nu");
  nil->add_option("--csv", ni_csv, "also write the correlation series here");
  nil->add_option("--out", ni_out);

  // verify
  auto* verify = app.add_subcommand("verify", "property suites");
  std::vector<int> vf_only;
  SuiteOptions vf_opt;
  vf_opt.decay_N = 1000000;
  vf_opt.determinism_N = 300000;
  verify->add_option("--only", vf_only, "criterion ids")->delimiter(',');
  verify->add_option("--seed", vf_opt.seed);
  verify->add_option("--decay-N", vf_opt.decay_N);
  verify->add_option("--determinism-N", vf_opt.determinism_N);
  verify->add_option("--artifacts", vf_opt.artifacts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*sieve) {
      if (sieve_limit < 1) throw DomainError("--limit must be positive");
      SieveOptions so;
      so.threads = g_threads;
      auto t = mobius_sieve(sieve_limit, so);
      json cfg{{"cmd", "sieve"}, {"limit", sieve_limit}};
      if (!sieve_csv.empty()) {
        std::ostringstream os;
        write_mobius_csv(t, os);
        emit(sieve_csv, os.str(), cfg);
      } else {
        nlohmann::ordered_json j{{"limit", sieve_limit}, {"mertens", mertens(t, sieve_limit)}};
        std::cout << j.dump(2) << "\n";
      }
    } else if (*cfrac) {
      auto cf = cf_expand(parse_alpha(cf_alpha), cf_depth);
      emit(cf_out, cf_json_out ? cf_json(cf, cf_B) : cf_table(cf, cf_B), {{"cmd", "cfrac"}, {"alpha", cf_alpha}, {"depth", cf_depth}, {"B", cf_B}});
    } else if (*classify) {
      auto spec = parse_alpha(cl_alpha);
      auto cf = cf_expand(spec, cl_depth);
      if (cf.alpha.rational)
        throw DomainError("alpha is rational; classification applies to irrational alpha. Use the rational-case "
                          "pipeline: `mdlab correlate` with a rational alpha decomposes h into a cobounding part and "
                          "the q | m average");
      auto sj = json_arg(cl_series);
      auto h = parse_series(sj);
      auto rep = classify_case(cf, h, cl_N, cl_d1, cl_b2, cl_B);
      emit(cl_out, case_report_json(rep) + "\n",
           {{"cmd", "classify"}, {"alpha", cl_alpha}, {"series", sj}, {"N", cl_N}, {"d1", cl_d1}, {"b2", cl_b2},
            {"B", cl_B}, {"depth", cl_depth}});
    } else if (*correlate) {
      json raw = load_json_file(co_config);
      auto c = parse_config(raw);
      std::string out = co_out.empty() ? c.out : co_out;
      if (!co_b.empty()) {
        if (c.flow != "skew") throw UsageError("--b applies to skew flows");
        c.b = {co_b[0], co_b[1]};
        (raw.contains("flow") ? raw["flow"] : raw)["character"] = co_b;
      }
      if (!co_cps.empty()) {
        c.checkpoints = checkpoints_from(0, 0, co_cps);
        raw["checkpoints"] = c.checkpoints;
      }
      const auto& table = mobius_sieve(c.checkpoints.back(), SieveOptions{int64_t(1) << 20, g_threads, false});
      CorrelationSeries s;
      if (c.flow == "skew") s = mobius_correlate(c.skew, c.x, c.b, table, c.checkpoints, g_threads);
      else if (c.flow == "unipotent_affine") s = mobius_correlate(c.unip, c.ux, c.v, table, c.checkpoints, g_threads);
      else s = correlate_nil(c.heis, c.hx, c.obs, table, c.checkpoints, g_threads);
      emit(out, series_csv(s), raw);
    } else if (*expsum) {
      PolyPhase p{es_coeffs, es_nu, es_l};
      if (es_nu < 1 || es_l < 0 || es_l >= es_nu) throw DomainError("need nu >= 1 and 0 <= l < nu");
      auto cps = checkpoints_from(es_N, es_from, es_cps);
      auto table = mobius_sieve(cps.back(), SieveOptions{int64_t(1) << 20, g_threads, false});
      CorrelationSeries s;
      s.checkpoints = cps;
      for (auto N : cps) {
        cplx v = poly_exp_sum(p, table, N, g_threads);
        s.sums.push_back(v);
        s.normalized.push_back(v / double(N));
      }
      emit(es_out, series_csv(s),
           {{"cmd", "expsum"}, {"coeffs", es_coeffs}, {"nu", es_nu}, {"l", es_l}, {"checkpoints", cps}});
    } else if (*bsz) {
      auto table = mobius_sieve(bz_N, SieveOptions{int64_t(1) << 20, g_threads, false});
      BszReport r;
      json cfg{{"cmd", "bsz"}, {"tau", bz_tau}, {"M", bz_M}, {"N", bz_N}, {"max_primes", bz_maxp}};
      const bool is_config = bz_f.size() > 5 && bz_f.compare(bz_f.size() - 5, 5, ".json") == 0;
      if (!is_config) {
        auto a = alpha_value(parse_alpha(bz_f.rfind("rotation:", 0) == 0 ? bz_f.substr(9) : bz_f));
        cfg["f"] = bz_f;
        r = bsz_test([&](int64_t n) { return e_phase(a.times(n)); }, bz_tau, bz_M, bz_N, table, bz_maxp, g_threads);
      } else {
        json raw = load_json_file(bz_f);
        auto c = parse_config(raw);
        if (c.flow != "skew") throw DomainError("bsz --config takes a skew flow");
        cfg["config"] = raw;
        r = bsz_test([&](int64_t n) { return e_phase(character_phase(c.skew, c.x, c.b, n)); }, bz_tau, bz_M, bz_N,
                     table, bz_maxp, g_threads);
      }
      emit(bz_out, bsz_report_json(r) + "\n", cfg);
    } else if (*furst) {
      auto sys = build_system(fu_tau, fu_K, fu_M);
      auto rep = verify_combined_coefficients(sys);
      json cfg{{"cmd", "furstenberg"}, {"tau", fu_tau}, {"depth", fu_K}, {"M", fu_M}};
      emit(fu_out, furstenberg_json(sys, rep) + "\n", cfg);
      if (!fu_probe.empty()) {
        auto pr = irregularity_probe(sys, Character{0, 1}, TorusPoint::from_double(0.0, 0.0),
                                     default_checkpoints(10, 1000000));
        std::ostringstream os;
        os << "N,re,im\n";
        char buf[128];
        for (size_t i = 0; i < pr.windows.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(pr.windows[i]),
                        pr.averages[i].real(), pr.averages[i].imag());
          os << buf;
        }
        emit(fu_probe, os.str(), cfg);
      }
    } else if (*nil) {
      json raw = load_json_file(ni_config);
      auto c = parse_config(raw);
      if (c.flow != "heisenberg") throw DomainError("nilflow needs a heisenberg flow config");
      nlohmann::ordered_json j;
      j["nu"] = c.heis.nu;
      auto reps = nlohmann::ordered_json::array();
      for (int64_t l = 0; l < c.heis.nu; ++l) {
        auto rep = compile_poly_orbit(c.heis, c.hx, l);
        auto fac = nlohmann::ordered_json::array();
        for (auto& f : rep.factors) {
          mpq_class coef = f.coord == 1 ? f.b.v1 : (f.coord == 2 ? f.b.v2 : f.b.v3);
          fac.push_back({{"coord", f.coord}, {"coef", coef.get_str()}, {"power", f.power}});
        }
        auto Z = nlohmann::ordered_json::array();
        for (auto& z : rep.Z) {
          auto cs = nlohmann::ordered_json::array();
          for (auto& v : z.c) cs.push_back(v.get_str());
          Z.push_back(cs);
        }
        reps.push_back({{"l", l}, {"k", rep.k()}, {"y_degree", rep.y_degree}, {"factors", fac}, {"Z", Z}});
      }
      j["residues"] = reps;
      emit(ni_out, j.dump(2) + "\n", raw);
      if (!ni_csv.empty()) {
        auto table = mobius_sieve(c.checkpoints.back(), SieveOptions{int64_t(1) << 20, g_threads, false});
        emit(ni_csv, series_csv(correlate_nil(c.heis, c.hx, c.obs, table, c.checkpoints, g_threads, ni_residue)), raw);
      }
    } else if (*verify) {
      vf_opt.threads = g_threads;
      SuiteContext ctx(vf_opt);
      if (vf_only.empty()) vf_only = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
      bool all = true;
      for (int id : vf_only) {
        auto r = run_check(id, ctx);
        std::cout << format_result(r) << std::endl;
        all = all && r.pass;
      }
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory; lower the limit or N\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
