// One line per acceptance criterion; exit status 1 if any fails.
#include <iostream>

#include "CLI11.hpp"
#include "mdl/checks.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance"};
  mdl::SuiteOptions opt;
  opt.decay_N = 10000000;     // criterion 9 compares N = 10^7 against N = 10^4
  opt.determinism_N = 2000000;
  app.add_option("--artifacts", opt.artifacts);
  app.add_option("--seed", opt.seed);
  app.add_option("--threads", opt.threads);
  CLI11_PARSE(app, argc, argv);

  mdl::SuiteContext ctx(opt);
  int failed = 0;
  for (int id = 1; id <= 10; ++id) {
    auto r = mdl::run_check(id, ctx);
    std::cout << mdl::format_result(r) << std::endl;
    if (!r.pass) ++failed;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all criteria pass")
            << std::endl;
  return failed ? 1 : 0;
}
