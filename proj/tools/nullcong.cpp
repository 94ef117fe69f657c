// Command-line front end: run a verification suite and print its report.
// Exit codes: 0 pass, 1 check failure, 2 usage error, 3 evaluation error.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nullcong/report.hpp"

namespace {

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw nullcong::UsageError(what + " must be a number, got '" + text + "'");
  return v;
}

int default_jobs() {
  const char* env = std::getenv("NULLCONG_JOBS");
  if (env == nullptr || *env == '\0') return 1;
  const double v = parse_real(env, "NULLCONG_JOBS");
  if (v < 1 || v != static_cast<int>(v)) throw nullcong::UsageError("NULLCONG_JOBS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  nullcong::RunConfig cfg;
  std::string ulambda = "auto";
  std::optional<double> tol;

  CLI::App app{"Verify the null-congruence Einstein metrics and print a residual report."};
  std::string suites = "all";
  for (const auto& s : nullcong::suite_names()) suites += ", " + s;
  app.add_option("suite", cfg.suite, "suite to run: " + suites)->required();
  app.add_option("--m", cfg.m, "CR dimension m (1 to 3)")->capture_default_str();
  app.add_option("--base", cfg.base, "heisenberg, fs-lift or file:<path>")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "Einstein constant of the rescaled metric")->capture_default_str();
  app.add_option("--ulambda", ulambda, "CR–Einstein constant of the base, or auto")->capture_default_str();
  app.add_option("--c", cfg.c, "free constant of the lambda0 family")->capture_default_str();
  app.add_option("--samples", cfg.samples, "sample points per suite")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--tol", tol, "tolerance for every check (default: per check)");
  app.add_option("--phi-margin", cfg.phi_margin, "distance of sampled phi from +-pi/2")->capture_default_str();
  app.add_option("--format", cfg.format, "json or csv")->capture_default_str();
  auto* jobs_opt = app.add_option("--jobs", cfg.jobs, "worker threads (default: NULLCONG_JOBS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ulambda != "auto") cfg.ulambda = parse_real(ulambda, "--ulambda");
    cfg.tol = tol;
    if (jobs_opt->count() == 0) cfg.jobs = default_jobs();
    const nullcong::Report rep = nullcong::run_suite(cfg);
    std::cout << nullcong::emit(rep, cfg.format);
    return rep.exit_code();
  } catch (const nullcong::UsageError& e) {
    std::cerr << "nullcong: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "nullcong: evaluation failed: " << e.what() << "\n";
    return 3;
  }
}
