// Command line front end: solve, verify, trace, study. Exit codes are the
// API: 0 success, 2 success with a no-convergence warning, 1 error.
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ddf/cli.hpp"
#include "ddf/config.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  bool deterministic = false;
  long long seed = -1;
  double tol = -1.0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out_dir, "output directory (overrides the config)");
  cmd->add_option("--jobs", f.jobs, "worker thread cap");
  cmd->add_flag("--deterministic", f.deterministic,
                "single-threaded, bit-reproducible runs");
  cmd->add_option("--seed", f.seed, "seed for randomized suites");
  cmd->add_option("--tol", f.tol, "tolerance override for this command");
}

ddf::RunConfig load_with_overrides(const CommonFlags& f, const std::string& cmd) {
  ddf::RunConfig cfg = ddf::load_run_config(f.config_path);
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.jobs > 0) cfg.solve.jobs = f.jobs;
  if (f.deterministic) cfg.deterministic = true;
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.tol >= 0.0) {
    if (cmd == "solve" || cmd == "study") cfg.solve.tol = f.tol;
    if (cmd == "verify") cfg.verify_tol = f.tol;
    if (cmd == "trace") cfg.trace.tol = f.tol;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet problems with boundary measure data: solve and verify"};
  app.require_subcommand(1);

  CommonFlags solve_f, verify_f, trace_f, study_f;
  std::string solution_path;

  CLI::App* solve = app.add_subcommand(
      "solve", "run the measure-data schedule and write the solution");
  add_common(solve, solve_f);
  CLI::App* verify = app.add_subcommand(
      "verify", "check a stored solution against the weak formulation");
  add_common(verify, verify_f);
  verify->add_option("--solution", solution_path, "solution CSV to verify")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::App* trace = app.add_subcommand(
      "trace", "extract the boundary trace of a global density");
  add_common(trace, trace_f);
  CLI::App* study = app.add_subcommand(
      "study", "sweep mesh sizes or levels and tabulate observed orders");
  add_common(study, study_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return ddf::cmd_solve(load_with_overrides(solve_f, "solve"));
    if (verify->parsed())
      return ddf::cmd_verify(load_with_overrides(verify_f, "verify"),
                             solution_path);
    if (trace->parsed())
      return ddf::cmd_trace(load_with_overrides(trace_f, "trace"));
    if (study->parsed())
      return ddf::cmd_study(load_with_overrides(study_f, "study"));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no command\n";
  return 1;
}
