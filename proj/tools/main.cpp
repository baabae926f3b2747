#include <CLI11.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "commands.hpp"

namespace {

void add_common(CLI::App* cmd, mtmv::cli::Options& options, std::string& output_dir,
                std::vector<std::string>& formats, std::uint64_t& seed,
                std::int64_t& paths, double& step) {
  cmd->add_option("-c,--config", options.config_file, "experiment config (JSON)")
      ->required();
  cmd->add_option("-o,--output-dir", output_dir,
                  "output directory (default: config, then $MTMV_OUTPUT_DIR)");
  cmd->add_option("--seed", seed, "override the master seed");
  cmd->add_option("--paths", paths, "override the Monte Carlo path count");
  cmd->add_option("--step", step, "override the Euler step");
  cmd->add_option("--format", formats, "output formats (csv, json, svg)")
      ->delimiter(',');
  cmd->add_flag("--no-timestamp", options.no_timestamp,
                "suppress the generation timestamp line in CSV outputs");
}

void finalize(mtmv::cli::Options& options, CLI::App* cmd, const std::string& output_dir,
              const std::vector<std::string>& formats, std::uint64_t seed,
              std::int64_t paths, double step) {
  if (cmd->count("--output-dir")) options.output_dir = output_dir;
  if (cmd->count("--seed")) options.seed = seed;
  if (cmd->count("--paths")) options.paths = paths;
  if (cmd->count("--step")) options.step = step;
  if (cmd->count("--format")) options.formats = formats;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-checkpoint mean-variance portfolio toolkit"};
  app.require_subcommand(1);

  struct PerCommand {
    mtmv::cli::Options options;
    std::string output_dir;
    std::vector<std::string> formats;
    std::uint64_t seed = 0;
    std::int64_t paths = 0;
    double step = 0.0;
  };

  PerCommand solve_state, compare_state, sweep_state, simulate_state, verify_state;
  mtmv::cli::SweepOptions sweep_options;
  std::int64_t csv_row_cap = 100000;

  CLI::App* solve = app.add_subcommand(
      "solve", "solve the multipliers and write multipliers.json / policy.csv");
  add_common(solve, solve_state.options, solve_state.output_dir, solve_state.formats,
             solve_state.seed, solve_state.paths, solve_state.step);

  CLI::App* compare = app.add_subcommand(
      "compare", "compare against the classical single-target model (figures 1-2)");
  add_common(compare, compare_state.options, compare_state.output_dir,
             compare_state.formats, compare_state.seed, compare_state.paths,
             compare_state.step);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "average maximum drawdown across a first-target sweep (figure 3)");
  add_common(sweep, sweep_state.options, sweep_state.output_dir, sweep_state.formats,
             sweep_state.seed, sweep_state.paths, sweep_state.step);
  sweep->add_option("theta_min", sweep_options.theta_min, "sweep start")->required();
  sweep->add_option("theta_max", sweep_options.theta_max, "sweep end")->required();
  sweep->add_option("theta_step", sweep_options.theta_step, "sweep spacing")->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo run of the optimal strategy, with report and path CSV");
  add_common(simulate, simulate_state.options, simulate_state.output_dir,
             simulate_state.formats, simulate_state.seed, simulate_state.paths,
             simulate_state.step);
  simulate->add_option("--csv-rows", csv_row_cap,
                       "row cap for paths.csv (0 disables the file)");

  CLI::App* verify = app.add_subcommand(
      "verify", "run the closed-form/numerical cross-check suite on the config");
  add_common(verify, verify_state.options, verify_state.output_dir, verify_state.formats,
             verify_state.seed, verify_state.paths, verify_state.step);

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) {
    finalize(solve_state.options, solve, solve_state.output_dir, solve_state.formats,
             solve_state.seed, solve_state.paths, solve_state.step);
    return mtmv::cli::run_solve(solve_state.options);
  }
  if (compare->parsed()) {
    finalize(compare_state.options, compare, compare_state.output_dir,
             compare_state.formats, compare_state.seed, compare_state.paths,
             compare_state.step);
    return mtmv::cli::run_compare(compare_state.options);
  }
  if (sweep->parsed()) {
    finalize(sweep_state.options, sweep, sweep_state.output_dir, sweep_state.formats,
             sweep_state.seed, sweep_state.paths, sweep_state.step);
    return mtmv::cli::run_sweep(sweep_state.options, sweep_options);
  }
  if (simulate->parsed()) {
    finalize(simulate_state.options, simulate, simulate_state.output_dir,
             simulate_state.formats, simulate_state.seed, simulate_state.paths,
             simulate_state.step);
    return mtmv::cli::run_simulate(simulate_state.options, csv_row_cap);
  }
  if (verify->parsed()) {
    finalize(verify_state.options, verify, verify_state.output_dir, verify_state.formats,
             verify_state.seed, verify_state.paths, verify_state.step);
    return mtmv::cli::run_verify(verify_state.options);
  }
  return 0;
}
