#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mtmv::cli {

/// Shared command options; CLI flags take precedence over config file
/// values, which take precedence over defaults.
struct Options {
  std::filesystem::path config_file;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> paths;
  std::optional<double> step;
  std::optional<std::vector<std::string>> formats;
  bool no_timestamp = false;
};

struct SweepOptions {
  double theta_min = 1.145;
  double theta_max = 2.665;
  double theta_step = 0.04;
};

// Exit codes: 0 success, 1 environment or I/O problem, 2 mathematical
// infeasibility (or a failed verification).
int run_solve(const Options& options);
int run_compare(const Options& options);
int run_sweep(const Options& options, const SweepOptions& sweep);
int run_simulate(const Options& options, std::int64_t csv_row_cap);
int run_verify(const Options& options);

}  // namespace mtmv::cli
