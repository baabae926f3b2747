#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mtmv/strategy.hpp"

namespace mtmv {

struct SimulationConfig {
  std::int64_t n_paths = 100000;
  double step = 1e-3;
  std::uint64_t seed = 42;
  /// Times at which path values are retained; drawdowns and quantile fans
  /// are computed on this grid. Must contain at least {0}; defaults to a
  /// 1e-2-spaced grid when empty entries are filled by make_record_grid.
  std::vector<double> record_grid;
  /// Horizons h for the average maximum drawdown E[MD^h]; defaults to the
  /// problem checkpoints when empty.
  std::vector<double> mdd_horizons;
  /// Retain per-record-time values to produce the quantile fan (memory
  /// scales with n_paths * record count).
  bool collect_quantiles = false;
};

/// Uniform record grid over [0, horizon] with the given spacing.
std::vector<double> make_record_grid(double horizon, double record_step);

struct CheckpointStat {
  double time;
  double mean;
  double variance;
  double se_mean;
  double se_variance;
};

struct MddStat {
  double horizon;
  double mean;
  double se;
};

struct QuantileRow {
  double time;
  double q05, q25, q50, q75, q95;
};

struct SimulationReport {
  std::uint64_t seed = 0;
  double step = 0.0;
  std::int64_t n_paths = 0;
  std::int64_t flagged_paths = 0;
  std::vector<CheckpointStat> checkpoints;
  std::vector<MddStat> mdd;
  std::vector<QuantileRow> quantile_fan;
};

/// Thrown when more than 0.1% of paths leave the finite range.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::int64_t flagged, std::int64_t total)
      : std::runtime_error("simulation failed: " + std::to_string(flagged) + " of " +
                           std::to_string(total) + " paths became non-finite"),
        flagged_(flagged),
        total_(total) {}
  std::int64_t flagged() const { return flagged_; }
  std::int64_t total() const { return total_; }

 private:
  std::int64_t flagged_;
  std::int64_t total_;
};

/// Euler-Maruyama simulation of the controlled wealth equation
///   dY = [r Y + gamma pi^T] dt + pi sigma dW
/// with the policy evaluated at the left endpoint of every step. Noise is
/// drawn from counter-based streams keyed by (seed, path, step), so the
/// report is bit-identical for a given (seed, config, problem) regardless
/// of execution order.
SimulationReport simulate(const FeedbackPolicy& policy, const ProblemSpec& spec,
                          const SimulationConfig& config);

/// Per-path samples of the quadratic cost sum_i mu_i/2 (Y(t_i) - rho_i)^2
/// under the given policy, in path order; shares the noise streams with
/// simulate() so policies can be compared pathwise.
std::vector<double> simulate_costs(const FeedbackPolicy& policy, const ProblemSpec& spec,
                                   const MultiplierSet& mult,
                                   const SimulationConfig& config);

/// Largest peak-to-later-trough drop max_{t <= s <= h} (Y(t) - Y(s)) over
/// the sampled grid; zero for nondecreasing paths.
double max_drawdown(std::span<const double> times, std::span<const double> values,
                    double horizon);

/// Record-grid wealth of the first n_keep paths, bit-identical to what a
/// full simulate() run sees for the same path indices (streams are keyed by
/// path, not by path count). Used for per-path CSV output.
std::vector<std::vector<double>> sample_record_paths(const FeedbackPolicy& policy,
                                                     const ProblemSpec& spec,
                                                     const SimulationConfig& config,
                                                     std::int64_t n_keep);

struct SweepRow {
  double theta;
  double target_1;
  double target_2;
  bool feasible;
  /// One entry per requested horizon (defaults to the two checkpoints).
  std::vector<MddStat> mdd;
  std::vector<CheckpointStat> checkpoints;
};

struct SweepTable {
  std::vector<double> horizons;
  std::vector<SweepRow> rows;
  std::int64_t skipped = 0;
};

/// Target sweep L_1 = y e^{theta r(0)}, L_2 = y e^{5 r(0)} over the given
/// theta grid for a two-checkpoint problem; infeasible entries are reported
/// and skipped. Each feasible row solves the multipliers and simulates the
/// optimal policy with the shared config.
SweepTable mdd_sweep(const ProblemSpec& spec, std::span<const double> theta_grid,
                     const SimulationConfig& config);

/// Centered moving average with shrinking windows at the edges.
std::vector<double> moving_average(std::span<const double> values, int window);

}  // namespace mtmv
