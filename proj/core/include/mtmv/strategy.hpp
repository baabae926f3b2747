#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mtmv/parameter_solver.hpp"
#include "mtmv/riccati_chain.hpp"

namespace mtmv {

/// Sampled analytic moment trajectories of a controlled wealth process plus
/// its exact checkpoint statistics.
struct MomentPaths {
  std::vector<double> segment_offsets;  // k_i per segment
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<double> second_moment;
  std::vector<double> variance;
  std::vector<double> checkpoint_means;
  std::vector<double> checkpoint_variances;
};

struct PolicyReport {
  MomentPaths model;
  std::optional<MomentPaths> classical_baseline;
};

/// Linear feedback strategy pi(t, y) = gain_i * direction(t) *
/// (offset_i * k_i * e^{-int_t^{t_i} r} - y) for t in segment i. The scale
/// factors default to 1 and exist for perturbation studies; read-only during
/// simulation.
class FeedbackPolicy {
 public:
  FeedbackPolicy(MarketModel market, std::vector<double> checkpoints,
                 std::vector<double> segment_offsets);

  static FeedbackPolicy optimal(const RiccatiChain& chain, const ProblemSpec& spec);

  Eigen::VectorXd allocation(double t, double wealth) const;

  /// Discounted target level offset_i * k_i * e^{-int_t^{t_i} r}.
  double target_level(double t) const;

  int segment_count() const { return static_cast<int>(offsets_.size()); }
  int segment_of(double t) const;
  double segment_offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
  double gain_scale(int i) const { return gain_scale_[static_cast<std::size_t>(i)]; }
  double offset_scale(int i) const { return offset_scale_[static_cast<std::size_t>(i)]; }
  std::span<const double> checkpoints() const { return checkpoints_; }
  const MarketModel& market() const { return market_; }

  FeedbackPolicy with_gain_scale(double factor) const;
  FeedbackPolicy with_offset_scale(double factor) const;

 private:
  MarketModel market_;
  std::vector<double> checkpoints_;
  std::vector<double> offsets_;
  std::vector<double> gain_scale_;
  std::vector<double> offset_scale_;
};

/// Optimal allocation vector at (t, wealth); direction (sigma sigma^T)^{-1}
/// gamma, linear in wealth.
Eigen::VectorXd optimal_control(const RiccatiChain& chain, const MultiplierSet& mult,
                                const ProblemSpec& spec, double t, double wealth);

/// Closed-form mean / second-moment / variance paths of the optimally
/// controlled wealth, sampled on a grid of at most grid_step spacing, with
/// checkpoint values from the exact recursions. The grid is for reporting
/// only; it introduces no solution error.
PolicyReport propagate_moments(const RiccatiChain& chain, const MultiplierSet& mult,
                               const ProblemSpec& spec, double grid_step);

/// Minimal checkpoint variances for given checkpoint means:
///   V_i = V_{i-1} e^{int (2r - beta)} + (m_i - m_{i-1} e^{int r})^2 /
///         (e^{int beta} - 1),  V_0 = 0.
/// Means below riskless growth are rejected.
std::vector<double> frontier_recursion(const ProblemSpec& spec,
                                       std::span<const double> means);

/// Single-checkpoint model with terminal target L_N, sampled on the same
/// grid layout as propagate_moments; checkpoint columns are evaluated at the
/// original checkpoints of `spec`.
MomentPaths classical_baseline(const ProblemSpec& spec, double grid_step);

/// Solve-and-report convenience: multipliers, moment paths and the attached
/// classical baseline in one call.
PolicyReport solve_policy_report(const ProblemSpec& spec, double grid_step);

/// Two-checkpoint comparison against the classical single-target model.
struct ComparisonReport {
  double target_1;
  double target_2;
  double var_multi_1;
  double var_multi_2;
  double var_classical_1;
  double var_classical_2;
  double sum_multi;
  double sum_classical;
  double window_lo;  // minimizer of the variance sum over L_1
  double window_hi;  // classical mean at t_1; sums coincide here
  bool var1_strictly_smaller;
  bool var2_strictly_larger;
  bool sum_dominance;
  bool l1_in_window;
};

/// Requires N = 2 and targets satisfying both target inequalities (growth
/// over riskless at each checkpoint and a positive first variance weight);
/// throws InfeasibleTargetsError otherwise.
ComparisonReport compare_models(const ProblemSpec& spec);

/// Value of the quadratic cost sum_i mu_i/2 E[(Y(t_i) - rho_i)^2] for the
/// optimal strategy, from the analytic checkpoint moments.
double quadratic_cost_analytic(const RiccatiChain& chain, const MultiplierSet& mult,
                               const ProblemSpec& spec);

}  // namespace mtmv
