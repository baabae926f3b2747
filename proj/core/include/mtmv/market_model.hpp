#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "mtmv/piecewise.hpp"

namespace mtmv {

/// One violated standing assumption, localized to a coefficient segment.
struct AssumptionViolation {
  enum class Kind { NonPositiveRate, NonPositiveExcessReturn, CovarianceFloor };
  Kind kind;
  double segment_start;
  double segment_end;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Bond/stock market with piecewise-constant coefficients on [0, horizon]:
/// risk-free rate r(t), expected returns b(t) (n assets) and volatility
/// sigma(t) (n x d). Immutable after construction; construction enforces
/// r > 0, b - r > 0 componentwise and min eig(sigma sigma^T) > delta on
/// every segment.
///
/// Coefficient lookup at a breakpoint is right-continuous. All integrals
/// of r and beta are exact sums of value * segment length.
class MarketModel {
 public:
  MarketModel(double horizon, PiecewiseConstant<double> rate,
              PiecewiseConstant<Eigen::VectorXd> drift,
              PiecewiseConstant<Eigen::MatrixXd> vol, double delta = 1e-8);

  /// Checks the standing assumptions without constructing; never throws on
  /// violations, collects them instead.
  static AssumptionReport validate(double horizon,
                                   const PiecewiseConstant<double>& rate,
                                   const PiecewiseConstant<Eigen::VectorXd>& drift,
                                   const PiecewiseConstant<Eigen::MatrixXd>& vol,
                                   double delta = 1e-8);

  /// Convenience for the single-asset constant-coefficient market.
  static MarketModel constant(double horizon, double rate, double drift,
                              double vol, double delta = 1e-8);

  double horizon() const { return horizon_; }
  double assumption_floor() const { return delta_; }
  int asset_count() const { return n_; }
  int noise_count() const { return d_; }

  double rate(double t) const;
  Eigen::VectorXd drift(double t) const;
  Eigen::MatrixXd vol(double t) const;

  /// gamma(t) = b(t) - r(t) 1, componentwise positive by construction.
  Eigen::VectorXd excess_return(double t) const;

  /// beta(t) = gamma (sigma sigma^T)^{-1} gamma^T > 0.
  double beta(double t) const;

  /// Covariance sigma(t) sigma(t)^T.
  const Eigen::MatrixXd& covariance(double t) const;

  /// Feedback direction (sigma sigma^T)^{-1} gamma, precomputed per segment.
  const Eigen::VectorXd& feedback_direction(double t) const;

  /// Noise loading sigma^T (sigma sigma^T)^{-1} gamma; its squared norm is beta.
  const Eigen::VectorXd& noise_loading(double t) const;

  /// Exact integrals over [a, b], 0 <= a <= b <= horizon.
  double integral_rate(double a, double b) const;
  double integral_beta(double a, double b) const;

  /// Union of all coefficient breakpoints (starts at 0).
  std::span<const double> breakpoints() const { return seg_start_; }

 private:
  void check_time(double& t) const;
  double integral(std::span<const double> seg_value, double a, double b) const;

  double horizon_;
  double delta_;
  PiecewiseConstant<double> rate_;
  PiecewiseConstant<Eigen::VectorXd> drift_;
  PiecewiseConstant<Eigen::MatrixXd> vol_;
  int n_;
  int d_;

  // Merged-breakpoint caches; entry i covers [seg_start_[i], seg_start_[i+1]).
  std::vector<double> seg_start_;
  std::vector<double> seg_rate_;
  std::vector<double> seg_beta_;
  std::vector<Eigen::MatrixXd> seg_cov_;
  std::vector<Eigen::VectorXd> seg_direction_;
  std::vector<Eigen::VectorXd> seg_loading_;
};

/// Multi-checkpoint problem: grid 0 = t_0 < ... < t_N = horizon, initial
/// wealth y > 0 and one mean target per checkpoint t_1..t_N.
class ProblemSpec {
 public:
  ProblemSpec(MarketModel market, std::vector<double> checkpoints,
              double initial_wealth, std::vector<double> targets);

  const MarketModel& market() const { return market_; }
  std::span<const double> checkpoints() const { return checkpoints_; }
  double initial_wealth() const { return initial_wealth_; }
  std::span<const double> targets() const { return targets_; }

  /// Number of checkpoint segments N (>= 1).
  int segment_count() const { return static_cast<int>(targets_.size()); }

  double segment_start(int i) const { return checkpoints_[static_cast<std::size_t>(i)]; }
  double segment_end(int i) const { return checkpoints_[static_cast<std::size_t>(i) + 1]; }

  /// Segment index of time t under the half-open convention
  /// (t_{i-1}, t_i]; t <= 0 maps to segment 0.
  int segment_of(double t) const;

 private:
  MarketModel market_;
  std::vector<double> checkpoints_;
  double initial_wealth_;
  std::vector<double> targets_;
};

}  // namespace mtmv
