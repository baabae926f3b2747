#pragma once

#include <span>
#include <vector>

#include "mtmv/market_model.hpp"

namespace mtmv {

/// Variance weights mu_i > 0, mean multipliers lambda_i and their ratios
/// rho_i = lambda_i / mu_i for segments i = 1..N (0-based storage), plus the
/// sentinel rho_{N+1} = 0 used by the terminal boundary data.
struct MultiplierSet {
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<double> rho;  // size N + 1, rho.back() == 0

  static MultiplierSet from_mu_lambda(std::vector<double> mu,
                                      std::vector<double> lambda);

  int count() const { return static_cast<int>(mu.size()); }

  /// Throws std::invalid_argument unless mu > 0 and rho * mu == lambda
  /// within 1e-12 relative.
  void validate() const;
};

/// Backward solution data for one segment [t_lo, t_hi]: the Riccati factor
/// P and companion g are stored through their exact terminal values; interior
/// values are closed-form exponentials of coefficient integrals.
struct RiccatiSegment {
  double t_lo;
  double t_hi;
  double rho;        // rho_i of this segment
  double p_end;      // P_i(t_i)
  double g_end;      // g_i(t_i)
  double ratio_end;  // g_i(t_i) / P_i(t_i)
  double p_start;    // P_i(t_{i-1})
  double g_start;    // g_i(t_{i-1})
  double offset;     // k_i = rho_i - ratio_end, the strategy's target level
};

/// Chain of scalar Riccati solutions P_i, g_i on consecutive checkpoint
/// segments, coupled by the jump conditions
///   P_i(t_i) = mu_i + P_{i+1}(t_i),
///   g_i(t_i) = g_{i+1}(t_i) + P_{i+1}(t_i)(rho_i - rho_{i+1}),
/// with P_{N+1}(t_N) = g_{N+1}(t_N) = 0.
class RiccatiChain {
 public:
  RiccatiChain(MarketModel market, std::vector<RiccatiSegment> segments);

  int segment_count() const { return static_cast<int>(segments_.size()); }
  const RiccatiSegment& segment(int i) const { return segments_[static_cast<std::size_t>(i)]; }
  std::span<const RiccatiSegment> segments() const { return segments_; }
  const MarketModel& market() const { return market_; }

  /// P_i(t) = P_i(t_i) exp(int_t^{t_i} [2r - beta]); t must lie in segment i.
  double p(int i, double t) const;

  /// g_i(t) = P_i(t) * ratio(i, t).
  double g(int i, double t) const;

  /// Closed-form ratio g_i(t)/P_i(t)
  ///   = ratio_end e^{-int_t^{t_i} r} + rho_i (1 - e^{-int_t^{t_i} r}).
  double ratio(int i, double t) const;

 private:
  void check_segment_time(int i, double t) const;

  MarketModel market_;
  std::vector<RiccatiSegment> segments_;
};

/// Backward pass over all segments for a given multiplier set.
RiccatiChain solve_chain(const ProblemSpec& spec, const MultiplierSet& mult);

/// Single backward segment step, shared with the multiplier recursion:
/// builds segment i from its terminal boundary data.
RiccatiSegment solve_segment(const MarketModel& market, double t_lo, double t_hi,
                             double mu, double rho, double p_next, double g_next,
                             double rho_next);

/// Max deviation between the closed forms and a classical 4th-order
/// one-step integration of the two backward ODEs at the given step.
struct OdeDeviationReport {
  double step;
  double max_dev_p;
  double max_dev_g;
  double max_deviation() const { return max_dev_p > max_dev_g ? max_dev_p : max_dev_g; }
};

OdeDeviationReport verify_against_ode(const RiccatiChain& chain,
                                      const ProblemSpec& spec,
                                      const MultiplierSet& mult, double step);

}  // namespace mtmv
