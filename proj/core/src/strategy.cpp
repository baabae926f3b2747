#include "mtmv/strategy.hpp"

#include <cmath>
#include <stdexcept>

namespace mtmv {

namespace {

/// Checkpoint anchors (exact recursion values) plus interior closed forms
/// for one controlled wealth process.
class MomentEvaluator {
 public:
  MomentEvaluator(const MarketModel& market, std::span<const double> checkpoints,
                  std::span<const double> offsets, double initial_wealth)
      : market_(&market),
        checkpoints_(checkpoints.begin(), checkpoints.end()),
        offsets_(offsets.begin(), offsets.end()) {
    const std::size_t n = offsets_.size();
    mean_anchor_.resize(n + 1);
    second_anchor_.resize(n + 1);
    var_anchor_.resize(n + 1);
    mean_anchor_[0] = initial_wealth;
    second_anchor_[0] = initial_wealth * initial_wealth;
    var_anchor_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = checkpoints_[i];
      const double hi = checkpoints_[i + 1];
      const double ir = market.integral_rate(lo, hi);
      const double ib = market.integral_beta(lo, hi);
      const double k = offsets_[i];
      const double gain_factor = -std::expm1(-ib);  // 1 - e^{-int beta}
      mean_anchor_[i + 1] = mean_anchor_[i] * std::exp(ir - ib) + k * gain_factor;
      second_anchor_[i + 1] =
          second_anchor_[i] * std::exp(2.0 * ir - ib) + k * k * gain_factor;
      const double incr = mean_anchor_[i + 1] - mean_anchor_[i] * std::exp(ir);
      var_anchor_[i + 1] =
          var_anchor_[i] * std::exp(2.0 * ir - ib) + incr * incr / std::expm1(ib);
    }
  }

  struct Values {
    double mean;
    double second_moment;
    double variance;
  };

  /// Closed-form values at any t in [0, T]; t on a checkpoint uses the
  /// exact anchor.
  Values at(double t) const {
    const std::size_t i = segment_of(t);
    const double lo = checkpoints_[i];
    const double hi = checkpoints_[i + 1];
    if (t == lo) return {mean_anchor_[i], second_anchor_[i], var_anchor_[i]};
    if (t == hi) return {mean_anchor_[i + 1], second_anchor_[i + 1], var_anchor_[i + 1]};

    const double k = offsets_[i];
    const double ir = market_->integral_rate(lo, t);
    const double ib = market_->integral_beta(lo, t);
    const double r_tail_lo = market_->integral_rate(lo, hi);
    const double r_tail_t = market_->integral_rate(t, hi);

    const double mean = (mean_anchor_[i] - k * std::exp(-r_tail_lo)) * std::exp(ir - ib) +
                        k * std::exp(-r_tail_t);
    const double second =
        (second_anchor_[i] - k * k * std::exp(-2.0 * r_tail_lo)) * std::exp(2.0 * ir - ib) +
        k * k * std::exp(-2.0 * r_tail_t);
    const double incr = mean - mean_anchor_[i] * std::exp(ir);
    const double variance =
        var_anchor_[i] * std::exp(2.0 * ir - ib) + incr * incr / std::expm1(ib);
    return {mean, second, variance};
  }

  double checkpoint_mean(std::size_t i) const { return mean_anchor_[i]; }
  double checkpoint_variance(std::size_t i) const { return var_anchor_[i]; }

 private:
  std::size_t segment_of(double t) const {
    if (t <= checkpoints_.front()) return 0;
    auto it = std::lower_bound(checkpoints_.begin(), checkpoints_.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - checkpoints_.begin());
    if (idx >= checkpoints_.size()) return offsets_.size() - 1;
    if (idx == 0) return 0;
    return idx - 1;
  }

  const MarketModel* market_;
  std::vector<double> checkpoints_;
  std::vector<double> offsets_;
  std::vector<double> mean_anchor_;
  std::vector<double> second_anchor_;
  std::vector<double> var_anchor_;
};

std::vector<double> report_grid(std::span<const double> checkpoints, double grid_step) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> grid{checkpoints.front()};
  for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i) {
    const double lo = checkpoints[i];
    const double hi = checkpoints[i + 1];
    const int nsub = std::max(1, static_cast<int>(std::ceil((hi - lo) / grid_step - 1e-12)));
    const double h = (hi - lo) / nsub;
    for (int j = 1; j < nsub; ++j) grid.push_back(lo + j * h);
    grid.push_back(hi);
  }
  return grid;
}

MomentPaths sample_paths(const MomentEvaluator& eval, std::span<const double> offsets,
                         std::span<const double> grid, std::size_t checkpoint_count) {
  MomentPaths out;
  out.segment_offsets.assign(offsets.begin(), offsets.end());
  out.time.assign(grid.begin(), grid.end());
  out.mean.reserve(grid.size());
  out.second_moment.reserve(grid.size());
  out.variance.reserve(grid.size());
  for (double t : grid) {
    const auto v = eval.at(t);
    out.mean.push_back(v.mean);
    out.second_moment.push_back(v.second_moment);
    out.variance.push_back(v.variance);
  }
  for (std::size_t i = 1; i <= checkpoint_count; ++i) {
    out.checkpoint_means.push_back(eval.checkpoint_mean(i));
    out.checkpoint_variances.push_back(eval.checkpoint_variance(i));
  }
  return out;
}

std::vector<double> chain_offsets(const RiccatiChain& chain) {
  std::vector<double> k;
  k.reserve(static_cast<std::size_t>(chain.segment_count()));
  for (const auto& seg : chain.segments()) k.push_back(seg.offset);
  return k;
}

ProblemSpec terminal_only_problem(const ProblemSpec& spec) {
  return ProblemSpec(spec.market(), {0.0, spec.market().horizon()}, spec.initial_wealth(),
                     {spec.targets().back()});
}

}  // namespace

FeedbackPolicy::FeedbackPolicy(MarketModel market, std::vector<double> checkpoints,
                               std::vector<double> segment_offsets)
    : market_(std::move(market)),
      checkpoints_(std::move(checkpoints)),
      offsets_(std::move(segment_offsets)),
      gain_scale_(offsets_.size(), 1.0),
      offset_scale_(offsets_.size(), 1.0) {
  if (checkpoints_.size() != offsets_.size() + 1) {
    throw std::invalid_argument("feedback policy: need one offset per segment");
  }
}

FeedbackPolicy FeedbackPolicy::optimal(const RiccatiChain& chain, const ProblemSpec& spec) {
  return FeedbackPolicy(spec.market(),
                        {spec.checkpoints().begin(), spec.checkpoints().end()},
                        chain_offsets(chain));
}

int FeedbackPolicy::segment_of(double t) const {
  if (t <= checkpoints_.front()) return 0;
  auto it = std::lower_bound(checkpoints_.begin(), checkpoints_.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - checkpoints_.begin());
  if (idx >= checkpoints_.size()) return segment_count() - 1;
  if (idx == 0) return 0;
  return static_cast<int>(idx) - 1;
}

double FeedbackPolicy::target_level(double t) const {
  const auto i = static_cast<std::size_t>(segment_of(t));
  const double disc = std::exp(-market_.integral_rate(t, checkpoints_[i + 1]));
  return offset_scale_[i] * offsets_[i] * disc;
}

Eigen::VectorXd FeedbackPolicy::allocation(double t, double wealth) const {
  const auto i = static_cast<std::size_t>(segment_of(t));
  return gain_scale_[i] * market_.feedback_direction(t) * (target_level(t) - wealth);
}

FeedbackPolicy FeedbackPolicy::with_gain_scale(double factor) const {
  FeedbackPolicy out = *this;
  for (double& g : out.gain_scale_) g *= factor;
  return out;
}

FeedbackPolicy FeedbackPolicy::with_offset_scale(double factor) const {
  FeedbackPolicy out = *this;
  for (double& c : out.offset_scale_) c *= factor;
  return out;
}

Eigen::VectorXd optimal_control(const RiccatiChain& chain, const MultiplierSet& mult,
                                const ProblemSpec& spec, double t, double wealth) {
  if (mult.count() != chain.segment_count()) {
    throw std::invalid_argument("optimal control: multiplier/chain size mismatch");
  }
  const int i = spec.segment_of(t);
  const RiccatiSegment& seg = chain.segment(i);
  const double disc = std::exp(-spec.market().integral_rate(t, seg.t_hi));
  return spec.market().feedback_direction(t) * (seg.offset * disc - wealth);
}

PolicyReport propagate_moments(const RiccatiChain& chain, const MultiplierSet& mult,
                               const ProblemSpec& spec, double grid_step) {
  if (mult.count() != chain.segment_count() ||
      chain.segment_count() != spec.segment_count()) {
    throw std::invalid_argument("moment propagation: chain does not match the problem");
  }
  const std::vector<double> offsets = chain_offsets(chain);
  const MomentEvaluator eval(spec.market(), spec.checkpoints(), offsets,
                             spec.initial_wealth());
  const std::vector<double> grid = report_grid(spec.checkpoints(), grid_step);

  PolicyReport report;
  report.model = sample_paths(eval, offsets, grid, offsets.size());
  return report;
}

std::vector<double> frontier_recursion(const ProblemSpec& spec,
                                       std::span<const double> means) {
  if (means.size() != static_cast<std::size_t>(spec.segment_count())) {
    throw std::invalid_argument("frontier: need one mean per checkpoint");
  }
  const MarketModel& market = spec.market();
  std::vector<double> variances;
  variances.reserve(means.size());
  double prev_mean = spec.initial_wealth();
  double prev_var = 0.0;
  for (int i = 0; i < spec.segment_count(); ++i) {
    const double lo = spec.segment_start(i);
    const double hi = spec.segment_end(i);
    const double ir = market.integral_rate(lo, hi);
    const double ib = market.integral_beta(lo, hi);
    const double mean = means[static_cast<std::size_t>(i)];
    const double incr = mean - prev_mean * std::exp(ir);
    if (incr < 0.0) {
      throw std::invalid_argument("frontier: mean at checkpoint " + std::to_string(i + 1) +
                                  " is below riskless growth");
    }
    const double var = prev_var * std::exp(2.0 * ir - ib) + incr * incr / std::expm1(ib);
    variances.push_back(var);
    prev_mean = mean;
    prev_var = var;
  }
  return variances;
}

MomentPaths classical_baseline(const ProblemSpec& spec, double grid_step) {
  const ProblemSpec reduced = terminal_only_problem(spec);
  const MultiplierSolution sol = solve_multipliers(reduced);
  const std::vector<double> offsets = chain_offsets(sol.chain);
  const MomentEvaluator eval(reduced.market(), reduced.checkpoints(), offsets,
                             reduced.initial_wealth());

  // Sample on the layout of the original problem so the two models share a
  // time column; checkpoint statistics are taken at the original checkpoints.
  const std::vector<double> grid = report_grid(spec.checkpoints(), grid_step);
  MomentPaths out;
  out.segment_offsets = offsets;
  out.time = grid;
  for (double t : grid) {
    const auto v = eval.at(t);
    out.mean.push_back(v.mean);
    out.second_moment.push_back(v.second_moment);
    out.variance.push_back(v.variance);
  }
  for (int i = 1; i <= spec.segment_count(); ++i) {
    const auto v = eval.at(spec.checkpoints()[static_cast<std::size_t>(i)]);
    out.checkpoint_means.push_back(v.mean);
    out.checkpoint_variances.push_back(v.variance);
  }
  return out;
}

PolicyReport solve_policy_report(const ProblemSpec& spec, double grid_step) {
  const MultiplierSolution sol = solve_multipliers(spec);
  PolicyReport report = propagate_moments(sol.chain, sol.multipliers, spec, grid_step);
  report.classical_baseline = classical_baseline(spec, grid_step);
  return report;
}

ComparisonReport compare_models(const ProblemSpec& spec) {
  if (spec.segment_count() != 2) {
    throw std::invalid_argument("model comparison requires exactly two checkpoints");
  }
  const MarketModel& market = spec.market();
  const double y = spec.initial_wealth();
  const double l1 = spec.targets()[0];
  const double l2 = spec.targets()[1];
  const double t1 = spec.checkpoints()[1];

  // Growth inequalities plus a positive first variance weight.
  (void)solve_n2_closed_form(spec);

  const std::vector<double> var_multi = frontier_recursion(spec, spec.targets());
  const MomentPaths classical = classical_baseline(spec, spec.market().horizon());

  // The comparison additionally needs the first target below the classical
  // model's intermediate mean (the second comparison inequality; it implies
  // the positive weight but not conversely).
  if (!(l1 < classical.checkpoint_means[0])) {
    FeasibilityReport feas;
    feas.growth_ok = {true, true};
    feas.convexity_ok = {false};
    feas.resulting_mu_positive = {true, true};
    throw InfeasibleTargetsError(
        1, "comparison requires L_1 below the classical mean at t_1 (= " +
               std::to_string(classical.checkpoint_means[0]) + ")",
        feas);
  }

  const double a1 = std::exp(market.integral_rate(0.0, t1));
  const double b1 = std::exp(market.integral_beta(0.0, t1));
  const double a2 = std::exp(market.integral_rate(t1, market.horizon()));
  const double b2 = std::exp(market.integral_beta(t1, market.horizon()));
  const double c2 = a2 * a2 / b2;

  ComparisonReport report;
  report.target_1 = l1;
  report.target_2 = l2;
  report.var_multi_1 = var_multi[0];
  report.var_multi_2 = var_multi[1];
  report.var_classical_1 = classical.checkpoint_variances[0];
  report.var_classical_2 = classical.checkpoint_variances[1];
  report.sum_multi = report.var_multi_1 + report.var_multi_2;
  report.sum_classical = report.var_classical_1 + report.var_classical_2;
  report.window_lo = (y * a1 * (1.0 + c2) * (b2 - 1.0) + a2 * l2 * (b1 - 1.0)) /
                     ((1.0 + c2) * (b2 - 1.0) + a2 * a2 * (b1 - 1.0));
  report.window_hi = classical.checkpoint_means[0];
  report.var1_strictly_smaller = report.var_multi_1 < report.var_classical_1;
  report.var2_strictly_larger = report.var_multi_2 > report.var_classical_2;
  report.sum_dominance = report.sum_multi < report.sum_classical;
  report.l1_in_window = l1 >= report.window_lo && l1 < report.window_hi;
  return report;
}

double quadratic_cost_analytic(const RiccatiChain& chain, const MultiplierSet& mult,
                               const ProblemSpec& spec) {
  PolicyReport report = propagate_moments(chain, mult, spec, spec.market().horizon());
  double total = 0.0;
  for (int i = 0; i < spec.segment_count(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double dev = report.model.checkpoint_means[idx] - mult.rho[idx];
    total += 0.5 * mult.mu[idx] *
             (report.model.checkpoint_variances[idx] + dev * dev);
  }
  return total;
}

}  // namespace mtmv
