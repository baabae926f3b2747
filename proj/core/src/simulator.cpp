#include "mtmv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtmv/philox.hpp"

namespace mtmv {

std::vector<double> make_record_grid(double horizon, double record_step) {
  if (!(record_step > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("record grid: horizon and spacing must be positive");
  }
  const int m = std::max(1, static_cast<int>(std::llround(horizon / record_step)));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j < m; ++j) grid.push_back(j * record_step);
  grid.push_back(horizon);
  return grid;
}

double max_drawdown(std::span<const double> times, std::span<const double> values,
                    double horizon) {
  if (times.empty() || times.size() != values.size()) {
    throw std::domain_error("max drawdown: empty or mismatched sample grid");
  }
  double peak = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > horizon + 1e-12) break;
    any = true;
    peak = std::max(peak, values[i]);
    worst = std::max(worst, peak - values[i]);
  }
  if (!any) throw std::domain_error("max drawdown: no samples inside the horizon");
  return worst;
}

std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window <= 0 || window % 2 == 0) {
    throw std::invalid_argument("moving average: window must be a positive odd number");
  }
  const int n = static_cast<int>(values.size());
  const int half = window / 2;
  std::vector<double> out(values.size());
  for (int i = 0; i < n; ++i) {
    const int h = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (int j = i - h; j <= i + h; ++j) sum += values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / (2 * h + 1);
  }
  return out;
}

namespace {

struct StepPlan {
  int d = 1;
  std::vector<double> node_time;    // size K + 1
  std::vector<double> growth;       // e^{r h} per step
  std::vector<double> drift_coef;   // gain * beta * h per step
  std::vector<double> target;       // scaled discounted level at the left node
  std::vector<double> noise_coef;   // gain * sqrt(h) * loading, [K][d] flat
  std::vector<std::size_t> checkpoint_node;
  std::vector<std::size_t> record_node;
  std::vector<double> record_time;
  std::vector<double> horizons;               // ascending
  std::vector<std::size_t> horizon_record;    // last record index inside each horizon
};

StepPlan build_plan(const FeedbackPolicy& policy, const ProblemSpec& spec,
                    const SimulationConfig& config) {
  if (config.n_paths <= 0) throw std::invalid_argument("simulation: need a positive path count");
  if (!(config.step > 0.0)) throw std::invalid_argument("simulation: need a positive step");
  const MarketModel& market = spec.market();

  StepPlan plan;
  plan.d = market.noise_count();
  plan.node_time.push_back(0.0);

  for (int i = 0; i < spec.segment_count(); ++i) {
    const double lo = spec.segment_start(i);
    const double hi = spec.segment_end(i);
    const double gap = hi - lo;
    const auto nsteps = static_cast<std::int64_t>(std::llround(gap / config.step));
    if (nsteps < 1 ||
        std::abs(nsteps * config.step - gap) > 1e-12 * std::max(1.0, gap)) {
      throw std::invalid_argument(
          "simulation: step does not divide the checkpoint gap [" + std::to_string(lo) +
          ", " + std::to_string(hi) + "]");
    }
    const double h = gap / static_cast<double>(nsteps);
    const double sqrt_h = std::sqrt(h);
    const double gain = policy.gain_scale(i);
    const double offset = policy.offset_scale(i) * policy.segment_offset(i);

    for (std::int64_t k = 0; k < nsteps; ++k) {
      const double t = lo + static_cast<double>(k) * h;
      plan.growth.push_back(std::exp(market.rate(t) * h));
      plan.drift_coef.push_back(gain * market.beta(t) * h);
      plan.target.push_back(offset * std::exp(-market.integral_rate(t, hi)));
      const Eigen::VectorXd& loading = market.noise_loading(t);
      for (int m = 0; m < plan.d; ++m) {
        plan.noise_coef.push_back(gain * sqrt_h * loading[m]);
      }
      plan.node_time.push_back((k + 1 == nsteps) ? hi : lo + static_cast<double>(k + 1) * h);
    }
    plan.checkpoint_node.push_back(plan.node_time.size() - 1);
  }

  const std::vector<double> record =
      config.record_grid.empty() ? make_record_grid(market.horizon(), 1e-2)
                                 : config.record_grid;
  for (double t : record) {
    const auto it = std::lower_bound(plan.node_time.begin(), plan.node_time.end(), t - 1e-9);
    if (it == plan.node_time.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, t)) {
      throw std::invalid_argument("simulation: record time " + std::to_string(t) +
                                  " does not land on an Euler node");
    }
    plan.record_node.push_back(static_cast<std::size_t>(it - plan.node_time.begin()));
    plan.record_time.push_back(*it);
  }
  if (plan.record_node.empty() || plan.record_node.front() != 0) {
    throw std::invalid_argument("simulation: record grid must start at t = 0");
  }

  plan.horizons = config.mdd_horizons;
  if (plan.horizons.empty()) {
    for (int i = 0; i < spec.segment_count(); ++i) plan.horizons.push_back(spec.segment_end(i));
  }
  std::sort(plan.horizons.begin(), plan.horizons.end());
  for (double h : plan.horizons) {
    std::size_t idx = 0;
    for (std::size_t r = 0; r < plan.record_time.size(); ++r) {
      if (plan.record_time[r] <= h + 1e-12) idx = r;
    }
    plan.horizon_record.push_back(idx);
  }
  return plan;
}

/// One path of the Euler scheme; returns false when the wealth leaves the
/// finite range. Checkpoint wealths, per-horizon drawdowns and (optionally)
/// record-grid values are written to the caller's slots.
bool run_path(const StepPlan& plan, double initial_wealth, std::uint64_t seed,
              std::int64_t path, std::int64_t n_paths, double* checkpoint_out,
              double* mdd_out, double* record_out) {
  const NormalStream stream(seed, static_cast<std::uint64_t>(path));
  const std::size_t steps = plan.growth.size();
  const int d = plan.d;

  double y = initial_wealth;
  std::size_t next_cp = 0;
  std::size_t next_rec = 0;
  std::size_t next_hor = 0;
  double peak = y;
  double worst = 0.0;

  auto touch_record = [&](std::size_t rec_idx) {
    peak = std::max(peak, y);
    worst = std::max(worst, peak - y);
    if (record_out != nullptr) {
      record_out[rec_idx * static_cast<std::size_t>(n_paths) +
                 static_cast<std::size_t>(path)] = y;
    }
    while (next_hor < plan.horizon_record.size() &&
           plan.horizon_record[next_hor] == rec_idx) {
      mdd_out[next_hor] = worst;
      ++next_hor;
    }
  };

  if (plan.record_node[0] == 0) {
    touch_record(0);
    ++next_rec;
  }

  double z[16];
  for (std::size_t k = 0; k < steps; ++k) {
    if (d == 1) {
      z[0] = stream.first(static_cast<std::uint32_t>(k));
    } else {
      stream.fill(static_cast<std::uint32_t>(k), z, d);
    }
    const double s = plan.target[k] - y;
    double shock = 0.0;
    const double* nc = &plan.noise_coef[k * static_cast<std::size_t>(d)];
    for (int m = 0; m < d; ++m) shock += nc[m] * z[m];
    y = y * plan.growth[k] + plan.drift_coef[k] * s + s * shock;

    if (!std::isfinite(y)) return false;

    const std::size_t node = k + 1;
    if (next_cp < plan.checkpoint_node.size() && plan.checkpoint_node[next_cp] == node) {
      checkpoint_out[next_cp] = y;
      ++next_cp;
    }
    if (next_rec < plan.record_node.size() && plan.record_node[next_rec] == node) {
      touch_record(next_rec);
      ++next_rec;
    }
  }
  return true;
}

struct MomentStats {
  double mean;
  double variance;
  double se_mean;
  double se_variance;
};

/// Two-pass sample statistics over the unflagged entries.
MomentStats column_stats(const std::vector<double>& values,
                         const std::vector<char>& flagged, std::size_t stride,
                         std::size_t column, std::int64_t n_paths) {
  long double sum = 0.0L;
  std::int64_t n = 0;
  for (std::int64_t p = 0; p < n_paths; ++p) {
    if (flagged[static_cast<std::size_t>(p)]) continue;
    sum += values[static_cast<std::size_t>(p) * stride + column];
    ++n;
  }
  const double mean = static_cast<double>(sum / n);
  long double m2 = 0.0L, m4 = 0.0L;
  for (std::int64_t p = 0; p < n_paths; ++p) {
    if (flagged[static_cast<std::size_t>(p)]) continue;
    const double dev = values[static_cast<std::size_t>(p) * stride + column] - mean;
    const long double d2 = static_cast<long double>(dev) * dev;
    m2 += d2;
    m4 += d2 * d2;
  }
  const double nn = static_cast<double>(n);
  const double var = static_cast<double>(m2) / (nn - 1.0);
  const double m4c = static_cast<double>(m4) / nn;
  const double var_of_var =
      std::max(0.0, (m4c - var * var * (nn - 3.0) / (nn - 1.0)) / nn);
  return {mean, var, std::sqrt(var / nn), std::sqrt(var_of_var)};
}

double quantile_sorted(std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto idx = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(idx);
  if (idx + 1 >= v.size()) return v[idx];
  return v[idx] * (1.0 - frac) + v[idx + 1] * frac;
}

}  // namespace

SimulationReport simulate(const FeedbackPolicy& policy, const ProblemSpec& spec,
                          const SimulationConfig& config) {
  const StepPlan plan = build_plan(policy, spec, config);
  const std::int64_t n_paths = config.n_paths;
  const auto n_checkpoints = plan.checkpoint_node.size();
  const auto n_horizons = plan.horizons.size();

  std::vector<double> checkpoint_values(static_cast<std::size_t>(n_paths) * n_checkpoints);
  std::vector<double> mdd_values(static_cast<std::size_t>(n_paths) * n_horizons);
  std::vector<char> flagged(static_cast<std::size_t>(n_paths), 0);
  std::vector<double> record_values;
  if (config.collect_quantiles) {
    record_values.resize(plan.record_node.size() * static_cast<std::size_t>(n_paths));
  }

  // Paths are independent; results land in per-path slots, so any execution
  // order (or parallel schedule) produces identical output.
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n_paths; ++p) {
    const bool ok = run_path(plan, spec.initial_wealth(), config.seed, p, n_paths,
                             &checkpoint_values[static_cast<std::size_t>(p) * n_checkpoints],
                             &mdd_values[static_cast<std::size_t>(p) * n_horizons],
                             config.collect_quantiles ? record_values.data() : nullptr);
    if (!ok) flagged[static_cast<std::size_t>(p)] = 1;
  }

  std::int64_t n_flagged = 0;
  for (char f : flagged) n_flagged += f;
  if (n_flagged * 1000 > n_paths) throw SimulationError(n_flagged, n_paths);

  SimulationReport report;
  report.seed = config.seed;
  report.step = config.step;
  report.n_paths = n_paths;
  report.flagged_paths = n_flagged;

  for (std::size_t c = 0; c < n_checkpoints; ++c) {
    const MomentStats s = column_stats(checkpoint_values, flagged, n_checkpoints, c, n_paths);
    report.checkpoints.push_back({plan.node_time[plan.checkpoint_node[c]], s.mean,
                                  s.variance, s.se_mean, s.se_variance});
  }
  for (std::size_t h = 0; h < n_horizons; ++h) {
    const MomentStats s = column_stats(mdd_values, flagged, n_horizons, h, n_paths);
    report.mdd.push_back({plan.horizons[h], s.mean, s.se_mean});
  }

  if (config.collect_quantiles) {
    std::vector<double> column;
    column.reserve(static_cast<std::size_t>(n_paths));
    for (std::size_t r = 0; r < plan.record_node.size(); ++r) {
      column.clear();
      for (std::int64_t p = 0; p < n_paths; ++p) {
        if (!flagged[static_cast<std::size_t>(p)]) {
          column.push_back(
              record_values[r * static_cast<std::size_t>(n_paths) + static_cast<std::size_t>(p)]);
        }
      }
      std::sort(column.begin(), column.end());
      report.quantile_fan.push_back({plan.record_time[r], quantile_sorted(column, 0.05),
                                     quantile_sorted(column, 0.25),
                                     quantile_sorted(column, 0.50),
                                     quantile_sorted(column, 0.75),
                                     quantile_sorted(column, 0.95)});
    }
  }
  return report;
}

std::vector<double> simulate_costs(const FeedbackPolicy& policy, const ProblemSpec& spec,
                                   const MultiplierSet& mult,
                                   const SimulationConfig& config) {
  if (mult.count() != spec.segment_count()) {
    throw std::invalid_argument("cost simulation: multiplier count mismatch");
  }
  const StepPlan plan = build_plan(policy, spec, config);
  const std::int64_t n_paths = config.n_paths;
  const auto n_checkpoints = plan.checkpoint_node.size();
  const auto n_horizons = plan.horizons.size();

  std::vector<double> checkpoint_values(static_cast<std::size_t>(n_paths) * n_checkpoints);
  std::vector<double> mdd_values(static_cast<std::size_t>(n_paths) * n_horizons);
  std::vector<double> costs(static_cast<std::size_t>(n_paths));
  std::vector<char> flagged(static_cast<std::size_t>(n_paths), 0);

#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n_paths; ++p) {
    double* cp = &checkpoint_values[static_cast<std::size_t>(p) * n_checkpoints];
    const bool ok = run_path(plan, spec.initial_wealth(), config.seed, p, n_paths, cp,
                             &mdd_values[static_cast<std::size_t>(p) * n_horizons], nullptr);
    if (!ok) {
      flagged[static_cast<std::size_t>(p)] = 1;
      costs[static_cast<std::size_t>(p)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_checkpoints; ++i) {
      const double dev = cp[i] - mult.rho[i];
      total += 0.5 * mult.mu[i] * dev * dev;
    }
    costs[static_cast<std::size_t>(p)] = total;
  }

  std::int64_t n_flagged = 0;
  for (char f : flagged) n_flagged += f;
  if (n_flagged * 1000 > n_paths) throw SimulationError(n_flagged, n_paths);
  return costs;
}

std::vector<std::vector<double>> sample_record_paths(const FeedbackPolicy& policy,
                                                     const ProblemSpec& spec,
                                                     const SimulationConfig& config,
                                                     std::int64_t n_keep) {
  const StepPlan plan = build_plan(policy, spec, config);
  n_keep = std::min(n_keep, config.n_paths);
  const auto n_records = plan.record_node.size();
  std::vector<double> checkpoints(plan.checkpoint_node.size());
  std::vector<double> mdd(plan.horizons.size());
  std::vector<double> flat(n_records * static_cast<std::size_t>(n_keep));
  for (std::int64_t p = 0; p < n_keep; ++p) {
    run_path(plan, spec.initial_wealth(), config.seed, p, n_keep, checkpoints.data(),
             mdd.data(), flat.data());
  }
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n_keep));
  for (std::int64_t p = 0; p < n_keep; ++p) {
    auto& path = out[static_cast<std::size_t>(p)];
    path.resize(n_records);
    for (std::size_t r = 0; r < n_records; ++r) {
      path[r] = flat[r * static_cast<std::size_t>(n_keep) + static_cast<std::size_t>(p)];
    }
  }
  return out;
}

SweepTable mdd_sweep(const ProblemSpec& spec, std::span<const double> theta_grid,
                     const SimulationConfig& config) {
  if (spec.segment_count() != 2) {
    throw std::invalid_argument("drawdown sweep requires exactly two checkpoints");
  }
  const double r0 = spec.market().rate(0.0);
  const double y = spec.initial_wealth();

  SweepTable table;
  table.horizons = config.mdd_horizons;
  if (table.horizons.empty()) {
    table.horizons = {spec.checkpoints()[1], spec.checkpoints()[2]};
  }

  for (double theta : theta_grid) {
    SweepRow row;
    row.theta = theta;
    row.target_1 = y * std::exp(theta * r0);
    row.target_2 = y * std::exp(5.0 * r0);
    const ProblemSpec problem(spec.market(),
                              {spec.checkpoints().begin(), spec.checkpoints().end()}, y,
                              {row.target_1, row.target_2});
    row.feasible = check_feasibility(problem).ok();
    if (!row.feasible) {
      ++table.skipped;
      table.rows.push_back(std::move(row));
      continue;
    }
    const MultiplierSolution sol = solve_multipliers(problem);
    const FeedbackPolicy policy = FeedbackPolicy::optimal(sol.chain, problem);
    SimulationConfig run = config;
    run.collect_quantiles = false;
    run.mdd_horizons = table.horizons;
    const SimulationReport rep = simulate(policy, problem, run);
    row.mdd = rep.mdd;
    row.checkpoints = rep.checkpoints;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mtmv
