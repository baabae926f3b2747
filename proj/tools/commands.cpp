#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "mtmv/config.hpp"
#include "mtmv/csv.hpp"
#include "mtmv/json_io.hpp"
#include "mtmv/parameter_solver.hpp"
#include "mtmv/simulator.hpp"
#include "mtmv/strategy.hpp"
#include "mtmv/svg.hpp"

namespace mtmv::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEnvironment = 1;
constexpr int kExitInfeasible = 2;

ExperimentConfig load_with_overrides(const Options& options) {
  ExperimentConfig config = load_experiment_config(options.config_file);
  if (options.seed) config.simulation.seed = *options.seed;
  if (options.paths) config.simulation.n_paths = *options.paths;
  if (options.step) {
    config.simulation.step = *options.step;
    config.simulation.record_grid =
        make_record_grid(config.problem.market().horizon(),
                         std::max(config.record_step, *options.step));
  }
  if (options.formats) config.outputs.formats = *options.formats;
  if (options.no_timestamp) config.outputs.timestamp = false;
  if (options.output_dir) {
    config.outputs.dir = *options.output_dir;
  } else if (config.outputs.dir == ".") {
    if (const char* env = std::getenv("MTMV_OUTPUT_DIR"); env != nullptr && *env != '\0') {
      config.outputs.dir = env;
    }
  }
  return config;
}

std::filesystem::path prepare_output_dir(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.outputs.dir);
  return config.outputs.dir;
}

void note_written(const std::filesystem::path& file) {
  std::cout << "wrote " << file.string() << "\n";
}

void write_policy_csv(const PolicyReport& report, const ExperimentConfig& config,
                      const std::filesystem::path& file) {
  std::vector<std::string> columns{"t", "mean", "second_moment", "variance"};
  const bool with_baseline = report.classical_baseline.has_value();
  if (with_baseline) {
    columns.insert(columns.end(),
                   {"baseline_mean", "baseline_second_moment", "baseline_variance"});
  }
  CsvWriter csv(columns, config.outputs.timestamp);
  const MomentPaths& m = report.model;
  for (std::size_t i = 0; i < m.time.size(); ++i) {
    std::vector<double> row{m.time[i], m.mean[i], m.second_moment[i], m.variance[i]};
    if (with_baseline) {
      const MomentPaths& b = *report.classical_baseline;
      row.insert(row.end(), {b.mean[i], b.second_moment[i], b.variance[i]});
    }
    csv.add_row(row);
  }
  csv.write(file);
  note_written(file);
}

int environment_failure(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitEnvironment;
}

int infeasible_failure(const InfeasibleTargetsError& e) {
  std::cerr << "error: " << e.what() << "\n";
  std::cout << to_json(e.report());
  return kExitInfeasible;
}

}  // namespace

int run_solve(const Options& options) {
  try {
    const ExperimentConfig config = load_with_overrides(options);
    const auto out = prepare_output_dir(config);

    const MultiplierSolution solution = solve_multipliers(config.problem);
    PolicyReport report = propagate_moments(solution.chain, solution.multipliers,
                                            config.problem, config.record_step);
    report.classical_baseline = classical_baseline(config.problem, config.record_step);

    if (config.outputs.wants("json")) {
      const auto file = out / "multipliers.json";
      std::ofstream(file) << to_json(solution, config.problem);
      note_written(file);
      const auto policy_file = out / "policy.json";
      std::ofstream(policy_file) << to_json(report);
      note_written(policy_file);
    }
    if (config.outputs.wants("csv")) {
      write_policy_csv(report, config, out / "policy.csv");
    }
    std::cout << "multipliers solved for " << config.problem.segment_count()
              << " checkpoints\n";
    return kExitOk;
  } catch (const InfeasibleTargetsError& e) {
    return infeasible_failure(e);
  } catch (const std::exception& e) {
    return environment_failure(e);
  }
}

int run_compare(const Options& options) {
  try {
    const ExperimentConfig config = load_with_overrides(options);
    if (config.problem.segment_count() != 2) {
      std::cerr << "error: compare requires a two-checkpoint problem\n";
      return kExitInfeasible;
    }
    const auto out = prepare_output_dir(config);

    const ComparisonReport comparison = compare_models(config.problem);
    const PolicyReport report = solve_policy_report(config.problem, config.record_step);
    const MomentPaths& multi = report.model;
    const MomentPaths& classical = *report.classical_baseline;

    if (config.outputs.wants("json")) {
      const auto file = out / "corollary.json";
      std::ofstream(file) << to_json(comparison);
      note_written(file);
    }

    if (config.outputs.wants("csv") && config.outputs.figure_enabled("mean_paths")) {
      CsvWriter csv({"t", "mean_multi", "mean_classical"}, config.outputs.timestamp);
      for (std::size_t i = 0; i < multi.time.size(); ++i) {
        csv.add_row({multi.time[i], multi.mean[i], classical.mean[i]});
      }
      csv.write(out / "figure1.csv");
      note_written(out / "figure1.csv");
    }
    if (config.outputs.wants("svg") && config.outputs.figure_enabled("mean_paths")) {
      SvgChart chart("Checkpoint-constrained vs classical mean wealth", "t", "mean");
      chart.add_line("two-checkpoint model", multi.time, multi.mean);
      chart.add_line("classical model", classical.time, classical.mean);
      chart.write(out / "figure1.svg");
      note_written(out / "figure1.svg");
    }

    if (config.outputs.figure_enabled("fan")) {
      const MultiplierSolution solution = solve_multipliers(config.problem);
      const FeedbackPolicy policy = FeedbackPolicy::optimal(solution.chain, config.problem);
      const ProblemSpec reduced(config.problem.market(),
                                {0.0, config.problem.market().horizon()},
                                config.problem.initial_wealth(),
                                {config.problem.targets().back()});
      const MultiplierSolution classical_solution = solve_multipliers(reduced);
      const FeedbackPolicy classical_policy =
          FeedbackPolicy::optimal(classical_solution.chain, reduced);

      SimulationConfig sim = config.simulation;
      sim.collect_quantiles = true;
      const SimulationReport fan_multi = simulate(policy, config.problem, sim);
      const SimulationReport fan_classical = simulate(classical_policy, reduced, sim);

      if (config.outputs.wants("csv")) {
        CsvWriter csv({"t", "multi_q05", "multi_q25", "multi_q50", "multi_q75", "multi_q95",
                       "classical_q05", "classical_q25", "classical_q50", "classical_q75",
                       "classical_q95"},
                      config.outputs.timestamp);
        for (std::size_t i = 0; i < fan_multi.quantile_fan.size(); ++i) {
          const auto& a = fan_multi.quantile_fan[i];
          const auto& b = fan_classical.quantile_fan[i];
          csv.add_row({a.time, a.q05, a.q25, a.q50, a.q75, a.q95, b.q05, b.q25, b.q50,
                       b.q75, b.q95});
        }
        csv.write(out / "figure2.csv");
        note_written(out / "figure2.csv");
      }
      if (config.outputs.wants("svg")) {
        SvgChart chart("Pathwise wealth quantiles (5%-95%)", "t", "wealth");
        std::vector<double> ts, alo, ahi, amid, blo, bhi, bmid;
        for (const auto& q : fan_multi.quantile_fan) {
          ts.push_back(q.time);
          alo.push_back(q.q05);
          ahi.push_back(q.q95);
          amid.push_back(q.q50);
        }
        for (const auto& q : fan_classical.quantile_fan) {
          blo.push_back(q.q05);
          bhi.push_back(q.q95);
          bmid.push_back(q.q50);
        }
        chart.add_band("two-checkpoint model", ts, alo, ahi);
        chart.add_band("classical model", ts, blo, bhi);
        chart.add_line("two-checkpoint median", ts, amid);
        chart.add_line("classical median", ts, bmid);
        chart.write(out / "figure2.svg");
        note_written(out / "figure2.svg");
      }
    }

    std::cout << "Var comparison: multi=(" << comparison.var_multi_1 << ", "
              << comparison.var_multi_2 << ") classical=(" << comparison.var_classical_1
              << ", " << comparison.var_classical_2 << ")\n";
    std::cout << "sum dominance: " << (comparison.sum_dominance ? "yes" : "no")
              << " (window [" << comparison.window_lo << ", " << comparison.window_hi
              << "))\n";
    return kExitOk;
  } catch (const InfeasibleTargetsError& e) {
    return infeasible_failure(e);
  } catch (const std::exception& e) {
    return environment_failure(e);
  }
}

int run_sweep(const Options& options, const SweepOptions& sweep) {
  try {
    const ExperimentConfig config = load_with_overrides(options);
    if (config.problem.segment_count() != 2) {
      std::cerr << "error: sweep requires a two-checkpoint problem\n";
      return kExitInfeasible;
    }
    if (!(sweep.theta_step > 0.0) || sweep.theta_max < sweep.theta_min) {
      std::cerr << "error: invalid theta range\n";
      return kExitEnvironment;
    }
    const auto out = prepare_output_dir(config);

    std::vector<double> thetas;
    for (double t = sweep.theta_min; t <= sweep.theta_max + 1e-12; t += sweep.theta_step) {
      thetas.push_back(t);
    }
    const SweepTable table = mdd_sweep(config.problem, thetas, config.simulation);
    if (table.skipped == static_cast<std::int64_t>(table.rows.size())) {
      std::cerr << "error: every theta in the range is infeasible\n";
      return kExitInfeasible;
    }

    // Smoothed columns are computed over the feasible rows only.
    std::vector<double> f_theta, f_mdd1, f_mdd2;
    for (const auto& row : table.rows) {
      if (!row.feasible) continue;
      f_theta.push_back(row.theta);
      f_mdd1.push_back(row.mdd[0].mean);
      f_mdd2.push_back(row.mdd[1].mean);
    }
    const std::vector<double> s_mdd1 = moving_average(f_mdd1, 5);
    const std::vector<double> s_mdd2 = moving_average(f_mdd2, 5);

    if (config.outputs.wants("csv")) {
      CsvWriter csv({"theta", "target_1", "feasible", "mdd_h1_mean", "mdd_h1_se",
                     "mdd_h2_mean", "mdd_h2_se", "mdd_h1_smooth", "mdd_h2_smooth"},
                    config.outputs.timestamp);
      std::size_t f = 0;
      const double nan = std::nan("");
      for (const auto& row : table.rows) {
        if (row.feasible) {
          csv.add_row({row.theta, row.target_1, 1.0, row.mdd[0].mean, row.mdd[0].se,
                       row.mdd[1].mean, row.mdd[1].se, s_mdd1[f], s_mdd2[f]});
          ++f;
        } else {
          csv.add_row({row.theta, row.target_1, 0.0, nan, nan, nan, nan, nan, nan});
        }
      }
      csv.write(out / "figure3.csv");
      note_written(out / "figure3.csv");
    }
    if (config.outputs.wants("json")) {
      const auto file = out / "sweep.json";
      std::ofstream(file) << to_json(table);
      note_written(file);
    }
    if (config.outputs.wants("svg")) {
      SvgChart chart("Average maximum drawdown vs theta", "theta", "E[MD]");
      chart.add_line("E[MD] to t_1", f_theta, f_mdd1);
      chart.add_line("E[MD] to t_2", f_theta, f_mdd2);
      chart.add_line("E[MD] to t_1 (smoothed)", f_theta, s_mdd1);
      chart.add_line("E[MD] to t_2 (smoothed)", f_theta, s_mdd2);
      chart.write(out / "figure3.svg");
      note_written(out / "figure3.svg");
    }

    std::size_t argmin = 0;
    for (std::size_t i = 1; i < s_mdd2.size(); ++i) {
      if (s_mdd2[i] < s_mdd2[argmin]) argmin = i;
    }
    std::cout << "sweep rows: " << table.rows.size() << " (skipped " << table.skipped
              << "); smoothed E[MD^(t_2)] minimum at theta = " << f_theta[argmin] << "\n";
    return kExitOk;
  } catch (const InfeasibleTargetsError& e) {
    return infeasible_failure(e);
  } catch (const std::exception& e) {
    return environment_failure(e);
  }
}

int run_simulate(const Options& options, std::int64_t csv_row_cap) {
  try {
    const ExperimentConfig config = load_with_overrides(options);
    const auto out = prepare_output_dir(config);

    const MultiplierSolution solution = solve_multipliers(config.problem);
    const FeedbackPolicy policy = FeedbackPolicy::optimal(solution.chain, config.problem);
    SimulationConfig sim = config.simulation;
    sim.collect_quantiles = true;
    const SimulationReport report = simulate(policy, config.problem, sim);

    if (config.outputs.wants("json")) {
      const auto file = out / "simulation.json";
      std::ofstream(file) << to_json(report);
      note_written(file);
    }
    if (config.outputs.wants("csv") && csv_row_cap > 0) {
      const auto record_count = static_cast<std::int64_t>(sim.record_grid.size());
      const std::int64_t keep =
          std::min(config.simulation.n_paths, std::max<std::int64_t>(1, csv_row_cap / record_count));
      const auto samples = sample_record_paths(policy, config.problem, sim, keep);
      CsvWriter csv({"path_id", "t", "value"}, config.outputs.timestamp);
      for (std::int64_t p = 0; p < keep; ++p) {
        for (std::size_t r = 0; r < sim.record_grid.size(); ++r) {
          csv.add_row({static_cast<double>(p), sim.record_grid[r],
                       samples[static_cast<std::size_t>(p)][r]});
        }
      }
      csv.write(out / "paths.csv");
      note_written(out / "paths.csv");
    }

    for (const auto& c : report.checkpoints) {
      std::cout << "t=" << c.time << " mean=" << c.mean << " (se " << c.se_mean
                << ") variance=" << c.variance << " (se " << c.se_variance << ")\n";
    }
    for (const auto& m : report.mdd) {
      std::cout << "E[MD^" << m.horizon << "] = " << m.mean << " (se " << m.se << ")\n";
    }
    return kExitOk;
  } catch (const InfeasibleTargetsError& e) {
    return infeasible_failure(e);
  } catch (const std::exception& e) {
    return environment_failure(e);
  }
}

int run_verify(const Options& options) {
  try {
    const ExperimentConfig config = load_with_overrides(options);
    const ProblemSpec& problem = config.problem;
    bool all_ok = true;
    auto check = [&all_ok](const std::string& name, bool ok, double value,
                           double threshold) {
      std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << " (got " << value
                << ", limit " << threshold << ")\n";
      all_ok = all_ok && ok;
    };

    const MultiplierSolution solution = solve_multipliers(problem);

    const OdeDeviationReport ode =
        verify_against_ode(solution.chain, problem, solution.multipliers, 1e-4);
    check("riccati closed forms vs numerical integration", ode.max_deviation() < 1e-10,
          ode.max_deviation(), 1e-10);

    const PolicyReport report =
        propagate_moments(solution.chain, solution.multipliers, problem, config.record_step);
    double round_trip = 0.0;
    for (int i = 0; i < problem.segment_count(); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      round_trip = std::max(round_trip,
                            std::abs(report.model.checkpoint_means[idx] - problem.targets()[idx]) /
                                std::max(1.0, std::abs(problem.targets()[idx])));
    }
    check("round trip: propagated means reproduce targets", round_trip < 1e-10, round_trip,
          1e-10);

    // Terminal-only reduction against the explicit classical formulas.
    const MarketModel& market = problem.market();
    const ProblemSpec reduced(market, {0.0, market.horizon()}, problem.initial_wealth(),
                              {problem.targets().back()});
    const MultiplierSolution classical = solve_multipliers(reduced);
    const double ib = market.integral_beta(0.0, market.horizon());
    const double ir = market.integral_rate(0.0, market.horizon());
    const double mu_ref = std::expm1(ib) / (problem.targets().back() -
                                            problem.initial_wealth() * std::exp(ir));
    const double lambda_ref = 1.0 + mu_ref * problem.targets().back();
    const double n1_dev =
        std::max(std::abs(classical.multipliers.mu[0] - mu_ref) / mu_ref,
                 std::abs(classical.multipliers.lambda[0] - lambda_ref) / lambda_ref);
    check("terminal-only reduction matches classical formulas", n1_dev < 1e-12, n1_dev,
          1e-12);

    if (problem.segment_count() == 2) {
      const MultiplierSet closed = solve_n2_closed_form(problem);
      double dev = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        dev = std::max(dev, std::abs(closed.mu[i] - solution.multipliers.mu[i]) /
                                solution.multipliers.mu[i]);
        dev = std::max(dev, std::abs(closed.lambda[i] - solution.multipliers.lambda[i]) /
                                solution.multipliers.lambda[i]);
      }
      check("two-checkpoint closed form matches recursion", dev < 1e-10, dev, 1e-10);
    } else {
      std::cout << "[skip] two-checkpoint closed form (problem has "
                << problem.segment_count() << " checkpoints)\n";
    }

    return all_ok ? kExitOk : kExitInfeasible;
  } catch (const InfeasibleTargetsError& e) {
    return infeasible_failure(e);
  } catch (const std::exception& e) {
    return environment_failure(e);
  }
}

}  // namespace mtmv::cli
