#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mtmv/parameter_solver.hpp"
#include "mtmv/strategy.hpp"
#include "test_support.hpp"

using namespace mtmv;
using namespace mtmv::testing;

TEST_CASE("reference two-checkpoint multipliers") {
  const MultiplierSolution sol = solve_multipliers(reference_problem());
  CHECK(rel_diff(sol.multipliers.mu[1], kMu2) < 1e-12);
  CHECK(rel_diff(sol.multipliers.lambda[1], kLambda2) < 1e-12);
  CHECK(rel_diff(sol.multipliers.mu[0], kMu1) < 1e-12);
  CHECK(rel_diff(sol.multipliers.lambda[0], kLambda1) < 1e-12);
  CHECK(rel_diff(sol.multipliers.rho[0], kRho1) < 1e-12);
  CHECK(rel_diff(sol.multipliers.rho[1], kRho2) < 1e-12);
  CHECK(sol.feasibility.ok());
}

TEST_CASE("single checkpoint reduces to the explicit classical formulas") {
  const MultiplierSolution sol = solve_multipliers(classical_problem());
  // mu = (e^{int beta} - 1) / (L - y e^{int r}), lambda = 1 + mu L.
  const double mu_ref = std::expm1(2 * kBeta) / (kTarget2 - std::exp(2 * kRate));
  CHECK(rel_diff(sol.multipliers.mu[0], mu_ref) < 1e-13);
  CHECK(rel_diff(sol.multipliers.lambda[0], 1.0 + mu_ref * kTarget2) < 1e-13);
  CHECK(rel_diff(sol.multipliers.mu[0], kClassicalMu) < 1e-12);
  CHECK(rel_diff(sol.multipliers.lambda[0], kClassicalLambda) < 1e-12);
}

TEST_CASE("consistency lambda_i = 1 + mu_i L_i") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_feasible_instance(rng);
    const MultiplierSolution sol = solve_multipliers(inst.problem);
    for (int i = 0; i < inst.problem.segment_count(); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double expected = 1.0 + sol.multipliers.mu[idx] * inst.problem.targets()[idx];
      CHECK(rel_diff(sol.multipliers.lambda[idx], expected) < 1e-10);
    }
  }
}

TEST_CASE("round trip: propagated checkpoint means reproduce the targets") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_feasible_instance(rng);
    const MultiplierSolution sol = solve_multipliers(inst.problem);
    const PolicyReport report = propagate_moments(
        sol.chain, sol.multipliers, inst.problem, inst.problem.market().horizon());
    for (int i = 0; i < inst.problem.segment_count(); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      CHECK(rel_diff(report.model.checkpoint_means[idx], inst.problem.targets()[idx]) <
            1e-10);
    }
  }
}

TEST_CASE("target equal to riskless growth is infeasible") {
  const double l1 = std::exp(kRate);  // exactly y e^{int r} on [0, 1]
  const ProblemSpec spec(reference_market(), {0.0, 1.0, 2.0}, 1.0, {l1, kTarget2});
  CHECK_THROWS_AS((void)solve_multipliers(spec), InfeasibleTargetsError);
  try {
    (void)solve_multipliers(spec);
  } catch (const InfeasibleTargetsError& e) {
    CHECK(e.index() == 1);
    CHECK(e.inequality().find("e^{int r}") != std::string::npos);
  }
}

TEST_CASE("decreasing targets flag every growth inequality") {
  const ProblemSpec spec(reference_market(), {0.0, 1.0, 2.0}, 1.0, {0.9, 0.8});
  const FeasibilityReport report = check_feasibility(spec);
  CHECK(!report.ok());
  CHECK(!report.growth_ok[0]);
  CHECK(!report.growth_ok[1]);
}

TEST_CASE("second target inequality controls the first variance weight") {
  // L_1 = 1.14 violates (L_2 - L_1 e^r) e^beta > (L_1 - e^r) e^r strongly
  // enough that mu_1 comes out nonpositive (the recursion inequality fails
  // at L_1 above about 1.13331 for this L_2).
  const ProblemSpec spec(reference_market(), {0.0, 1.0, 2.0}, 1.0, {1.14, kTarget2});
  const FeasibilityReport report = check_feasibility(spec);
  CHECK(!report.ok());
  CHECK(report.growth_ok[0]);
  CHECK(report.growth_ok[1]);
  CHECK(!report.convexity_ok[0]);
  CHECK(!report.resulting_mu_positive[0]);
  CHECK_THROWS_AS((void)solve_multipliers(spec), InfeasibleTargetsError);

  // The recursion inequality is weaker than the comparison window: targets
  // just above the classical intermediate mean still admit a positive
  // weight and therefore a solution.
  const ProblemSpec inside(reference_market(), {0.0, 1.0, 2.0}, 1.0,
                           {kWindowHi + 1e-4, kTarget2});
  CHECK(check_feasibility(inside).ok());
  CHECK(solve_multipliers(inside).multipliers.mu[0] > 0.0);

  // Reference targets satisfy everything.
  CHECK(check_feasibility(reference_problem()).ok());
}

TEST_CASE("closed form matches the recursion on random two-checkpoint draws") {
  std::mt19937_64 rng(31);
  int done = 0;
  while (done < 1000) {
    const auto inst = random_feasible_instance(rng, 2);
    if (inst.problem.segment_count() != 2) continue;
    ++done;
    const MultiplierSolution sol = solve_multipliers(inst.problem);
    const MultiplierSet closed = solve_n2_closed_form(inst.problem);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(rel_diff(closed.mu[i], sol.multipliers.mu[i]) < 1e-10);
      CHECK(rel_diff(closed.lambda[i], sol.multipliers.lambda[i]) < 1e-10);
    }
  }
}

TEST_CASE("closed form agrees on piecewise-coefficient markets too") {
  Eigen::VectorXd b(1);
  b << 0.11;
  Eigen::MatrixXd s(1, 1);
  s << 0.25;
  const MarketModel market(2.0, PiecewiseConstant<double>({0.0, 0.4, 1.3}, {0.03, 0.05, 0.04}),
                           PiecewiseConstant<Eigen::VectorXd>::constant(b),
                           PiecewiseConstant<Eigen::MatrixXd>::constant(s));
  const ProblemSpec spec(market, {0.0, 0.9, 2.0}, 1.0, {1.05, 1.11});
  const MultiplierSolution sol = solve_multipliers(spec);
  const MultiplierSet closed = solve_n2_closed_form(spec);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(rel_diff(closed.mu[i], sol.multipliers.mu[i]) < 1e-10);
    CHECK(rel_diff(closed.lambda[i], sol.multipliers.lambda[i]) < 1e-10);
  }
}

TEST_CASE("raising the terminal target lowers the terminal weight") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_feasible_instance(rng);
    const int n = inst.problem.segment_count();
    std::vector<double> bumped(inst.problem.targets().begin(),
                               inst.problem.targets().end());
    bumped[static_cast<std::size_t>(n - 1)] *= 1.01;
    const ProblemSpec spec2(inst.problem.market(),
                            {inst.problem.checkpoints().begin(),
                             inst.problem.checkpoints().end()},
                            inst.problem.initial_wealth(), bumped);
    if (!check_feasibility(spec2).ok()) continue;
    const MultiplierSolution a = solve_multipliers(inst.problem);
    const MultiplierSolution b2 = solve_multipliers(spec2);
    CHECK(b2.multipliers.mu[static_cast<std::size_t>(n - 1)] <
          a.multipliers.mu[static_cast<std::size_t>(n - 1)]);
  }
}

TEST_CASE("solver output feeds a consistent standalone chain") {
  const ProblemSpec spec = reference_problem();
  const MultiplierSolution sol = solve_multipliers(spec);
  const RiccatiChain rebuilt = solve_chain(spec, sol.multipliers);
  for (int i = 0; i < 2; ++i) {
    CHECK(rel_diff(rebuilt.segment(i).p_end, sol.chain.segment(i).p_end) < 1e-14);
    CHECK(rel_diff(rebuilt.segment(i).g_end, sol.chain.segment(i).g_end) < 1e-14);
    CHECK(rel_diff(rebuilt.segment(i).offset, sol.chain.segment(i).offset) < 1e-14);
  }
}
