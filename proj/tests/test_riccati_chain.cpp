#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mtmv/parameter_solver.hpp"
#include "mtmv/riccati_chain.hpp"
#include "test_support.hpp"

using namespace mtmv;
using namespace mtmv::testing;

namespace {

MultiplierSet reference_multipliers() {
  return MultiplierSet::from_mu_lambda({kMu1, kMu2}, {kLambda1, kLambda2});
}

}  // namespace

TEST_CASE("multiplier set checks its invariants") {
  CHECK_THROWS_AS(MultiplierSet::from_mu_lambda({-1.0}, {2.0}), std::invalid_argument);
  MultiplierSet broken = MultiplierSet::from_mu_lambda({2.0}, {3.0});
  broken.rho[0] = 1.49;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  MultiplierSet ok = reference_multipliers();
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("single segment chain has sentinel terminal data") {
  const ProblemSpec spec = classical_problem();
  const double mu = 2.5;
  const double lambda = 1.0 + mu * kTarget2;
  const RiccatiChain chain =
      solve_chain(spec, MultiplierSet::from_mu_lambda({mu}, {lambda}));

  const RiccatiSegment& seg = chain.segment(0);
  CHECK(seg.g_end == 0.0);
  CHECK(seg.p_end == doctest::Approx(mu).epsilon(1e-15));
  // P_1(t) = mu e^{int_t^T (2r - beta)}.
  const double expected = mu * std::exp((2 * kRate - kBeta) * 1.25);
  CHECK(chain.p(0, 0.75) == doctest::Approx(expected).epsilon(1e-14));
  // ratio(t) = rho (1 - e^{-int_t^T r}).
  const double rho = lambda / mu;
  CHECK(chain.ratio(0, 0.75) ==
        doctest::Approx(rho * (1.0 - std::exp(-kRate * 1.25))).epsilon(1e-14));
}

TEST_CASE("two-segment chain reproduces the reference terminal values") {
  const ProblemSpec spec = reference_problem();
  const RiccatiChain chain = solve_chain(spec, reference_multipliers());

  CHECK(rel_diff(chain.segment(1).p_start, kP2AtT1) < 1e-13);
  CHECK(chain.p(1, 1.0) == doctest::Approx(kP2AtT1).epsilon(1e-13));

  // Terminal ratio identity at t_1:
  // rho_1 - g_1(t_1)/P_1(t_1) = (lambda_1 + lambda_2 e^{int (r-beta)}) /
  //                             (mu_1 + mu_2 e^{int (2r-beta)}).
  const double expected = (kLambda1 + kLambda2 * std::exp(kRate - kBeta)) /
                          (kMu1 + kMu2 * std::exp(2 * kRate - kBeta));
  CHECK(rel_diff(chain.segment(0).offset, expected) < 1e-13);
}

TEST_CASE("jump boundary conditions hold exactly as stored") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = random_feasible_instance(rng);
    const MultiplierSolution sol = solve_multipliers(inst.problem);
    const auto& segs = sol.chain.segments();
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      const double p_next = segs[i + 1].p_start;
      const double g_next = segs[i + 1].g_start;
      CHECK(segs[i].p_end == sol.multipliers.mu[i] + p_next);
      CHECK(segs[i].g_end ==
            g_next + p_next * (sol.multipliers.rho[i] - sol.multipliers.rho[i + 1]));
    }
    CHECK(segs.back().p_end == sol.multipliers.mu.back());
    CHECK(segs.back().g_end == 0.0);
  }
}

TEST_CASE("P stays positive along every segment") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = random_feasible_instance(rng);
    const MultiplierSolution sol = solve_multipliers(inst.problem);
    for (int i = 0; i < sol.chain.segment_count(); ++i) {
      const auto& seg = sol.chain.segment(i);
      for (int k = 0; k <= 10; ++k) {
        const double t = seg.t_lo + (seg.t_hi - seg.t_lo) * k / 10.0;
        CHECK(sol.chain.p(i, t) > 0.0);
      }
    }
  }
}

TEST_CASE("ratio formula equals the g/P quotient") {
  const ProblemSpec spec = reference_problem();
  const RiccatiChain chain = solve_chain(spec, reference_multipliers());
  for (int i = 0; i < 2; ++i) {
    const auto& seg = chain.segment(i);
    for (int k = 0; k <= 20; ++k) {
      const double t = seg.t_lo + (seg.t_hi - seg.t_lo) * k / 20.0;
      CHECK(rel_diff(chain.ratio(i, t), chain.g(i, t) / chain.p(i, t)) < 1e-12);
    }
    CHECK(chain.ratio(i, seg.t_hi) == doctest::Approx(seg.ratio_end).epsilon(1e-15));
  }
  CHECK_THROWS_AS((void)chain.ratio(0, 1.5), std::domain_error);
  CHECK_THROWS_AS((void)chain.ratio(1, 0.5), std::domain_error);
}

TEST_CASE("scaling all multipliers leaves ratios invariant and scales P, g") {
  const ProblemSpec spec = reference_problem();
  const MultiplierSet base = reference_multipliers();
  const double c = 3.7;
  const MultiplierSet scaled =
      MultiplierSet::from_mu_lambda({c * kMu1, c * kMu2}, {c * kLambda1, c * kLambda2});
  const RiccatiChain chain_a = solve_chain(spec, base);
  const RiccatiChain chain_b = solve_chain(spec, scaled);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k <= 10; ++k) {
      const auto& seg = chain_a.segment(i);
      const double t = seg.t_lo + (seg.t_hi - seg.t_lo) * k / 10.0;
      CHECK(rel_diff(chain_b.p(i, t), c * chain_a.p(i, t)) < 1e-13);
      CHECK(rel_diff(chain_b.g(i, t), c * chain_a.g(i, t)) < 1e-13);
      CHECK(rel_diff(chain_b.ratio(i, t), chain_a.ratio(i, t)) < 1e-13);
    }
  }
}

TEST_CASE("closed forms agree with a one-step integrator") {
  SUBCASE("reference coefficients, step 1e-4") {
    const ProblemSpec spec = reference_problem();
    const MultiplierSet mult = reference_multipliers();
    const RiccatiChain chain = solve_chain(spec, mult);
    const auto report = verify_against_ode(chain, spec, mult, 1e-4);
    CHECK(report.max_deviation() < 1e-10);
  }

  SUBCASE("fourth-order convergence on a stiff instance") {
    // Large beta - 2r so truncation dominates roundoff at these steps.
    const MarketModel market = MarketModel::constant(2.0, 0.3, 0.8, 0.25);  // beta = 4
    const ProblemSpec spec(market, {0.0, 1.0, 2.0}, 1.0, {1.40, 1.95});
    const MultiplierSet mult = MultiplierSet::from_mu_lambda({1.3, 0.9}, {1.56, 0.72});
    const RiccatiChain chain = solve_chain(spec, mult);
    const double dev_h = verify_against_ode(chain, spec, mult, 0.02).max_deviation();
    const double dev_h2 = verify_against_ode(chain, spec, mult, 0.01).max_deviation();
    const double ratio = dev_h / dev_h2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
  }

  SUBCASE("single-segment P matches to roundoff") {
    const ProblemSpec spec = classical_problem();
    const MultiplierSet mult = MultiplierSet::from_mu_lambda({2.0}, {1.0 + 2.0 * kTarget2});
    const RiccatiChain chain = solve_chain(spec, mult);
    const auto report = verify_against_ode(chain, spec, mult, 1e-3);
    CHECK(report.max_dev_p < 1e-12);
  }

  SUBCASE("piecewise coefficients: integrator splits at breakpoints") {
    Eigen::VectorXd b(1);
    b << 0.12;
    Eigen::MatrixXd s(1, 1);
    s << 0.2;
    const MarketModel market(2.0, PiecewiseConstant<double>({0.0, 0.7}, {0.03, 0.05}),
                             PiecewiseConstant<Eigen::VectorXd>::constant(b),
                             PiecewiseConstant<Eigen::MatrixXd>::constant(s));
    const ProblemSpec spec(market, {0.0, 1.0, 2.0}, 1.0, {1.06, 1.13});
    const MultiplierSolution sol = solve_multipliers(spec);
    const auto report = verify_against_ode(sol.chain, spec, sol.multipliers, 1e-4);
    CHECK(report.max_deviation() < 1e-10);
  }
}
