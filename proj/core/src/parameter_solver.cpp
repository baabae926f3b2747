#include "mtmv/parameter_solver.hpp"

#include <cmath>
#include <sstream>

namespace mtmv {

bool FeasibilityReport::ok() const {
  auto all = [](const std::vector<bool>& v) {
    for (bool b : v)
      if (!b) return false;
    return true;
  };
  return all(growth_ok) && all(convexity_ok) && all(resulting_mu_positive);
}

std::string FeasibilityReport::to_string() const {
  std::ostringstream os;
  auto row = [&os](const char* name, const std::vector<bool>& v, int base) {
    os << name << ":";
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << " " << (i + static_cast<std::size_t>(base)) << (v[i] ? "=ok" : "=FAIL");
    }
    os << "\n";
  };
  row("target growth over riskless", growth_ok, 1);
  row("recursion convexity", convexity_ok, 1);
  row("variance weight positive", resulting_mu_positive, 1);
  return os.str();
}

InfeasibleTargetsError::InfeasibleTargetsError(int index, std::string inequality,
                                               FeasibilityReport report)
    : std::runtime_error("infeasible mean targets at checkpoint " + std::to_string(index) +
                         ": " + inequality),
      index_(index),
      inequality_(std::move(inequality)),
      report_(std::move(report)) {}

namespace {

struct SegmentFactors {
  double ir;   // int r over the segment
  double ib;   // int beta
  double er;   // e^{int r}
  double eb;   // e^{int beta}
  double erb;  // e^{int (r - beta)}
  double e2rb; // e^{int (2r - beta)}
};

SegmentFactors factors(const MarketModel& market, double lo, double hi) {
  SegmentFactors f;
  f.ir = market.integral_rate(lo, hi);
  f.ib = market.integral_beta(lo, hi);
  f.er = std::exp(f.ir);
  f.eb = std::exp(f.ib);
  f.erb = std::exp(f.ir - f.ib);
  f.e2rb = std::exp(2.0 * f.ir - f.ib);
  return f;
}

/// Shared backward pass. With `throwing`, the first violated inequality
/// raises; otherwise the pass records flags and keeps going with a
/// placeholder weight so later flags can still be evaluated.
MultiplierSolution run_recursion(const ProblemSpec& spec, bool throwing) {
  const MarketModel& market = spec.market();
  const int n = spec.segment_count();
  const auto un = static_cast<std::size_t>(n);

  FeasibilityReport feas;
  feas.growth_ok.assign(un, true);
  feas.convexity_ok.assign(un > 0 ? un - 1 : 0, true);
  feas.resulting_mu_positive.assign(un, true);

  std::vector<double> mu(un), lambda(un);
  std::vector<RiccatiSegment> segments(un);

  double p_next = 0.0;   // P_{i+1}(t_i)
  double g_next = 0.0;   // g_{i+1}(t_i)
  double rho_next = 0.0; // rho_{i+1}

  for (int i = n - 1; i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    const double t_lo = spec.segment_start(i);
    const double t_hi = spec.segment_end(i);
    const SegmentFactors f = factors(market, t_lo, t_hi);

    const double l_prev = (i == 0) ? spec.initial_wealth() : spec.targets()[idx - 1];
    const double l_cur = spec.targets()[idx];

    // First inequality: the target must beat pure riskless growth, with a
    // guard against a vanishing denominator.
    const double denom = l_cur - l_prev * f.er;
    const bool growth = denom > 1e-12 * std::max(1.0, std::abs(l_cur));
    feas.growth_ok[idx] = growth;
    if (!growth && throwing) {
      std::ostringstream os;
      os << "L_" << (i + 1) << " - L_" << i << " e^{int r} = " << denom << " is not positive";
      throw InfeasibleTargetsError(i + 1, os.str(), feas);
    }

    // mu_i numerator; for i = N the bracket is 1 and the subtracted term 0.
    const double bracket = 1.0 + p_next * rho_next - g_next;
    const double excess = l_cur - l_prev * f.erb;
    const double numerator = bracket * std::expm1(f.ib) - excess * p_next * f.eb;
    if (i < n - 1) {
      feas.convexity_ok[idx] = numerator > 0.0;
      if (!(numerator > 0.0) && throwing) {
        std::ostringstream os;
        os << "[1 + P rho - g](1 - e^{-int beta}) <= [L_" << (i + 1) << " - L_" << i
           << " e^{int (r - beta)}] P at t_" << (i + 1);
        throw InfeasibleTargetsError(i + 1, os.str(), feas);
      }
    }

    double mu_i = growth ? numerator / denom : 1.0;
    feas.resulting_mu_positive[idx] = growth && mu_i > 0.0;
    if (!(mu_i > 0.0)) {
      if (throwing) {
        throw InfeasibleTargetsError(i + 1, "variance weight mu_" + std::to_string(i + 1) +
                                                " is not positive",
                                     feas);
      }
      mu_i = 1.0;  // placeholder so the dry run can finish the pass
    }

    // lambda_i: terminal step uses the explicit form, earlier steps the
    // resolved implicit equation.
    double lambda_i;
    if (i == n - 1) {
      lambda_i = f.eb + mu_i * l_prev * f.er;
    } else {
      const double dm = p_next + mu_i / f.eb;
      lambda_i = (p_next + mu_i) / dm +
                 mu_i * ((p_next * rho_next - g_next) * (-std::expm1(-f.ib)) / dm +
                         (p_next + mu_i) * l_prev * f.erb / dm);
    }
    const double rho_i = lambda_i / mu_i;

    mu[idx] = mu_i;
    lambda[idx] = lambda_i;
    segments[idx] = solve_segment(market, t_lo, t_hi, mu_i, rho_i, p_next, g_next, rho_next);
    p_next = segments[idx].p_start;
    g_next = segments[idx].g_start;
    rho_next = rho_i;
  }

  MultiplierSet mult = MultiplierSet::from_mu_lambda(std::move(mu), std::move(lambda));
  return MultiplierSolution{std::move(mult),
                            RiccatiChain(spec.market(), std::move(segments)),
                            std::move(feas)};
}

}  // namespace

MultiplierSolution solve_multipliers(const ProblemSpec& spec) {
  return run_recursion(spec, /*throwing=*/true);
}

FeasibilityReport check_feasibility(const ProblemSpec& spec) {
  return run_recursion(spec, /*throwing=*/false).feasibility;
}

MultiplierSet solve_n2_closed_form(const ProblemSpec& spec) {
  if (spec.segment_count() != 2) {
    throw std::invalid_argument("closed form requires exactly two checkpoints");
  }
  const MarketModel& market = spec.market();
  const double y = spec.initial_wealth();
  const double l1 = spec.targets()[0];
  const double l2 = spec.targets()[1];

  const SegmentFactors f1 = factors(market, spec.segment_start(0), spec.segment_end(0));
  const SegmentFactors f2 = factors(market, spec.segment_start(1), spec.segment_end(1));

  FeasibilityReport feas;
  feas.growth_ok = {l1 - y * f1.er > 1e-12 * std::max(1.0, std::abs(l1)),
                    l2 - l1 * f2.er > 1e-12 * std::max(1.0, std::abs(l2))};
  feas.convexity_ok = {true};
  feas.resulting_mu_positive = {true, true};
  if (!feas.growth_ok[1]) {
    throw InfeasibleTargetsError(2, "L_2 - L_1 e^{int r} is not positive", feas);
  }
  if (!feas.growth_ok[0]) {
    throw InfeasibleTargetsError(1, "L_1 - y e^{int r} is not positive", feas);
  }

  const double d2 = l2 - l1 * f2.er;
  const double mu2 = std::expm1(f2.ib) / d2;
  const double lambda2 = (l2 * f2.eb - l1 * f2.er) / d2;

  const double p2 = mu2 * f2.e2rb;  // P_2(t_1)
  const double mu1 =
      ((1.0 + lambda2 * f2.erb) * std::expm1(f1.ib) - (l1 - y * f1.erb) * p2 * f1.eb) /
      (l1 - y * f1.er);
  feas.convexity_ok[0] = mu1 > 0.0;
  feas.resulting_mu_positive[0] = mu1 > 0.0;
  if (!(mu1 > 0.0)) {
    throw InfeasibleTargetsError(
        1, "variance weight mu_1 is not positive (second target inequality)", feas);
  }

  const double dm = p2 + mu1 / f1.eb;
  const double lambda1 = (p2 + mu1 + mu1 * lambda2 * f2.erb * (-std::expm1(-f1.ib)) +
                          mu1 * (p2 + mu1) * y * f1.erb) /
                         dm;

  return MultiplierSet::from_mu_lambda({mu1, mu2}, {lambda1, lambda2});
}

}  // namespace mtmv
