#include "mtmv/riccati_chain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mtmv {

MultiplierSet MultiplierSet::from_mu_lambda(std::vector<double> mu,
                                            std::vector<double> lambda) {
  if (mu.size() != lambda.size() || mu.empty()) {
    throw std::invalid_argument("multipliers: mu and lambda must have equal, nonzero size");
  }
  MultiplierSet out;
  out.rho.reserve(mu.size() + 1);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0)) {
      throw std::invalid_argument("multipliers: mu[" + std::to_string(i + 1) +
                                  "] must be positive");
    }
    out.rho.push_back(lambda[i] / mu[i]);
  }
  out.rho.push_back(0.0);
  out.mu = std::move(mu);
  out.lambda = std::move(lambda);
  return out;
}

void MultiplierSet::validate() const {
  if (mu.size() != lambda.size() || rho.size() != mu.size() + 1) {
    throw std::invalid_argument("multipliers: inconsistent sizes");
  }
  if (rho.back() != 0.0) {
    throw std::invalid_argument("multipliers: sentinel rho must be 0");
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0)) {
      throw std::invalid_argument("multipliers: mu[" + std::to_string(i + 1) +
                                  "] must be positive");
    }
    const double scale = std::max({1.0, std::abs(lambda[i]), std::abs(rho[i] * mu[i])});
    if (std::abs(rho[i] * mu[i] - lambda[i]) > 1e-12 * scale) {
      throw std::invalid_argument("multipliers: rho[" + std::to_string(i + 1) +
                                  "] * mu != lambda");
    }
  }
}

RiccatiChain::RiccatiChain(MarketModel market, std::vector<RiccatiSegment> segments)
    : market_(std::move(market)), segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("riccati chain: no segments");
}

void RiccatiChain::check_segment_time(int i, double t) const {
  if (i < 0 || i >= segment_count()) {
    throw std::domain_error("riccati chain: segment index out of range");
  }
  const auto& s = segments_[static_cast<std::size_t>(i)];
  const double slack = 1e-9 * std::max(1.0, s.t_hi);
  if (t < s.t_lo - slack || t > s.t_hi + slack) {
    throw std::domain_error("riccati chain: time " + std::to_string(t) +
                            " outside segment [" + std::to_string(s.t_lo) + ", " +
                            std::to_string(s.t_hi) + "]");
  }
}

double RiccatiChain::p(int i, double t) const {
  check_segment_time(i, t);
  const auto& s = segments_[static_cast<std::size_t>(i)];
  const double a = 2.0 * market_.integral_rate(t, s.t_hi) - market_.integral_beta(t, s.t_hi);
  return s.p_end * std::exp(a);
}

double RiccatiChain::ratio(int i, double t) const {
  check_segment_time(i, t);
  const auto& s = segments_[static_cast<std::size_t>(i)];
  const double disc = std::exp(-market_.integral_rate(t, s.t_hi));
  return s.ratio_end * disc + s.rho * (1.0 - disc);
}

double RiccatiChain::g(int i, double t) const { return p(i, t) * ratio(i, t); }

RiccatiSegment solve_segment(const MarketModel& market, double t_lo, double t_hi,
                             double mu, double rho, double p_next, double g_next,
                             double rho_next) {
  RiccatiSegment seg;
  seg.t_lo = t_lo;
  seg.t_hi = t_hi;
  seg.rho = rho;
  seg.p_end = mu + p_next;
  seg.g_end = g_next + p_next * (rho - rho_next);
  seg.ratio_end = seg.g_end / seg.p_end;
  seg.offset = rho - seg.ratio_end;

  const double ir = market.integral_rate(t_lo, t_hi);
  const double ib = market.integral_beta(t_lo, t_hi);
  seg.p_start = seg.p_end * std::exp(2.0 * ir - ib);
  const double disc = std::exp(-ir);
  seg.g_start = seg.p_start * (seg.ratio_end * disc + rho * (1.0 - disc));
  return seg;
}

RiccatiChain solve_chain(const ProblemSpec& spec, const MultiplierSet& mult) {
  const int n = spec.segment_count();
  if (mult.count() != n) {
    throw std::invalid_argument("riccati chain: multiplier count does not match checkpoints");
  }
  mult.validate();

  std::vector<RiccatiSegment> segments(static_cast<std::size_t>(n));
  double p_next = 0.0;
  double g_next = 0.0;
  double rho_next = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    segments[idx] = solve_segment(spec.market(), spec.segment_start(i), spec.segment_end(i),
                                  mult.mu[idx], mult.rho[idx], p_next, g_next, rho_next);
    p_next = segments[idx].p_start;
    g_next = segments[idx].g_start;
    rho_next = mult.rho[idx];
  }
  return RiccatiChain(spec.market(), std::move(segments));
}

namespace {

struct PgState {
  double p;
  double g;
};

/// Backward derivative of (P_i, g_i) with frozen coefficients (r, beta):
/// integrating in s = t_i - t so the one-step method marches forward.
PgState backward_rhs(const PgState& y, double r, double beta, double rho) {
  return {-(beta - 2.0 * r) * y.p, -((beta - r) * y.g - rho * r * y.p)};
}

PgState rk4_step(const PgState& y, double h, double r, double beta, double rho) {
  const PgState k1 = backward_rhs(y, r, beta, rho);
  const PgState y2{y.p + 0.5 * h * k1.p, y.g + 0.5 * h * k1.g};
  const PgState k2 = backward_rhs(y2, r, beta, rho);
  const PgState y3{y.p + 0.5 * h * k2.p, y.g + 0.5 * h * k2.g};
  const PgState k3 = backward_rhs(y3, r, beta, rho);
  const PgState y4{y.p + h * k3.p, y.g + h * k3.g};
  const PgState k4 = backward_rhs(y4, r, beta, rho);
  return {y.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
          y.g + h / 6.0 * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g)};
}

}  // namespace

OdeDeviationReport verify_against_ode(const RiccatiChain& chain,
                                      const ProblemSpec& spec,
                                      const MultiplierSet& mult, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("ode check: step must be positive");
  const MarketModel& market = spec.market();
  OdeDeviationReport report{step, 0.0, 0.0};

  for (int i = chain.segment_count() - 1; i >= 0; --i) {
    const RiccatiSegment& seg = chain.segment(i);
    PgState state{seg.p_end, seg.g_end};

    // March from t_hi down to t_lo, splitting at coefficient breakpoints so
    // each RK4 step sees smooth (frozen) coefficients.
    std::vector<double> cuts{seg.t_lo, seg.t_hi};
    for (double b : market.breakpoints()) {
      if (b > seg.t_lo && b < seg.t_hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());

    for (std::size_t c = cuts.size() - 1; c > 0; --c) {
      const double hi = cuts[c];
      const double lo = cuts[c - 1];
      const double r = market.rate(lo);
      const double beta = market.beta(lo);
      const int nsteps = std::max(1, static_cast<int>(std::ceil((hi - lo) / step - 1e-12)));
      const double h = (hi - lo) / nsteps;
      double t = hi;
      for (int k = 0; k < nsteps; ++k) {
        state = rk4_step(state, h, r, beta, mult.rho[static_cast<std::size_t>(i)]);
        t = (k + 1 == nsteps) ? lo : hi - (k + 1) * h;
        report.max_dev_p = std::max(report.max_dev_p, std::abs(state.p - chain.p(i, t)));
        report.max_dev_g = std::max(report.max_dev_g, std::abs(state.g - chain.g(i, t)));
      }
    }
  }
  return report;
}

}  // namespace mtmv
