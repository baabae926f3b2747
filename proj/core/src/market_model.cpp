#include "mtmv/market_model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mtmv {

namespace {

constexpr double kTimeSlack = 1e-9;

std::string segment_label(double lo, double hi) {
  std::ostringstream os;
  os << "[" << lo << ", " << hi << ")";
  return os.str();
}

}  // namespace

std::string AssumptionReport::to_string() const {
  if (ok()) return "all assumptions satisfied";
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.detail << " on " << segment_label(v.segment_start, v.segment_end) << "\n";
  }
  return os.str();
}

AssumptionReport MarketModel::validate(double horizon,
                                       const PiecewiseConstant<double>& rate,
                                       const PiecewiseConstant<Eigen::VectorXd>& drift,
                                       const PiecewiseConstant<Eigen::MatrixXd>& vol,
                                       double delta) {
  AssumptionReport report;
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("market model: horizon must be positive and finite");
  }
  const Eigen::Index n = drift.values()[0].size();
  const Eigen::Index d = vol.values()[0].cols();
  for (const auto& b : drift.values()) {
    if (b.size() != n) throw std::invalid_argument("market model: drift dimension changes over time");
  }
  for (const auto& s : vol.values()) {
    if (s.rows() != n || s.cols() != d) {
      throw std::invalid_argument("market model: vol dimensions inconsistent with drift");
    }
  }

  std::set<double> cuts{0.0, horizon};
  for (double t : rate.starts()) cuts.insert(t);
  for (double t : drift.starts()) cuts.insert(t);
  for (double t : vol.starts()) cuts.insert(t);

  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    const double lo = *it;
    const double hi = *std::next(it);
    if (lo >= horizon) break;
    const double r = rate.at(lo);
    const Eigen::VectorXd& b = drift.at(lo);
    const Eigen::MatrixXd& sigma = vol.at(lo);

    if (!(r > 0.0)) {
      report.violations.push_back({AssumptionViolation::Kind::NonPositiveRate, lo, hi,
                                   "risk-free rate <= 0 (r = " + std::to_string(r) + ")"});
    }
    const Eigen::VectorXd gamma = b.array() - r;
    if ((gamma.array() <= 0.0).any()) {
      report.violations.push_back({AssumptionViolation::Kind::NonPositiveExcessReturn, lo, hi,
                                   "excess return <= 0 for at least one asset"});
    }
    const Eigen::MatrixXd cov = sigma * sigma.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (!(min_eig > delta)) {
      report.violations.push_back(
          {AssumptionViolation::Kind::CovarianceFloor, lo, hi,
           "min eigenvalue of sigma sigma^T is " + std::to_string(min_eig) +
               ", not above the floor " + std::to_string(delta)});
    }
  }
  return report;
}

MarketModel::MarketModel(double horizon, PiecewiseConstant<double> rate,
                         PiecewiseConstant<Eigen::VectorXd> drift,
                         PiecewiseConstant<Eigen::MatrixXd> vol, double delta)
    : horizon_(horizon),
      delta_(delta),
      rate_(std::move(rate)),
      drift_(std::move(drift)),
      vol_(std::move(vol)) {
  AssumptionReport report = validate(horizon_, rate_, drift_, vol_, delta_);
  if (!report.ok()) {
    throw std::invalid_argument("market model violates standing assumptions:\n" +
                                report.to_string());
  }
  n_ = static_cast<int>(drift_.values()[0].size());
  d_ = static_cast<int>(vol_.values()[0].cols());

  std::set<double> cuts{0.0};
  for (double t : rate_.starts()) cuts.insert(t);
  for (double t : drift_.starts()) cuts.insert(t);
  for (double t : vol_.starts()) cuts.insert(t);
  for (double t : cuts) {
    if (t < horizon_) seg_start_.push_back(t);
  }

  for (double lo : seg_start_) {
    const double r = rate_.at(lo);
    const Eigen::VectorXd gamma = drift_.at(lo).array() - r;
    const Eigen::MatrixXd& sigma = vol_.at(lo);
    Eigen::MatrixXd cov = sigma * sigma.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("market model: sigma sigma^T not positive definite");
    }
    Eigen::VectorXd direction = llt.solve(gamma);
    seg_rate_.push_back(r);
    seg_beta_.push_back(gamma.dot(direction));
    seg_cov_.push_back(std::move(cov));
    seg_loading_.push_back(sigma.transpose() * direction);
    seg_direction_.push_back(std::move(direction));
  }
}

MarketModel MarketModel::constant(double horizon, double rate, double drift,
                                  double vol, double delta) {
  Eigen::VectorXd b(1);
  b << drift;
  Eigen::MatrixXd s(1, 1);
  s << vol;
  return MarketModel(horizon, PiecewiseConstant<double>::constant(rate),
                     PiecewiseConstant<Eigen::VectorXd>::constant(b),
                     PiecewiseConstant<Eigen::MatrixXd>::constant(s), delta);
}

void MarketModel::check_time(double& t) const {
  if (t < -kTimeSlack || t > horizon_ + kTimeSlack * std::max(1.0, horizon_)) {
    throw std::domain_error("time " + std::to_string(t) + " outside [0, " +
                            std::to_string(horizon_) + "]");
  }
  t = std::clamp(t, 0.0, horizon_);
}

double MarketModel::rate(double t) const {
  check_time(t);
  return rate_.at(t);
}

Eigen::VectorXd MarketModel::drift(double t) const {
  check_time(t);
  return drift_.at(t);
}

Eigen::MatrixXd MarketModel::vol(double t) const {
  check_time(t);
  return vol_.at(t);
}

Eigen::VectorXd MarketModel::excess_return(double t) const {
  check_time(t);
  return drift_.at(t).array() - rate_.at(t);
}

namespace {
std::size_t merged_index(std::span<const double> starts, double t) {
  auto it = std::upper_bound(starts.begin(), starts.end(), t);
  if (it == starts.begin()) return 0;
  return static_cast<std::size_t>(it - starts.begin()) - 1;
}
}  // namespace

double MarketModel::beta(double t) const {
  check_time(t);
  return seg_beta_[merged_index(seg_start_, t)];
}

const Eigen::MatrixXd& MarketModel::covariance(double t) const {
  check_time(t);
  return seg_cov_[merged_index(seg_start_, t)];
}

const Eigen::VectorXd& MarketModel::feedback_direction(double t) const {
  check_time(t);
  return seg_direction_[merged_index(seg_start_, t)];
}

const Eigen::VectorXd& MarketModel::noise_loading(double t) const {
  check_time(t);
  return seg_loading_[merged_index(seg_start_, t)];
}

double MarketModel::integral(std::span<const double> seg_value, double a,
                             double b) const {
  check_time(a);
  check_time(b);
  if (a > b) throw std::domain_error("integral bounds reversed: a > b");
  if (a == b) return 0.0;
  std::size_t i = merged_index(seg_start_, a);
  double total = 0.0;
  double lo = a;
  while (true) {
    const double hi = (i + 1 < seg_start_.size()) ? seg_start_[i + 1] : horizon_;
    if (b <= hi) {
      total += seg_value[i] * (b - lo);
      break;
    }
    total += seg_value[i] * (hi - lo);
    lo = hi;
    ++i;
  }
  return total;
}

double MarketModel::integral_rate(double a, double b) const {
  return integral(seg_rate_, a, b);
}

double MarketModel::integral_beta(double a, double b) const {
  return integral(seg_beta_, a, b);
}

ProblemSpec::ProblemSpec(MarketModel market, std::vector<double> checkpoints,
                         double initial_wealth, std::vector<double> targets)
    : market_(std::move(market)),
      checkpoints_(std::move(checkpoints)),
      initial_wealth_(initial_wealth),
      targets_(std::move(targets)) {
  if (checkpoints_.size() < 2) {
    throw std::invalid_argument("problem: need at least checkpoints {0, horizon}");
  }
  if (targets_.size() + 1 != checkpoints_.size()) {
    throw std::invalid_argument("problem: need exactly one target per checkpoint after t_0");
  }
  const double T = market_.horizon();
  if (std::abs(checkpoints_.front()) > 1e-12) {
    throw std::invalid_argument("problem: first checkpoint must be 0");
  }
  if (std::abs(checkpoints_.back() - T) > 1e-12 * std::max(1.0, T)) {
    throw std::invalid_argument("problem: last checkpoint must equal the market horizon");
  }
  checkpoints_.front() = 0.0;
  checkpoints_.back() = T;
  for (std::size_t i = 1; i < checkpoints_.size(); ++i) {
    if (!(checkpoints_[i] > checkpoints_[i - 1])) {
      throw std::invalid_argument("problem: checkpoints must be strictly increasing");
    }
  }
  if (!(initial_wealth_ > 0.0)) {
    throw std::invalid_argument("problem: initial wealth must be positive");
  }
}

int ProblemSpec::segment_of(double t) const {
  if (t <= checkpoints_.front()) return 0;
  auto it = std::lower_bound(checkpoints_.begin(), checkpoints_.end(), t);
  // lower_bound gives the first checkpoint >= t; t belongs to the segment
  // that ends there ((t_{i-1}, t_i] convention).
  std::size_t idx = static_cast<std::size_t>(it - checkpoints_.begin());
  if (idx == 0) return 0;
  if (idx >= checkpoints_.size()) return segment_count() - 1;
  return static_cast<int>(idx) - 1;
}

}  // namespace mtmv
