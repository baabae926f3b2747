#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mtmv {

/// Right-continuous step function of time: value i applies on
/// [start[i], start[i+1]) and the last value extends to +inf.
/// The first start must be 0.
template <typename T>
class PiecewiseConstant {
 public:
  PiecewiseConstant(std::vector<double> starts, std::vector<T> values)
      : starts_(std::move(starts)), values_(std::move(values)) {
    if (starts_.empty() || starts_.size() != values_.size()) {
      throw std::invalid_argument("piecewise schedule: need one value per start time");
    }
    if (starts_.front() != 0.0) {
      throw std::invalid_argument("piecewise schedule: first start time must be 0");
    }
    if (!std::is_sorted(starts_.begin(), starts_.end(),
                        [](double a, double b) { return a <= b; })) {
      throw std::invalid_argument("piecewise schedule: start times must be strictly increasing");
    }
  }

  static PiecewiseConstant constant(T value) {
    return PiecewiseConstant({0.0}, {std::move(value)});
  }

  const T& at(double t) const { return values_[index_of(t)]; }

  std::size_t index_of(double t) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    if (it == starts_.begin()) return 0;  // t < 0: clamp to first segment
    return static_cast<std::size_t>(it - starts_.begin()) - 1;
  }

  std::span<const double> starts() const { return starts_; }
  std::span<const T> values() const { return values_; }
  std::size_t size() const { return starts_.size(); }

 private:
  std::vector<double> starts_;
  std::vector<T> values_;
};

}  // namespace mtmv
