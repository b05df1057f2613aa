#pragma once

#include <cmath>
#include <span>

namespace softgate {

// Neumaier-compensated running sum. The result is within a few ulps of the
// exact sum regardless of the order values arrive in.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> v) noexcept {
  CompensatedSum acc;
  for (double x : v) acc.add(x);
  return acc.value();
}

}  // namespace softgate
