#include "avrc/cocob.hpp"

#include <algorithm>
#include <cmath>

namespace avrc {

Cocob::Cocob(double initial, double alpha)
    : w1_(initial), w_(initial), alpha_(alpha) {}

void Cocob::step(double gradient) {
  const double mag = std::abs(gradient);
  max_grad_ = std::max(max_grad_, mag);
  sum_abs_ += mag;
  reward_ = std::max(reward_ - (w_ - w1_) * gradient, 0.0);
  sum_grad_ += gradient;
  w_ = w1_ - sum_grad_ / (max_grad_ * std::max(sum_abs_ + max_grad_,
                                               alpha_ * max_grad_)) *
                 (max_grad_ + reward_);
  w_ = std::clamp(w_, lo_, hi_);
}

void Cocob::set_bounds(double lo, double hi) {
  lo_ = lo;
  hi_ = hi;
  w_ = std::clamp(w_, lo_, hi_);
}

}  // namespace avrc
