#pragma once

#include <limits>

namespace avrc {

// Scalar COCOB-Backprop: parameter-free coin-betting optimizer for
// minimization. Reference: Orabona & Tommasi, "Training Deep Networks without
// Learning Rates Through Coin Betting".
class Cocob {
 public:
  explicit Cocob(double initial = 0.0, double alpha = 100.0);

  double value() const { return w_; }
  void step(double gradient);
  // Keeps iterates inside [lo, hi] (projected updates).
  void set_bounds(double lo, double hi);

 private:
  double w1_;
  double w_;
  double alpha_;
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
  double max_grad_ = 1e-8;
  double sum_abs_ = 1e-8;
  double reward_ = 0.0;
  double sum_grad_ = 0.0;
};

}  // namespace avrc
