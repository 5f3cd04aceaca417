#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace avrc {

// Ascending candidate thresholds in [0,1] ending at exactly 1.0.
class BetaGrid {
 public:
  // Throws ConfigError unless strictly increasing, first >= 0, last == 1,
  // and at least two points.
  explicit BetaGrid(std::vector<double> points);

  // `resolution` points i/resolution for i = 0..resolution-1, plus 1.0.
  static BetaGrid uniform(std::size_t resolution);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }

  // Index of the largest grid point <= beta (0 when beta is below the grid).
  std::size_t floor_index(double beta) const;

 private:
  std::vector<double> points_;
};

// Largest admissible bet keeping every wealth factor nonnegative when query
// probabilities are at least q_min: ((q_min)^{-1} - theta)^{-1}.
double validity_cap(double q_min, double theta);

// Per-step inputs to the active and prediction-powered updates. Spans are
// per grid point. `risk` is present exactly when the label was queried.
struct StepObservation {
  std::optional<std::span<const double>> risk;
  std::span<const double> predicted;  // empty means r-hat == 0
  double query_prob = 1.0;
  bool queried = true;
  double q_min = 1.0;
  std::span<const double> bets;
};

// Family of betting e-processes M_t(beta) over a grid, kept in log space.
// Rejection (M_t(beta) >= 1/alpha) is sticky, and a rejected point's wealth is
// frozen from then on.
class WealthGrid {
 public:
  WealthGrid(BetaGrid grid, double alpha);

  // M <- M * (1 + lambda (theta - R)). Requires lambda in [0, (1-theta)^{-1}].
  void update_plain(double theta, std::span<const double> bets,
                    std::span<const double> risk);

  // M <- M * (1 + lambda (theta - (L/q) R)).
  void update_active(double theta, const StepObservation& obs);

  // M <- M * (1 + lambda (theta - rhat - (L/q)(R - rhat))).
  void update_predicted(double theta, const StepObservation& obs);

  const BetaGrid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  std::size_t step() const { return step_; }

  std::span<const double> log_wealth() const { return log_wealth_; }
  double wealth(std::size_t i) const;
  bool rejected(std::size_t i) const { return rejected_[i] != 0; }
  std::span<const std::uint8_t> rejection_flags() const { return rejected_; }

  double beta_hat() const { return grid_[beta_hat_index_]; }
  std::size_t beta_hat_index() const { return beta_hat_index_; }

  // Largest wealth over points that are not yet rejected (log scale).
  double max_open_log_wealth() const;

 private:
  void check_common(double theta, std::span<const double> bets) const;
  void check_observation(double theta, const StepObservation& obs) const;
  void apply_factor(std::size_t i, double factor);
  void finish_step();

  BetaGrid grid_;
  double alpha_;
  double log_threshold_;
  std::vector<double> log_wealth_;
  std::vector<std::uint8_t> rejected_;
  std::size_t beta_hat_index_;
  std::size_t step_ = 0;
};

// Index of the smallest grid point whose strictly larger neighbours are all
// rejected; the last index when nothing above it is rejected.
std::size_t extract_beta_hat_index(std::span<const std::uint8_t> rejected);

double extract_beta_hat(const WealthGrid& state);

}  // namespace avrc
