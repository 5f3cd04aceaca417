#include "avrc/wealth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "avrc/errors.hpp"

namespace avrc {
namespace {

// Relative slack for bets computed in floating point right at the cap.
constexpr double kCapSlack = 1e-12;
// Factors this close below zero are rounding error at the boundary bet.
constexpr double kFactorSlack = 1e-12;

}  // namespace

BetaGrid::BetaGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ConfigError("beta grid needs at least 2 points");
  if (points_.front() < 0.0) throw ConfigError("beta grid starts below 0");
  if (points_.back() != 1.0) throw ConfigError("beta grid must end at 1.0");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw ConfigError("beta grid is not strictly increasing at index " +
                        std::to_string(i));
    }
  }
}

BetaGrid BetaGrid::uniform(std::size_t resolution) {
  if (resolution < 1) throw ConfigError("grid resolution must be positive");
  std::vector<double> pts(resolution + 1);
  for (std::size_t i = 0; i < resolution; ++i) {
    pts[i] = static_cast<double>(i) / static_cast<double>(resolution);
  }
  pts[resolution] = 1.0;
  return BetaGrid(std::move(pts));
}

std::size_t BetaGrid::floor_index(double beta) const {
  const auto it = std::upper_bound(points_.begin(), points_.end(), beta);
  if (it == points_.begin()) return 0;
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

double validity_cap(double q_min, double theta) {
  return 1.0 / (1.0 / q_min - theta);
}

WealthGrid::WealthGrid(BetaGrid grid, double alpha)
    : grid_(std::move(grid)),
      alpha_(alpha),
      log_threshold_(-std::log(alpha)),
      log_wealth_(grid_.size(), 0.0),
      rejected_(grid_.size(), 0),
      beta_hat_index_(grid_.size() - 1) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
}

double WealthGrid::wealth(std::size_t i) const { return std::exp(log_wealth_[i]); }

double WealthGrid::max_open_log_wealth() const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_wealth_.size(); ++i) {
    if (!rejected_[i]) best = std::max(best, log_wealth_[i]);
  }
  return best;
}

void WealthGrid::check_common(double theta, std::span<const double> bets) const {
  if (bets.size() != grid_.size()) {
    throw InvariantViolation("bet vector size does not match the grid");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw InvariantViolation("theta outside [0,1]");
  }
}

void WealthGrid::check_observation(double theta,
                                   const StepObservation& obs) const {
  check_common(theta, obs.bets);
  if (!(obs.q_min > 0.0 && obs.q_min <= 1.0)) {
    throw InvariantViolation("query floor must be in (0,1]");
  }
  if (!(obs.query_prob >= obs.q_min * (1.0 - kCapSlack) &&
        obs.query_prob <= 1.0)) {
    throw InvariantViolation("query probability " +
                             std::to_string(obs.query_prob) +
                             " outside [q_min, 1]");
  }
  if (obs.queried && !obs.risk) {
    throw InvariantViolation("label queried but realized risk is absent");
  }
  if (!obs.queried && obs.risk) {
    throw InvariantViolation("realized risk supplied for an unqueried point");
  }
  if (obs.risk && obs.risk->size() != grid_.size()) {
    throw InvariantViolation("risk vector size does not match the grid");
  }
  if (!obs.predicted.empty() && obs.predicted.size() != grid_.size()) {
    throw InvariantViolation("prediction vector size does not match the grid");
  }
  const double cap = validity_cap(obs.q_min, theta) * (1.0 + kCapSlack);
  for (std::size_t i = 0; i < obs.bets.size(); ++i) {
    if (!(obs.bets[i] >= 0.0 && obs.bets[i] <= cap)) {
      throw InvariantViolation("bet " + std::to_string(obs.bets[i]) +
                               " at grid index " + std::to_string(i) +
                               " outside [0, " + std::to_string(cap) + "]");
    }
  }
}

void WealthGrid::apply_factor(std::size_t i, double factor) {
  if (factor < -kFactorSlack) {
    throw InvariantViolation("negative wealth factor " +
                             std::to_string(factor) + " at grid index " +
                             std::to_string(i));
  }
  // Boundary bets on the worst outcome land within rounding of zero.
  if (factor <= kFactorSlack) factor = 0.0;
  log_wealth_[i] += std::log(factor);
}

void WealthGrid::finish_step() {
  ++step_;
  for (std::size_t i = 0; i < log_wealth_.size(); ++i) {
    if (!rejected_[i] && log_wealth_[i] >= log_threshold_) rejected_[i] = 1;
  }
  beta_hat_index_ = extract_beta_hat_index(rejected_);
}

void WealthGrid::update_plain(double theta, std::span<const double> bets,
                              std::span<const double> risk) {
  check_common(theta, bets);
  if (risk.size() != grid_.size()) {
    throw InvariantViolation("risk vector size does not match the grid");
  }
  const double cap = validity_cap(1.0, theta) * (1.0 + kCapSlack);
  for (std::size_t i = 0; i < bets.size(); ++i) {
    if (!(bets[i] >= 0.0 && bets[i] <= cap)) {
      throw InvariantViolation("bet " + std::to_string(bets[i]) +
                               " at grid index " + std::to_string(i) +
                               " outside [0, (1-theta)^-1]");
    }
  }
  for (std::size_t i = 0; i < bets.size(); ++i) {
    if (rejected_[i]) continue;
    apply_factor(i, 1.0 + bets[i] * (theta - risk[i]));
  }
  finish_step();
}

void WealthGrid::update_active(double theta, const StepObservation& obs) {
  check_observation(theta, obs);
  const auto& bets = obs.bets;
  if (obs.queried) {
    const double weight = 1.0 / obs.query_prob;
    const auto& risk = *obs.risk;
    for (std::size_t i = 0; i < bets.size(); ++i) {
      if (rejected_[i]) continue;
      apply_factor(i, 1.0 + bets[i] * (theta - weight * risk[i]));
    }
  } else {
    for (std::size_t i = 0; i < bets.size(); ++i) {
      if (rejected_[i]) continue;
      apply_factor(i, 1.0 + bets[i] * theta);
    }
  }
  finish_step();
}

void WealthGrid::update_predicted(double theta, const StepObservation& obs) {
  if (obs.predicted.empty()) {
    update_active(theta, obs);
    return;
  }
  check_observation(theta, obs);
  const auto& bets = obs.bets;
  const auto& pred = obs.predicted;
  if (obs.queried) {
    const double weight = 1.0 / obs.query_prob;
    const auto& risk = *obs.risk;
    for (std::size_t i = 0; i < bets.size(); ++i) {
      if (rejected_[i]) continue;
      apply_factor(i, 1.0 + bets[i] * (theta - pred[i] -
                                       weight * (risk[i] - pred[i])));
    }
  } else {
    for (std::size_t i = 0; i < bets.size(); ++i) {
      if (rejected_[i]) continue;
      apply_factor(i, 1.0 + bets[i] * (theta - pred[i]));
    }
  }
  finish_step();
}

std::size_t extract_beta_hat_index(std::span<const std::uint8_t> rejected) {
  std::size_t j = rejected.size() - 1;
  while (j > 0 && rejected[j]) --j;
  return j;
}

double extract_beta_hat(const WealthGrid& state) {
  return state.grid()[extract_beta_hat_index(state.rejection_flags())];
}

}  // namespace avrc
