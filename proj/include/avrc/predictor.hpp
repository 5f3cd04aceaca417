#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "avrc/cocob.hpp"
#include "avrc/risk.hpp"
#include "avrc/wealth.hpp"

namespace avrc {

// Model-implied miscoverage: mass of the classes left out of the
// top-probability set at beta.
double pretrain_risk(const ScoreVector& s, double beta);

// Bernoulli standard deviation sqrt(r (1 - r)) of a model-implied risk.
double pretrain_sigma_from_risk(double rhat);
double pretrain_sigma(const ScoreVector& s, double beta);

// Simulation oracle E[r_FPR | X = x] = 1{x >= beta} (1 - x) when
// Y | X = x ~ Bern(x), and the matching conditional standard deviation.
double oracle_conditional_risk(double x, double beta);
double oracle_conditional_sigma(double x, double beta);

struct LearnedConfig {
  std::size_t bins = 10;
  std::size_t grid_resolution = 100;  // sub-grid of resolution+1 betas
  double cocob_alpha = 1000.0;
};

// Binned linear regressors for the conditional risk and its spread, one per
// (sub-grid beta, feature bin). The risk model maps the pretrain risk r to
// a + w r; the spread model maps the pretrain spread s to a variance a + w s^2.
// Both start as the identity on their feature (a = 0, w = 1) and are trained
// by COCOB on labeled points only.
class LearnedRegressor {
 public:
  explicit LearnedRegressor(LearnedConfig config = {});

  const BetaGrid& betas() const { return betas_; }
  std::size_t bins() const { return config_.bins; }
  std::uint64_t update_count() const { return updates_; }

  // Sub-grid index used for an arbitrary beta (nearest point).
  std::size_t index_for(double beta) const;
  // Bin of a feature on [0, upper]; risk features use upper = 1, spread
  // features upper = 0.5.
  std::size_t bin_for(double feature, double upper) const;

  // Prediction clipped to [0,1].
  double predict_risk(std::size_t beta_index, double risk_feature) const;
  // Standard deviation clipped to [0, 0.5].
  double predict_sigma(std::size_t beta_index, double sigma_feature) const;

  // Risk predictions for an arbitrary ascending grid from pretrain features
  // evaluated on that grid.
  void predict_risk_on(std::span<const double> grid,
                       std::span<const double> risk_features,
                       std::span<double> out) const;

  // One squared-loss step per sub-grid beta. All spans are indexed by this
  // regressor's sub-grid. Must only be called for labeled points.
  void update(std::span<const double> risk_features,
              std::span<const double> sigma_features,
              std::span<const double> realized_risk);

 private:
  struct Linear {
    explicit Linear(double alpha) : bias(0.0, alpha), weight(1.0, alpha) {}
    Cocob bias;
    Cocob weight;
    double eval(double f) const { return bias.value() + weight.value() * f; }
  };
  std::size_t slot(std::size_t beta_index, std::size_t bin) const {
    return beta_index * config_.bins + bin;
  }

  LearnedConfig config_;
  BetaGrid betas_;
  std::vector<Linear> risk_models_;
  std::vector<Linear> variance_models_;
  std::uint64_t updates_ = 0;
};

}  // namespace avrc
