#include "avrc/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "avrc/errors.hpp"

namespace avrc {
namespace {

constexpr double kMaxSigma = 0.5;

}  // namespace

double pretrain_risk(const ScoreVector& s, double beta) {
  const SortedScores sorted(s.probs());
  const double total = sorted.mass_at(0.0);
  return std::clamp(total - sorted.mass_at(sorted.gamma(beta)), 0.0, 1.0);
}

double pretrain_sigma_from_risk(double rhat) {
  const double r = std::clamp(rhat, 0.0, 1.0);
  return std::sqrt(r * (1.0 - r));
}

double pretrain_sigma(const ScoreVector& s, double beta) {
  return pretrain_sigma_from_risk(pretrain_risk(s, beta));
}

double oracle_conditional_risk(double x, double beta) {
  return x >= beta ? 1.0 - x : 0.0;
}

double oracle_conditional_sigma(double x, double beta) {
  return x >= beta ? std::sqrt(x * (1.0 - x)) : 0.0;
}

LearnedRegressor::LearnedRegressor(LearnedConfig config)
    : config_(config), betas_(BetaGrid::uniform(config.grid_resolution)) {
  if (config_.bins == 0) throw ConfigError("learned regressor needs at least one bin");
  if (!(config_.cocob_alpha > 0.0)) throw ConfigError("cocob_alpha must be positive");
  risk_models_.assign(betas_.size() * config_.bins, Linear(config_.cocob_alpha));
  variance_models_.assign(betas_.size() * config_.bins, Linear(config_.cocob_alpha));
}

std::size_t LearnedRegressor::index_for(double beta) const {
  const double pos = std::clamp(beta, 0.0, 1.0) *
                     static_cast<double>(config_.grid_resolution);
  return static_cast<std::size_t>(std::lround(pos));
}

std::size_t LearnedRegressor::bin_for(double feature, double upper) const {
  const double pos = std::clamp(feature / upper, 0.0, 1.0) *
                     static_cast<double>(config_.bins);
  return std::min(static_cast<std::size_t>(pos), config_.bins - 1);
}

double LearnedRegressor::predict_risk(std::size_t beta_index,
                                      double risk_feature) const {
  const auto& m = risk_models_[slot(beta_index, bin_for(risk_feature, 1.0))];
  return std::clamp(m.eval(risk_feature), 0.0, 1.0);
}

double LearnedRegressor::predict_sigma(std::size_t beta_index,
                                       double sigma_feature) const {
  const auto& m =
      variance_models_[slot(beta_index, bin_for(sigma_feature, kMaxSigma))];
  const double var = std::clamp(m.eval(sigma_feature * sigma_feature), 0.0,
                                kMaxSigma * kMaxSigma);
  return std::sqrt(var);
}

void LearnedRegressor::predict_risk_on(std::span<const double> grid,
                                       std::span<const double> risk_features,
                                       std::span<double> out) const {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out[i] = predict_risk(index_for(grid[i]), risk_features[i]);
  }
}

void LearnedRegressor::update(std::span<const double> risk_features,
                              std::span<const double> sigma_features,
                              std::span<const double> realized_risk) {
  const std::size_t n = betas_.size();
  if (risk_features.size() != n || sigma_features.size() != n ||
      realized_risk.size() != n) {
    throw InvariantViolation("learned regressor update has wrong grid size");
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double f = risk_features[j];
    auto& rm = risk_models_[slot(j, bin_for(f, 1.0))];
    const double fitted = rm.eval(f);
    const double residual = realized_risk[j] - std::clamp(fitted, 0.0, 1.0);
    // d/dtheta of (R - fitted)^2
    const double g_risk = -2.0 * (realized_risk[j] - fitted);
    rm.bias.step(g_risk);
    rm.weight.step(g_risk * f);

    const double s = sigma_features[j];
    auto& vm = variance_models_[slot(j, bin_for(s, kMaxSigma))];
    const double s2 = s * s;
    // d/dtheta of (residual^2 - v)^2
    const double g_var = -2.0 * (residual * residual - vm.eval(s2));
    vm.bias.step(g_var);
    vm.weight.step(g_var * s2);
  }
  ++updates_;
}

}  // namespace avrc
