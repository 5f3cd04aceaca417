#include "avrc/betting.hpp"

#include <algorithm>
#include <cmath>

#include "avrc/errors.hpp"
#include "avrc/wealth.hpp"

namespace avrc {
namespace {

// 1/beta for the exp-concave ONS step, as in ONS-based betting.
const double kOnsStep = 2.0 / (2.0 - std::log(3.0));

double growth_denominator(double theta, double rho, double mean_sigma,
                          double var_r, double budget) {
  const double edge = theta - rho;
  return edge * edge + mean_sigma * mean_sigma / budget + var_r;
}

void check_oracle_inputs(double theta, double rho, double budget) {
  if (!(budget > 0.0 && budget <= 1.0)) throw ConfigError("budget must be in (0,1]");
  if (theta < rho) {
    throw ConfigError("null is true (theta < rho): no positive bet exists");
  }
}

}  // namespace

double surrogate_cap(double q_min, double theta) {
  return 1.0 / (2.0 / q_min - 2.0 * theta);
}

OnsBettor::OnsBettor(std::size_t grid_size, double theta, BettorConfig config)
    : theta_(theta),
      cap_(config.cap == BetCap::kSurrogate ? surrogate_cap(1.0, theta)
                                            : validity_cap(1.0, theta)),
      cap_mode_(config.cap),
      curvature_floor_(config.curvature_floor),
      lambda_(grid_size, config.initial_bet),
      played_(grid_size, 0.0),
      curvature_(grid_size, config.curvature_floor),
      sum_g_(grid_size, 0.0),
      sum_g2_(grid_size, 0.0),
      cum_growth_(grid_size, 0.0),
      rounds_(grid_size, 0) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must be in [0,1]");
  if (!(config.curvature_floor > 0.0)) throw ConfigError("curvature floor must be positive");
  if (config.initial_bet < 0.0) throw ConfigError("initial bet must be nonnegative");
}

std::span<const double> OnsBettor::next_bet(double q_min) {
  if (!(q_min > 0.0 && q_min <= 1.0)) throw ConfigError("q_min must be in (0,1]");
  cap_ = cap_mode_ == BetCap::kSurrogate ? surrogate_cap(q_min, theta_)
                                         : validity_cap(q_min, theta_);
  for (std::size_t i = 0; i < lambda_.size(); ++i) {
    played_[i] = std::clamp(lambda_[i], 0.0, cap_);
  }
  return played_;
}

void OnsBettor::observe_payoff(std::size_t i, double g) {
  const double lam = played_[i];
  const double grad = g - 2.0 * lam * g * g;
  cum_growth_[i] += surrogate_growth(lam, g);
  sum_g_[i] += g;
  sum_g2_[i] += g * g;
  ++rounds_[i];
  curvature_[i] += grad * grad;
  lambda_[i] = std::clamp(lam + kOnsStep * grad / curvature_[i], 0.0, cap_);
}

void OnsBettor::observe_payoff(std::span<const double> payoffs,
                               std::span<const std::uint8_t> skip) {
  for (std::size_t i = 0; i < payoffs.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    observe_payoff(i, payoffs[i]);
  }
}

double OnsBettor::best_fixed_bet(std::size_t i) const {
  if (sum_g2_[i] <= 0.0) return sum_g_[i] > 0.0 ? cap_ : 0.0;
  return std::clamp(sum_g_[i] / (2.0 * sum_g2_[i]), 0.0, cap_);
}

double OnsBettor::best_fixed_growth(std::size_t i) const {
  const double lam = best_fixed_bet(i);
  return lam * sum_g_[i] - lam * lam * sum_g2_[i];
}

double OnsBettor::regret_estimate(std::size_t i) const {
  return best_fixed_growth(i) - cum_growth_[i];
}

ConstantBettor::ConstantBettor(std::size_t grid_size, double theta, double lambda)
    : theta_(theta), lambda_(lambda), played_(grid_size, 0.0) {
  if (lambda < 0.0) throw ConfigError("constant bet must be nonnegative");
}

std::span<const double> ConstantBettor::next_bet(double q_min) {
  const double lam = std::min(lambda_, surrogate_cap(q_min, theta_));
  std::fill(played_.begin(), played_.end(), lam);
  return played_;
}

double oracle_lambda_star(double theta, double rho, double mean_sigma,
                          double var_r, double budget) {
  check_oracle_inputs(theta, rho, budget);
  if (theta == rho) return 0.0;
  return (theta - rho) /
         (2.0 * growth_denominator(theta, rho, mean_sigma, var_r, budget));
}

double oracle_growth_bound(double theta, double rho, double mean_sigma,
                           double var_r, double budget) {
  check_oracle_inputs(theta, rho, budget);
  if (theta == rho) return 0.0;
  const double edge = theta - rho;
  return edge * edge /
         (4.0 * growth_denominator(theta, rho, mean_sigma, var_r, budget));
}

double expected_surrogate_growth(double lambda, double theta, double rho,
                                 double mean_sigma, double var_r,
                                 double budget) {
  return lambda * (theta - rho) -
         lambda * lambda *
             growth_denominator(theta, rho, mean_sigma, var_r, budget);
}

std::vector<GrowthDiagnostic> growth_diagnostics(
    const OnsBettor& bettor, std::span<const double> betas,
    std::span<const BetaMoments> moments, double budget) {
  std::vector<GrowthDiagnostic> out;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const auto& m = moments[i];
    if (m.rho >= bettor.theta() || bettor.rounds(i) == 0) continue;
    GrowthDiagnostic d;
    d.beta = betas[i];
    d.lambda_star = oracle_lambda_star(bettor.theta(), m.rho, m.mean_sigma,
                                       m.var_r, budget);
    d.growth_bound = oracle_growth_bound(bettor.theta(), m.rho, m.mean_sigma,
                                         m.var_r, budget);
    d.realized_growth = bettor.cumulative_growth(i) /
                        static_cast<double>(bettor.rounds(i));
    d.gap = d.growth_bound - d.realized_growth;
    out.push_back(d);
  }
  return out;
}

}  // namespace avrc
