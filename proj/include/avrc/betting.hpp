#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace avrc {

// Cap under which the quadratic surrogate lambda g - lambda^2 g^2 lower
// bounds log(1 + lambda g): (2 (q_min)^{-1} - 2 theta)^{-1}.
double surrogate_cap(double q_min, double theta);

// Surrogate growth lambda g - lambda^2 g^2 for payoff argument g.
inline double surrogate_growth(double lambda, double g) {
  return lambda * g - lambda * lambda * g * g;
}

// kSurrogate clips to the halved cap under which the quadratic surrogate is
// valid; kValidity only to the e-process nonnegativity cap.
enum class BetCap { kSurrogate, kValidity };

struct BettorConfig {
  double initial_bet = 0.0;
  double curvature_floor = 1.0;
  BetCap cap = BetCap::kSurrogate;
};

// Online Newton Step on the surrogate growth, one independent bettor per grid
// point. Bets for step t are fixed by next_bet() before the step's data is
// seen; observe_payoff() then feeds back the realized payoff argument
//   g = theta - rhat - (L/q)(R - rhat).
class OnsBettor {
 public:
  OnsBettor(std::size_t grid_size, double theta, BettorConfig config = {});

  // Clipped bets for the coming step, valid for query floor q_min.
  std::span<const double> next_bet(double q_min);

  // Feed back realized payoff arguments. Entries whose `skip` flag is set
  // (e.g. already-rejected hypotheses) are left untouched.
  void observe_payoff(std::span<const double> payoffs,
                      std::span<const std::uint8_t> skip = {});
  void observe_payoff(std::size_t i, double g);

  std::size_t size() const { return lambda_.size(); }
  double theta() const { return theta_; }
  double bound_cap() const { return cap_; }
  std::span<const double> bets() const { return played_; }

  // Raw optimizer iterate before clipping to the current cap.
  double proposal(std::size_t i) const { return lambda_[i]; }
  // Overrides the optimizer iterate (used by tests and warm starts).
  void set_proposal(std::size_t i, double lambda) { lambda_[i] = lambda; }

  double cumulative_growth(std::size_t i) const { return cum_growth_[i]; }
  std::uint64_t rounds(std::size_t i) const { return rounds_[i]; }

  // Best fixed bet in [0, cap] on the payoffs seen so far, and the surrogate
  // growth it would have collected.
  double best_fixed_bet(std::size_t i) const;
  double best_fixed_growth(std::size_t i) const;
  // best_fixed_growth - cumulative_growth.
  double regret_estimate(std::size_t i) const;

 private:
  double theta_;
  double cap_;
  BetCap cap_mode_;
  double curvature_floor_;
  std::vector<double> lambda_;      // optimizer iterate
  std::vector<double> played_;      // last clipped bet handed out
  std::vector<double> curvature_;   // floor + sum of squared gradients
  std::vector<double> sum_g_;       // sum of g
  std::vector<double> sum_g2_;      // sum of g^2
  std::vector<double> cum_growth_;  // sum of surrogate growth at played bets
  std::vector<std::uint64_t> rounds_;
};

// Constant bet clipped to the current cap; a fixed-lambda reference bettor.
class ConstantBettor {
 public:
  ConstantBettor(std::size_t grid_size, double theta, double lambda);
  std::span<const double> next_bet(double q_min);

 private:
  double theta_;
  double lambda_;
  std::vector<double> played_;
};

// Closed-form optimal bet for the quadratic growth bound under the optimal
// predictor and labeling policy. Throws ConfigError when theta < rho (the
// null holds and no positive bet exists) or B is outside (0,1].
double oracle_lambda_star(double theta, double rho, double mean_sigma,
                          double var_r, double budget);

// The matching growth lower bound (theta-rho)^2 / (4 D).
double oracle_growth_bound(double theta, double rho, double mean_sigma,
                           double var_r, double budget);

// Expected quadratic growth lambda (theta-rho) - lambda^2 D with
// D = (theta-rho)^2 + E[sigma]^2/B + Var[r].
double expected_surrogate_growth(double lambda, double theta, double rho,
                                 double mean_sigma, double var_r,
                                 double budget);

struct BetaMoments {
  double rho = 0.0;
  double mean_sigma = 0.0;
  double var_r = 0.0;
};

struct GrowthDiagnostic {
  double beta = 0.0;
  double lambda_star = 0.0;
  double growth_bound = 0.0;
  double realized_growth = 0.0;  // average surrogate growth per round
  double gap = 0.0;              // growth_bound - realized_growth
};

// Compares each alternative grid point's realized average surrogate growth to
// the closed-form bound. Null points (rho >= theta) are skipped.
std::vector<GrowthDiagnostic> growth_diagnostics(
    const OnsBettor& bettor, std::span<const double> betas,
    std::span<const BetaMoments> moments, double budget);

}  // namespace avrc
