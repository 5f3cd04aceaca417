#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "avrc/betting.hpp"
#include "avrc/errors.hpp"
#include "avrc/rng.hpp"
#include "avrc/wealth.hpp"

using namespace avrc;

TEST(Ons, FreshStateBetsZero) {
  OnsBettor b(5, 0.1);
  for (double lam : b.next_bet(1.0)) EXPECT_EQ(lam, 0.0);
}

TEST(Ons, BetsRespectCaps) {
  OnsBettor b(3, 0.1);
  b.set_proposal(0, 5.0);
  const auto bets = b.next_bet(1.0);
  EXPECT_NEAR(bets[0], 1.0 / 1.8, 1e-15);
  EXPECT_LE(bets[0], 1.0 / (1.0 - 0.1));

  BettorConfig cfg;
  cfg.cap = BetCap::kValidity;
  OnsBettor v(3, 0.1, cfg);
  v.set_proposal(0, 5.0);
  EXPECT_NEAR(v.next_bet(1.0)[0], 1.0 / 0.9, 1e-15);
  EXPECT_NEAR(v.next_bet(0.5)[0], validity_cap(0.5, 0.1), 1e-15);
}

TEST(Ons, ZeroPayoffLeavesBetUnchanged) {
  OnsBettor b(1, 0.1);
  b.set_proposal(0, 0.3);
  b.next_bet(1.0);
  b.observe_payoff(0, 0.0);
  EXPECT_EQ(b.proposal(0), 0.3);
}

TEST(Ons, PositivePayoffAtZeroRaisesBet) {
  OnsBettor b(1, 0.1);
  b.next_bet(1.0);
  b.observe_payoff(0, 0.1);
  const double step = 2.0 / (2.0 - std::log(3.0));
  EXPECT_NEAR(b.proposal(0), step * 0.1 / (1.0 + 0.01), 1e-15);
}

TEST(Ons, SkipMaskFreezesEntries) {
  OnsBettor b(2, 0.1);
  b.next_bet(1.0);
  const std::vector<double> g = {0.1, 0.1};
  const std::vector<std::uint8_t> skip = {1, 0};
  b.observe_payoff(g, skip);
  EXPECT_EQ(b.proposal(0), 0.0);
  EXPECT_GT(b.proposal(1), 0.0);
  EXPECT_EQ(b.rounds(0), 0u);
}

TEST(Ons, RegretIsSublinear) {
  // Payoffs of an active IPW step with positive edge.
  const double theta = 0.1, q = 0.5, rho = 0.03;
  OnsBettor b(1, theta);
  Rng rng(77);
  const std::size_t horizon = 10000;
  std::vector<double> gs;
  gs.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    b.next_bet(q);
    const bool labeled = uniform01(rng) < q;
    const double r = uniform01(rng) < rho ? 1.0 : 0.0;
    const double g = theta - (labeled ? r / q : 0.0);
    gs.push_back(g);
    b.observe_payoff(0, g);
  }
  const double cap = surrogate_cap(q, theta);
  double best = -1e300;
  for (int k = 0; k <= 100; ++k) {
    const double lam = cap * k / 100.0;
    double total = 0.0;
    for (double g : gs) total += surrogate_growth(lam, g);
    best = std::max(best, total);
  }
  EXPECT_LE((best - b.cumulative_growth(0)) / horizon, 0.01);
  EXPECT_GT(b.proposal(0), 0.0);
  EXPECT_LE(b.proposal(0), cap);
  EXPECT_NEAR(b.best_fixed_growth(0), best, 1e-6 * std::abs(best) + 1e-9);
  EXPECT_GE(b.regret_estimate(0), -1e-9);
}

TEST(Oracle, ClosedFormExamples) {
  EXPECT_EQ(oracle_lambda_star(0.1, 0.1, 0.2, 0.05, 0.3), 0.0);
  EXPECT_NEAR(oracle_lambda_star(0.1, 0.0, 0.0, 0.0, 0.3), 5.0, 1e-12);
  EXPECT_NEAR(oracle_growth_bound(0.1, 0.0, 0.0, 0.0, 0.3), 0.25, 1e-12);
  EXPECT_THROW(oracle_lambda_star(0.1, 0.2, 0.0, 0.0, 0.3), ConfigError);
  EXPECT_THROW(oracle_lambda_star(0.1, 0.0, 0.0, 0.0, 0.0), ConfigError);
}

TEST(Oracle, MatchesGridSearchArgmax) {
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const double theta = 0.05 + 0.5 * uniform01(rng);
    const double rho = theta * uniform01(rng);
    const double ms = 0.5 * uniform01(rng);
    const double var = 0.25 * uniform01(rng);
    const double budget = 0.1 + 0.9 * uniform01(rng);
    const double star = oracle_lambda_star(theta, rho, ms, var, budget);
    // Golden-section search on the concave quadratic.
    double lo = 0.0, hi = 4.0 * star + 1.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
      const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
      if (expected_surrogate_growth(a, theta, rho, ms, var, budget) <
          expected_surrogate_growth(b, theta, rho, ms, var, budget)) {
        lo = a;
      } else {
        hi = b;
      }
    }
    EXPECT_NEAR(0.5 * (lo + hi), star, 1e-6);
    EXPECT_NEAR(expected_surrogate_growth(star, theta, rho, ms, var, budget),
                oracle_growth_bound(theta, rho, ms, var, budget), 1e-12);
  }
}

TEST(Diagnostics, SkipsNullPoints) {
  OnsBettor b(2, 0.1);
  b.next_bet(1.0);
  const std::vector<double> g = {0.05, 0.05};
  b.observe_payoff(g);
  const std::vector<double> betas = {0.5, 1.0};
  const std::vector<BetaMoments> m = {{0.2, 0.1, 0.1}, {0.0, 0.0, 0.0}};
  const auto d = growth_diagnostics(b, betas, m, 1.0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].beta, 1.0);
  EXPECT_NEAR(d[0].growth_bound, 0.25, 1e-12);
}

TEST(ConstantBets, ClippedToCap) {
  ConstantBettor c(3, 0.1, 10.0);
  EXPECT_NEAR(c.next_bet(0.5)[2], surrogate_cap(0.5, 0.1), 1e-15);
  ConstantBettor small(3, 0.1, 0.01);
  EXPECT_EQ(small.next_bet(0.5)[0], 0.01);
}
