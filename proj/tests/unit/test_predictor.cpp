#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "avrc/predictor.hpp"

using namespace avrc;

TEST(Pretrain, RiskExamples) {
  const ScoreVector s({0.6, 0.3, 0.1});
  EXPECT_NEAR(pretrain_risk(s, 0.85), 0.1, 1e-15);
  EXPECT_EQ(pretrain_risk(s, 1.0), 0.0);
  EXPECT_NEAR(pretrain_risk(s, 0.0), 1.0, 1e-15);
  EXPECT_EQ(pretrain_risk(ScoreVector({1.0, 0.0}), 0.0), 0.0);
}

TEST(Pretrain, SigmaExamples) {
  EXPECT_NEAR(pretrain_sigma_from_risk(0.1), 0.3, 1e-15);
  EXPECT_EQ(pretrain_sigma_from_risk(0.0), 0.0);
  EXPECT_EQ(pretrain_sigma_from_risk(1.0), 0.0);
  EXPECT_EQ(pretrain_sigma_from_risk(0.5), 0.5);
  EXPECT_NEAR(pretrain_sigma(ScoreVector({0.6, 0.3, 0.1}), 0.85), 0.3, 1e-12);
}

TEST(SimulationOracle, ConditionalRisk) {
  EXPECT_NEAR(oracle_conditional_risk(0.7, 0.6), 0.3, 1e-15);
  EXPECT_EQ(oracle_conditional_risk(0.5, 0.6), 0.0);
  EXPECT_EQ(oracle_conditional_risk(0.999, 1.0), 0.0);
  EXPECT_NEAR(oracle_conditional_sigma(0.7, 0.6), std::sqrt(0.21), 1e-15);
}

TEST(Learned, StartsAsPassThrough) {
  LearnedRegressor reg;
  EXPECT_EQ(reg.update_count(), 0u);
  for (double f : {0.0, 0.13, 0.5, 0.99}) {
    EXPECT_DOUBLE_EQ(reg.predict_risk(reg.index_for(0.37), f), f);
  }
  for (double s : {0.0, 0.2, 0.45}) {
    EXPECT_NEAR(reg.predict_sigma(reg.index_for(0.9), s), s, 1e-15);
  }
  EXPECT_EQ(reg.index_for(0.374), 37u);
  EXPECT_EQ(reg.index_for(0.376), 38u);
  EXPECT_EQ(reg.bin_for(1.0, 1.0), reg.bins() - 1);
}

TEST(Learned, ConstantTargetConverges) {
  LearnedRegressor reg;
  const std::size_t m = reg.betas().size();
  const std::vector<double> feature(m, 0.35), sigma(m, 0.2), target(m, 0.2);
  for (int t = 0; t < 1000; ++t) reg.update(feature, sigma, target);
  EXPECT_EQ(reg.update_count(), 1000u);
  for (std::size_t j = 0; j < m; j += 10) {
    EXPECT_NEAR(reg.predict_risk(j, 0.35), 0.2, 1e-2);
  }
}

TEST(Learned, VarianceMatchesSquaredResidual) {
  LearnedRegressor reg;
  const std::size_t m = reg.betas().size();
  const std::vector<double> feature(m, 0.5), sigma(m, 0.2);
  const std::vector<double> low(m, 0.2), high(m, 0.8);
  for (int t = 0; t < 4000; ++t) reg.update(feature, sigma, t % 2 == 0 ? low : high);
  EXPECT_NEAR(reg.predict_risk(50, 0.5), 0.5, 1e-2);
  EXPECT_NEAR(reg.predict_sigma(50, 0.2), 0.3, 1e-2);
}

TEST(Learned, PredictOnArbitraryGrid) {
  LearnedRegressor reg;
  const std::vector<double> grid = {0.0, 0.333, 1.0};
  const std::vector<double> feats = {0.9, 0.4, 0.0};
  std::vector<double> out(3);
  reg.predict_risk_on(grid, feats, out);
  EXPECT_EQ(out, feats);
}
