#include <gtest/gtest.h>

#include <cmath>

#include "avrc/data.hpp"
#include "avrc/errors.hpp"
#include "avrc/policy.hpp"

using namespace avrc;

namespace {

PolicyConfig config(PolicyKind kind, double floor = 0.2) {
  PolicyConfig c;
  c.kind = kind;
  c.budget = 0.3;
  c.q_floor = floor;
  return c;
}

}  // namespace

TEST(QueryProbability, BaselineKinds) {
  LabelingPolicy all(config(PolicyKind::kAll), 1);
  EXPECT_EQ(all.query_probability(0.0), 1.0);
  EXPECT_EQ(all.q_min(), 1.0);
  LabelingPolicy obl(config(PolicyKind::kOblivious), 1);
  EXPECT_DOUBLE_EQ(obl.query_probability(0.9), 0.3);
  EXPECT_DOUBLE_EQ(obl.q_min(), 0.3);
}

TEST(QueryProbability, ConstantSigmaAtClosedFormNormalizer) {
  auto c = config(PolicyKind::kPretrain, 0.05);
  c.initial_log_normalizer = std::log(1.0 / 0.3);
  LabelingPolicy p(c, 1);
  EXPECT_NEAR(p.query_probability(1.0), 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(p.query_probability(0.0), 0.05);
  EXPECT_EQ(p.query_probability(1e9), 1.0);
}

TEST(Normalizer, ConvergesForConstantSigma) {
  LabelingPolicy p(config(PolicyKind::kPretrain, 0.05), 1);
  for (int t = 0; t < 20000; ++t) p.update_normalizer(0.5);
  EXPECT_NEAR(p.log_normalizer(), std::log(0.5 / 0.3), 1e-2);
  EXPECT_NEAR(p.query_probability(0.5), 0.3, 5e-3);
}

TEST(Normalizer, NoDualPressureLowersC) {
  // With q pinned at the floor the dual stays small and c drifts down.
  auto c = config(PolicyKind::kLearned, 0.05);
  LabelingPolicy p(c, 1);
  for (int t = 0; t < 10; ++t) p.update_normalizer(0.0);
  EXPECT_LT(p.log_normalizer(), 0.0);
  for (int t = 0; t < 100000; ++t) p.update_normalizer(0.0);
  EXPECT_GE(p.log_normalizer(), c.log_normalizer_min);
}

TEST(Normalizer, BudgetOnHeterogeneousSigma) {
  LabelingPolicy p(config(PolicyKind::kPretrain), 4);
  SimulationStream stream(11);
  Example ex;
  double sum_q = 0.0;
  const int n = 40000;
  for (int t = 0; t < n; ++t) {
    stream.next(ex);
    const double x = ex.scores[1];
    const double sigma = x >= 0.6 ? std::sqrt(x * (1.0 - x)) : 0.0;
    const double q = p.query_probability(sigma);
    if (t >= n / 2) sum_q += q;
    p.update_normalizer(sigma);
  }
  EXPECT_NEAR(sum_q / (n / 2), 0.3, 0.03);
}

TEST(Draws, ProbabilityOneAlwaysQueries) {
  LabelingPolicy p(config(PolicyKind::kAll), 5);
  for (int t = 0; t < 1000; ++t) EXPECT_TRUE(p.draw_label_decision(1.0).queried);
}

TEST(Draws, EmpiricalRateWithinThreeSigma) {
  LabelingPolicy p(config(PolicyKind::kPretrain), 6);
  const int n = 100000;
  for (int t = 0; t < n; ++t) p.draw_label_decision(0.2);
  const double rate = static_cast<double>(p.queries()) / n;
  EXPECT_NEAR(rate, 0.2, 3.0 * std::sqrt(0.2 * 0.8 / n));
  EXPECT_DOUBLE_EQ(p.min_emitted(), 0.2);
}

TEST(Draws, SeedDeterminesSequence) {
  LabelingPolicy a(config(PolicyKind::kPretrain), 42), b(config(PolicyKind::kPretrain), 42);
  for (int t = 0; t < 1000; ++t) {
    EXPECT_EQ(a.draw_label_decision(0.37).queried, b.draw_label_decision(0.37).queried);
  }
  EXPECT_THROW(a.draw_label_decision(0.0), InvariantViolation);
}

TEST(PolicyConfigValidation, Rejects) {
  EXPECT_THROW(LabelingPolicy(config(PolicyKind::kPretrain, 0.5), 1), ConfigError);
  EXPECT_THROW(LabelingPolicy(config(PolicyKind::kPretrain, 0.0), 1), ConfigError);
  auto c = config(PolicyKind::kOblivious);
  c.budget = 1.5;
  EXPECT_THROW(LabelingPolicy(c, 1), ConfigError);
  EXPECT_THROW(parse_policy_kind("sometimes"), ConfigError);
  EXPECT_EQ(parse_policy_kind("learned"), PolicyKind::kLearned);
}

TEST(OptimalPolicy, ConstantSigmaGivesBudget) {
  const auto q = oracle_optimal_policy([](double) { return 0.7; }, 0.3);
  EXPECT_NEAR(q(0.1), 0.3, 1e-12);
  EXPECT_NEAR(q(0.9), 0.3, 1e-12);
  EXPECT_TRUE(q.meets_floor(0.2));
}

TEST(OptimalPolicy, SimulationShape) {
  const double beta = 0.5;
  const auto sigma = [beta](double x) { return x >= beta ? std::sqrt(x * (1.0 - x)) : 0.0; };
  const auto q = oracle_optimal_policy(sigma, 0.3, 10001);
  // Trapezoid mean against the closed-form integral.
  EXPECT_NEAR(q.mean_sigma(), simulation_mean_sigma(beta), 1e-4);
  EXPECT_NEAR(simulation_mean_sigma(beta), M_PI / 16.0, 1e-12);
  EXPECT_NEAR(q(0.8), sigma(0.8) * 0.3 / q.mean_sigma(), 1e-15);
  EXPECT_EQ(q(0.3), 0.0);
  EXPECT_THROW(oracle_optimal_policy([](double x) { return x >= 0.6 ? std::sqrt(x * (1.0 - x)) : 0.0; }, 0.3), ConfigError);
  EXPECT_FALSE(q.meets_floor(0.05));
}

TEST(OptimalPolicy, InfeasibleIsFlagged) {
  const auto spike = [](double x) { return x > 0.99 ? 1.0 : 1e-6; };
  EXPECT_THROW(oracle_optimal_policy(spike, 0.3), ConfigError);
  EXPECT_THROW(oracle_optimal_policy([](double) { return 0.0; }, 0.3), ConfigError);
}
