#include <gtest/gtest.h>

#include <cmath>

#include "avrc/errors.hpp"
#include "avrc/harness.hpp"
#include "avrc/report.hpp"

using namespace avrc;

namespace {

TrialConfig short_trial(const std::string& method, std::uint64_t labels = 300) {
  auto cfg = TrialConfig::for_method(method);
  cfg.stop.max_labels = labels;
  cfg.grid_size = 200;
  return cfg;
}

}  // namespace

TEST(Trial, LabelAllConvergesFromAbove) {
  ExperimentConfig ec;
  ec.base.grid_size = 1000;
  ec.base.stop.max_labels = 2500;
  ec.methods = {"all"};
  ec.trials = 100;
  const auto recs = run_experiment(ec, simulation_source());
  const double star = simulation_beta_star(0.1);
  int good = 0;
  for (const auto& r : recs) {
    if (r.final_beta_hat < 1.0 && r.final_beta_hat >= star) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(Trial, TinyAlphaNeverMoves) {
  auto cfg = short_trial("all", 200);
  cfg.alpha = 1e-12;
  const auto r = run_trial(cfg, simulation_source());
  EXPECT_EQ(r.final_beta_hat, 1.0);
  EXPECT_EQ(r.path.size(), 1u);
}

TEST(Trial, ThetaOneRejectsEverything) {
  for (const char* m : {"all", "oblivious", "pretrain"}) {
    auto cfg = short_trial(m, 300);
    cfg.theta = 1.0;
    const auto r = run_trial(cfg, simulation_source());
    EXPECT_EQ(r.final_beta_hat, 0.0) << m;
  }
}

TEST(Trial, RecordInvariants) {
  for (const char* m : {"all", "oblivious", "pretrain", "learned"}) {
    auto cfg = short_trial(m, 400);
    cfg.trace = true;
    const auto r = run_trial(cfg, simulation_source());
    EXPECT_EQ(r.labels, 400u);
    ASSERT_EQ(r.trace.size(), r.steps);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      EXPECT_GE(r.trace[i].labels, r.trace[i - 1].labels);
      EXPECT_LE(r.trace[i].beta_hat, r.trace[i - 1].beta_hat);
      EXPECT_GE(r.trace[i].q, cfg.policy == PolicyKind::kAll ? 1.0 : 0.2 - 1e-15);
    }
    for (std::size_t i = 1; i < r.path.size(); ++i) {
      EXPECT_LT(r.path[i].beta_hat, r.path[i - 1].beta_hat);
    }
    EXPECT_EQ(r.curve.size(), 400u / 50u + 1u);
  }
}

TEST(Trial, Deterministic) {
  auto cfg = short_trial("learned", 300);
  cfg.seed = 7;
  cfg.trace = true;
  const auto a = run_trial(cfg, simulation_source());
  const auto b = run_trial(cfg, simulation_source());
  EXPECT_EQ(record_to_jsonl(a), record_to_jsonl(b));
  cfg.seed = 8;
  EXPECT_NE(record_to_jsonl(run_trial(cfg, simulation_source())), record_to_jsonl(a));
}

TEST(Trial, StepCapAndExhaustion) {
  auto cfg = short_trial("oblivious", 1000);
  cfg.stop.max_steps = 50;
  const auto capped = run_trial(cfg, simulation_source());
  EXPECT_TRUE(capped.step_capped);
  EXPECT_EQ(capped.steps, 50u);

  const auto data = generate_synthetic_scores(400, 5, 0.5, 1);
  const auto grid = BetaGrid::uniform(200);
  const auto setup = prepare_scores(data, grid, 1, 200);
  auto scfg = short_trial("pretrain", 1000);
  const auto r = run_trial(scfg, score_source(data, setup));
  EXPECT_TRUE(r.partial);
  EXPECT_EQ(r.steps, 200u);
}

TEST(Trial, ConfigValidationNamesField) {
  auto cfg = short_trial("all");
  cfg.alpha = 1.0;
  try {
    run_trial(cfg, simulation_source());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos);
  }
  cfg = short_trial("pretrain");
  cfg.q_floor = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = short_trial("all");
  cfg.stop.max_labels = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(TrialConfig::for_method("sometimes"), ConfigError);
}

TEST(Safety, Evaluation) {
  TrialRecord safe;
  safe.path = {{0, 0, 1.0}};
  TrialRecord bad;
  bad.path = {{0, 0, 1.0}, {10, 10, 0.3}, {20, 20, 0.2}};
  const std::vector<TrialRecord> only_safe = {safe, safe};
  EXPECT_EQ(evaluate_safety(only_safe, oracle_rho_simulation, 0.1), 0.0);
  const std::vector<TrialRecord> mixed = {safe, bad};
  EXPECT_EQ(evaluate_safety(mixed, oracle_rho_simulation, 0.1), 0.5);
  EXPECT_EQ(labels_to_threshold(bad, 0.3), 10u);
  EXPECT_FALSE(labels_to_threshold(safe, 0.65).has_value());
}

TEST(Experiment, OrderIndependentOfWorkers) {
  ExperimentConfig ec;
  ec.base.grid_size = 100;
  ec.base.stop.max_labels = 150;
  ec.trials = 5;
  ec.jobs = 1;
  const auto serial = run_experiment(ec, simulation_source());
  ec.jobs = 3;
  const auto parallel = run_experiment(ec, simulation_source());
  ASSERT_EQ(serial.size(), 20u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(record_to_jsonl(serial[i]), record_to_jsonl(parallel[i]));
  }
  EXPECT_EQ(serial.front().method, "all");
  EXPECT_EQ(serial.back().method, "learned");
  EXPECT_EQ(serial.back().trial_id, 4u);
}

TEST(Experiment, InvariantAbortPropagates) {
  ExperimentConfig ec;
  ec.base.grid_size = 100;
  ec.base.stop.max_labels = 50;
  ec.methods = {"all"};
  ec.trials = 2;
  DataSource broken = simulation_source();
  broken.rho = [](double) { return 1.0; };
  EXPECT_THROW(run_experiment(ec, broken), InvariantViolation);
}

TEST(Scores, HoldoutSize) {
  EXPECT_EQ(default_holdout_rows(1000), 500u);
  EXPECT_EQ(default_holdout_rows(10000000), 100000u);
}
