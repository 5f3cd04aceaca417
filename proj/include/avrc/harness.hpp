#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avrc/data.hpp"
#include "avrc/policy.hpp"
#include "avrc/predictor.hpp"

namespace avrc {

enum class PredictorKind { kNone, kPretrain, kLearned };
enum class BettorKind { kOns, kConstant };

std::string_view to_string(PredictorKind kind);
PredictorKind parse_predictor_kind(std::string_view name);
std::string_view to_string(BettorKind kind);
BettorKind parse_bettor_kind(std::string_view name);

// Labels are what the stop rule counts; the step cap only guarantees
// termination. max_steps == 0 means 50 x max_labels.
struct StopRule {
  std::uint64_t max_labels = 2500;
  std::uint64_t max_steps = 0;

  std::uint64_t step_cap() const {
    return max_steps != 0 ? max_steps : 50 * max_labels;
  }
};

// Seed stream ids. The data stream does not depend on the method, so the
// methods of one trial id see the same examples in the same order.
inline constexpr std::uint64_t kDataStream = 1;
inline constexpr std::uint64_t kPolicyStream = 2;
inline constexpr std::uint64_t kShuffleStream = 3;

struct TrialConfig {
  std::string method = "all";
  double theta = 0.1;
  double alpha = 0.05;
  double budget = 0.3;
  std::size_t grid_size = 1000;  // grid of grid_size + 1 points i / grid_size
  PolicyKind policy = PolicyKind::kAll;
  PredictorKind predictor = PredictorKind::kNone;
  BettorKind bettor = BettorKind::kOns;
  double constant_bet = 1.0;  // clipped to the surrogate cap
  double q_floor = 0.2;
  std::size_t dual_window = 100;
  LearnedConfig learned;
  StopRule stop;
  std::uint64_t seed = 0;      // experiment root seed
  std::uint64_t trial_id = 0;  // child seeds are derived from (seed, trial_id)
  std::uint64_t checkpoint_every = 50;
  bool trace = false;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Policy/predictor pairing of a named method: all, oblivious, pretrain,
  // learned. Other fields keep their defaults.
  static TrialConfig for_method(std::string_view method);
  void apply_method(std::string_view method);
};

// Simulation when `scores` is null; otherwise a replay of `pool` rows.
// `rho` is the population risk (or its held-out estimate) used to flag
// violations; it must be non-increasing in beta.
struct DataSource {
  const ScoreDataset* scores = nullptr;
  std::span<const std::size_t> pool;
  std::function<double(double)> rho;
};

DataSource simulation_source();

struct StepTrace {
  std::uint64_t t = 0;
  std::uint64_t labels = 0;
  double beta_hat = 1.0;
  double q = 1.0;
  bool queried = false;
  double bet_max = 0.0;
  double bet_at_beta_hat = 0.0;
  double log_wealth_max = 0.0;  // over points not yet rejected
};

// Every value taken by beta-hat, with the step and label count at which it
// was first emitted. The first entry is (0, 0, 1.0).
struct BetaHatChange {
  std::uint64_t t = 0;
  std::uint64_t labels = 0;
  double beta_hat = 1.0;
};

struct TrialRecord {
  std::string method;
  std::uint64_t trial_id = 0;
  std::uint64_t seed = 0;
  double final_beta_hat = 1.0;
  std::uint64_t steps = 0;
  std::uint64_t labels = 0;
  double query_fraction = 0.0;  // labels / steps
  double mean_q = 0.0;
  double min_q = 1.0;
  bool partial = false;  // data ran out before the stop rule
  bool step_capped = false;
  bool violated = false;
  std::int64_t first_violation_step = -1;
  std::vector<BetaHatChange> path;
  // beta-hat when the label count first reached k * checkpoint_every.
  std::uint64_t checkpoint_every = 50;
  std::vector<double> curve;
  std::vector<StepTrace> trace;
  double runtime_seconds = 0.0;  // excluded from deterministic outputs
};

// Runs one trial end to end. Throws InvariantViolation when a runtime check
// of the loop fails; data exhaustion yields a record with partial = true.
TrialRecord run_trial(const TrialConfig& config, const DataSource& source);

// Fraction of records with rho(beta-hat_t) > theta at some step.
double evaluate_safety(std::span<const TrialRecord> records,
                       const std::function<double(double)>& rho, double theta);

// Labels used when beta-hat first dropped to `level` or below.
std::optional<std::uint64_t> labels_to_threshold(const TrialRecord& record,
                                                 double level);

struct ExperimentConfig {
  TrialConfig base;
  std::vector<std::string> methods = {"all", "oblivious", "pretrain", "learned"};
  std::size_t trials = 100;
  std::size_t jobs = 0;  // 0: hardware concurrency
};

// Runs trials x methods independent tasks on a work queue. Records come back
// ordered by (method order, trial id) regardless of completion order. The
// first exception thrown by any trial is rethrown after all workers stop.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        const DataSource& source);

// Held-out rows for risk estimation on score files: min(1e5, n / 2).
std::size_t default_holdout_rows(std::size_t n);

struct ScoreSetup {
  HoldoutSplit split;
  EmpiricalRho rho;
};

ScoreSetup prepare_scores(const ScoreDataset& data, const BetaGrid& grid,
                          std::uint64_t seed, std::size_t holdout_rows);

DataSource score_source(const ScoreDataset& data, const ScoreSetup& setup);

}  // namespace avrc
