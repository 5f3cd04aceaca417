#include "avrc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "avrc/betting.hpp"
#include "avrc/errors.hpp"
#include "avrc/wealth.hpp"

namespace avrc {

std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kNone: return "none";
    case PredictorKind::kPretrain: return "pretrain";
    case PredictorKind::kLearned: return "learned";
  }
  return "unknown";
}

PredictorKind parse_predictor_kind(std::string_view name) {
  if (name == "none") return PredictorKind::kNone;
  if (name == "pretrain") return PredictorKind::kPretrain;
  if (name == "learned") return PredictorKind::kLearned;
  throw ConfigError("unknown predictor kind '" + std::string(name) + "'");
}

std::string_view to_string(BettorKind kind) {
  return kind == BettorKind::kOns ? "ons" : "constant";
}

BettorKind parse_bettor_kind(std::string_view name) {
  if (name == "ons") return BettorKind::kOns;
  if (name == "constant") return BettorKind::kConstant;
  throw ConfigError("unknown bettor kind '" + std::string(name) + "'");
}

void TrialConfig::apply_method(std::string_view name) {
  if (name == "all") {
    policy = PolicyKind::kAll;
    predictor = PredictorKind::kNone;
  } else if (name == "oblivious") {
    policy = PolicyKind::kOblivious;
    predictor = PredictorKind::kNone;
  } else if (name == "pretrain") {
    policy = PolicyKind::kPretrain;
    predictor = PredictorKind::kPretrain;
  } else if (name == "learned") {
    policy = PolicyKind::kLearned;
    predictor = PredictorKind::kLearned;
  } else {
    throw ConfigError("methods: unknown method '" + std::string(name) +
                      "' (expected all, oblivious, pretrain or learned)");
  }
  method = std::string(name);
}

TrialConfig TrialConfig::for_method(std::string_view name) {
  TrialConfig cfg;
  cfg.apply_method(name);
  return cfg;
}

void TrialConfig::validate() const {
  // theta = 1 is accepted as the degenerate "null impossible" case.
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must be in (0,1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
  if (!(budget > 0.0 && budget <= 1.0)) throw ConfigError("budget must be in (0,1]");
  if (grid_size < 1) throw ConfigError("grid_size must be positive");
  if (stop.max_labels == 0) throw ConfigError("max_labels must be positive");
  if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
  if (dual_window == 0) throw ConfigError("dual_window must be positive");
  const bool adaptive =
      policy == PolicyKind::kPretrain || policy == PolicyKind::kLearned;
  if (adaptive && !(q_floor > 0.0 && q_floor <= budget)) {
    throw ConfigError("q_floor must be in (0, budget] for adaptive policies");
  }
  if (bettor == BettorKind::kConstant && !(constant_bet >= 0.0)) {
    throw ConfigError("constant_bet must be nonnegative");
  }
}

DataSource simulation_source() {
  DataSource src;
  src.rho = oracle_rho_simulation;
  return src;
}

namespace {

std::unique_ptr<ExampleStream> open_stream(const TrialConfig& cfg,
                                           const DataSource& source) {
  const auto seed = derive_seed(cfg.seed, kDataStream, cfg.trial_id);
  if (source.scores == nullptr) return std::make_unique<SimulationStream>(seed);
  return std::make_unique<ReplayStream>(*source.scores, source.pool, seed);
}

std::unique_ptr<RiskFunction> risk_for(const DataSource& source) {
  if (source.scores == nullptr) return std::make_unique<FprRisk>();
  return std::make_unique<MiscoverageRisk>();
}

}  // namespace

TrialRecord run_trial(const TrialConfig& cfg, const DataSource& source) {
  cfg.validate();
  if (!source.rho) throw ConfigError("data source has no risk oracle");
  const auto started = std::chrono::steady_clock::now();

  const BetaGrid grid = BetaGrid::uniform(cfg.grid_size);
  const std::size_t n = grid.size();
  const double theta = cfg.theta;

  auto stream = open_stream(cfg, source);
  auto risk = risk_for(source);

  PolicyConfig pcfg;
  pcfg.kind = cfg.policy;
  pcfg.budget = cfg.budget;
  pcfg.q_floor = cfg.q_floor;
  pcfg.window = cfg.dual_window;
  LabelingPolicy policy(pcfg, derive_seed(cfg.seed, kPolicyStream, cfg.trial_id));

  WealthGrid wealth(grid, cfg.alpha);
  OnsBettor ons(n, theta);
  ConstantBettor constant(n, theta, cfg.constant_bet);

  const bool want_learned = cfg.predictor == PredictorKind::kLearned ||
                            cfg.policy == PolicyKind::kLearned;
  const bool want_pretrain = cfg.predictor != PredictorKind::kNone ||
                             cfg.policy == PolicyKind::kPretrain || want_learned;
  std::optional<LearnedRegressor> learned;
  if (want_learned) learned.emplace(cfg.learned);

  std::vector<double> pretrain(want_pretrain ? n : 0);
  std::vector<double> predicted(cfg.predictor == PredictorKind::kLearned ? n : 0);
  std::vector<double> realized(n);
  std::vector<double> payoff(n);
  std::vector<double> sub_risk, sub_sigma, sub_realized;
  if (learned) {
    const auto m = learned->betas().size();
    sub_risk.resize(m);
    sub_sigma.resize(m);
    sub_realized.resize(m);
  }

  TrialRecord rec;
  rec.method = cfg.method;
  rec.trial_id = cfg.trial_id;
  rec.seed = cfg.seed;
  rec.checkpoint_every = cfg.checkpoint_every;
  rec.path.push_back({0, 0, 1.0});
  rec.curve.push_back(1.0);

  const auto rho_violates = [&](double beta) { return source.rho(beta) > theta; };
  if (rho_violates(1.0)) {
    throw InvariantViolation("risk oracle exceeds theta at beta = 1");
  }

  Example ex;
  double sum_q = 0.0;
  std::uint64_t labels = 0;
  std::uint64_t t = 0;
  const auto cap = cfg.stop.step_cap();

  while (labels < cfg.stop.max_labels) {
    if (t >= cap) {
      rec.step_capped = true;
      break;
    }
    // Predictable quantities for step t+1.
    const double q_min = policy.q_min();
    const auto bets = cfg.bettor == BettorKind::kOns ? ons.next_bet(q_min)
                                                     : constant.next_bet(q_min);
    const std::size_t prev_index = wealth.beta_hat_index();

    if (!stream->next(ex)) {
      rec.partial = true;
      break;
    }
    ++t;

    if (want_pretrain) risk->model_implied(ex.scores, grid.points(), pretrain);
    if (cfg.predictor == PredictorKind::kLearned) {
      learned->predict_risk_on(grid.points(), pretrain, predicted);
    }

    double sigma_hat = 0.0;
    if (cfg.policy == PolicyKind::kPretrain) {
      sigma_hat = pretrain_sigma_from_risk(pretrain[prev_index]);
    } else if (cfg.policy == PolicyKind::kLearned) {
      const double f = pretrain_sigma_from_risk(pretrain[prev_index]);
      sigma_hat = learned->predict_sigma(learned->index_for(grid[prev_index]), f);
    }

    const double q = policy.query_probability(sigma_hat);
    if (!(q >= q_min && q <= 1.0)) {
      throw InvariantViolation("query probability " + std::to_string(q) +
                               " below the analytic floor " + std::to_string(q_min));
    }
    const auto decision = policy.draw_label_decision(q);
    if (decision.queried) {
      risk->realized(ex, grid.points(), realized);
      ++labels;
    }
    sum_q += q;

    std::span<const double> pred_span;
    if (cfg.predictor == PredictorKind::kPretrain) pred_span = pretrain;
    if (cfg.predictor == PredictorKind::kLearned) pred_span = predicted;

    if (cfg.policy == PolicyKind::kAll && cfg.predictor == PredictorKind::kNone) {
      wealth.update_plain(theta, bets, realized);
    } else {
      StepObservation obs;
      if (decision.queried) obs.risk = std::span<const double>(realized);
      obs.predicted = pred_span;
      obs.query_prob = q;
      obs.queried = decision.queried;
      obs.q_min = q_min;
      obs.bets = bets;
      if (pred_span.empty()) {
        wealth.update_active(theta, obs);
      } else {
        wealth.update_predicted(theta, obs);
      }
    }

    if (cfg.bettor == BettorKind::kOns) {
      const double weight = 1.0 / q;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = pred_span.empty() ? 0.0 : pred_span[i];
        payoff[i] = decision.queried ? theta - p - weight * (realized[i] - p)
                                     : theta - p;
      }
      ons.observe_payoff(payoff, wealth.rejection_flags());
    }

    const double beta_hat = wealth.beta_hat();
    if (beta_hat > rec.path.back().beta_hat) {
      throw InvariantViolation("beta-hat increased at step " + std::to_string(t));
    }
    if (beta_hat < rec.path.back().beta_hat) {
      rec.path.push_back({t, labels, beta_hat});
      if (!rec.violated && rho_violates(beta_hat)) {
        rec.violated = true;
        rec.first_violation_step = static_cast<std::int64_t>(t);
      }
    }

    if (learned && decision.queried) {
      const auto sub = learned->betas().points();
      risk->model_implied(ex.scores, sub, sub_risk);
      for (std::size_t j = 0; j < sub.size(); ++j) {
        sub_sigma[j] = pretrain_sigma_from_risk(sub_risk[j]);
      }
      risk->realized(ex, sub, sub_realized);
      learned->update(sub_risk, sub_sigma, sub_realized);
    }
    policy.update_normalizer(sigma_hat);

    if (decision.queried && labels % cfg.checkpoint_every == 0) {
      rec.curve.push_back(beta_hat);
    }
    if (cfg.trace) {
      StepTrace st;
      st.t = t;
      st.labels = labels;
      st.beta_hat = beta_hat;
      st.q = q;
      st.queried = decision.queried;
      st.bet_max = *std::max_element(bets.begin(), bets.end());
      st.bet_at_beta_hat = bets[wealth.beta_hat_index()];
      st.log_wealth_max = wealth.max_open_log_wealth();
      rec.trace.push_back(st);
    }
  }

  rec.final_beta_hat = wealth.beta_hat();
  rec.steps = t;
  rec.labels = labels;
  rec.query_fraction = t == 0 ? 0.0 : static_cast<double>(labels) / static_cast<double>(t);
  rec.mean_q = t == 0 ? 0.0 : sum_q / static_cast<double>(t);
  rec.min_q = policy.min_emitted();
  rec.runtime_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return rec;
}

double evaluate_safety(std::span<const TrialRecord> records,
                       const std::function<double(double)>& rho, double theta) {
  if (records.empty()) return 0.0;
  std::size_t bad = 0;
  for (const auto& r : records) {
    const bool any = std::any_of(r.path.begin(), r.path.end(), [&](const auto& c) {
      return rho(c.beta_hat) > theta;
    });
    if (any) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(records.size());
}

std::optional<std::uint64_t> labels_to_threshold(const TrialRecord& record,
                                                 double level) {
  for (const auto& c : record.path) {
    if (c.beta_hat <= level) return c.labels;
  }
  return std::nullopt;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                        const DataSource& source) {
  if (config.methods.empty()) throw ConfigError("methods: at least one method required");
  if (config.trials == 0) throw ConfigError("trials must be positive");
  std::vector<TrialConfig> tasks;
  tasks.reserve(config.methods.size() * config.trials);
  for (const auto& m : config.methods) {
    for (std::size_t k = 0; k < config.trials; ++k) {
      TrialConfig cfg = config.base;
      cfg.apply_method(m);
      cfg.trial_id = k;
      cfg.validate();
      tasks.push_back(std::move(cfg));
    }
  }

  std::vector<TrialRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  const auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        out[i] = run_trial(tasks[i], source);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  std::size_t jobs = config.jobs != 0 ? config.jobs
                                      : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, tasks.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::size_t default_holdout_rows(std::size_t n) {
  return std::min<std::size_t>(100000, n / 2);
}

ScoreSetup prepare_scores(const ScoreDataset& data, const BetaGrid& grid,
                          std::uint64_t seed, std::size_t holdout_rows) {
  if (data.rows() < 2) throw DataError("score file needs at least 2 rows");
  auto split = split_holdout(data.rows(), holdout_rows,
                             derive_seed(seed, kShuffleStream));
  MiscoverageRisk risk;
  EmpiricalRho rho(risk, data, split.holdout, grid);
  return {std::move(split), std::move(rho)};
}

DataSource score_source(const ScoreDataset& data, const ScoreSetup& setup) {
  DataSource src;
  src.scores = &data;
  src.pool = setup.split.pool;
  const EmpiricalRho* rho = &setup.rho;
  src.rho = [rho](double beta) { return (*rho)(beta); };
  return src;
}

}  // namespace avrc
