#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <string_view>

#include "avrc/cocob.hpp"
#include "avrc/rng.hpp"

namespace avrc {

enum class PolicyKind { kAll, kOblivious, kPretrain, kLearned };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kAll;
  double budget = 0.3;
  double q_floor = 0.2;
  std::size_t window = 100;
  double initial_log_normalizer = 0.0;
  // Iterates of the log-normalizer are projected onto this box.
  double log_normalizer_min = -10.0;
  double log_normalizer_max = 10.0;
};

struct QueryDecision {
  double q = 1.0;
  bool queried = true;
};

// Labeling policy q_t(x). For the adaptive kinds q = clip(sigma / exp(c),
// floor, 1), where sigma is the conditional risk spread estimated at the
// previous step's threshold and c is learned so that E[q] tracks the budget.
class LabelingPolicy {
 public:
  LabelingPolicy(PolicyConfig config, std::uint64_t seed);

  PolicyKind kind() const { return config_.kind; }
  const PolicyConfig& config() const { return config_; }

  // Analytic lower bound on every probability this policy can emit.
  double q_min() const;

  // sigma_hat is ignored by the "all" and "oblivious" kinds.
  double query_probability(double sigma_hat) const;

  // One step on the Lagrangian payoff -c - nu (q - B) for the log-normalizer.
  // nu is the window average of the dual player's regularized best responses
  // q_i / B^2, so that the fixed point satisfies E[q] = B.
  void update_normalizer(double sigma_hat);

  QueryDecision draw_label_decision(double q);

  double log_normalizer() const;
  double dual() const;
  std::uint64_t draws() const { return draws_; }
  std::uint64_t queries() const { return queries_; }
  double min_emitted() const { return min_emitted_; }

 private:
  bool adaptive() const;

  PolicyConfig config_;
  Rng rng_;
  Cocob normalizer_;
  std::deque<double> recent_q_;
  double recent_sum_ = 0.0;
  std::uint64_t draws_ = 0;
  std::uint64_t queries_ = 0;
  double min_emitted_ = 1.0;
};

// q*(x) = sigma(x) B / E[sigma(X)] for X ~ Uniform[0,1].
class OptimalPolicy {
 public:
  OptimalPolicy(std::function<double(double)> sigma, double mean_sigma,
                double budget);

  double operator()(double x) const;
  double mean_sigma() const { return mean_sigma_; }
  double max_value() const { return max_value_; }
  double min_value() const { return min_value_; }
  // False when the policy drops below eps somewhere (sigma vanishes there).
  bool meets_floor(double eps) const { return min_value_ >= eps; }

 private:
  friend OptimalPolicy oracle_optimal_policy(std::function<double(double)>,
                                             double, std::size_t);
  std::function<double(double)> sigma_;
  double mean_sigma_;
  double budget_;
  double max_value_ = 0.0;
  double min_value_ = 0.0;
};

// Builds q* with E[sigma(X)] from trapezoid integration over [0,1] on
// `nodes` points. Throws ConfigError("optimal policy infeasible ...") when q*
// exceeds 1 at any node, or when E[sigma] is zero.
OptimalPolicy oracle_optimal_policy(std::function<double(double)> sigma,
                                    double budget, std::size_t nodes = 10001);

double trapezoid_mean(const std::function<double(double)>& f,
                      std::size_t nodes);

}  // namespace avrc
