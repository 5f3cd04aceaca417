#include "avrc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "avrc/errors.hpp"

namespace avrc {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kAll: return "all";
    case PolicyKind::kOblivious: return "oblivious";
    case PolicyKind::kPretrain: return "pretrain";
    case PolicyKind::kLearned: return "learned";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "all") return PolicyKind::kAll;
  if (name == "oblivious") return PolicyKind::kOblivious;
  if (name == "pretrain") return PolicyKind::kPretrain;
  if (name == "learned") return PolicyKind::kLearned;
  throw ConfigError("unknown policy kind '" + std::string(name) + "'");
}

LabelingPolicy::LabelingPolicy(PolicyConfig config, std::uint64_t seed)
    : config_(config), rng_(seed), normalizer_(config.initial_log_normalizer) {
  if (!(config_.budget > 0.0 && config_.budget <= 1.0)) {
    throw ConfigError("budget must be in (0,1]");
  }
  if (!(config_.q_floor > 0.0 && config_.q_floor <= 1.0)) {
    throw ConfigError("q_floor must be in (0,1]");
  }
  if (adaptive() && config_.q_floor > config_.budget) {
    throw ConfigError("q_floor above the budget cannot meet the budget");
  }
  if (config_.window == 0) throw ConfigError("dual window must be positive");
  if (!(config_.log_normalizer_min <= config_.log_normalizer_max)) {
    throw ConfigError("log-normalizer bounds are inverted");
  }
  normalizer_.set_bounds(config_.log_normalizer_min, config_.log_normalizer_max);
}

bool LabelingPolicy::adaptive() const {
  return config_.kind == PolicyKind::kPretrain ||
         config_.kind == PolicyKind::kLearned;
}

double LabelingPolicy::q_min() const {
  switch (config_.kind) {
    case PolicyKind::kAll: return 1.0;
    case PolicyKind::kOblivious: return config_.budget;
    default: return config_.q_floor;
  }
}

double LabelingPolicy::log_normalizer() const {
  return normalizer_.value();
}

double LabelingPolicy::dual() const {
  const double mean_q =
      recent_q_.empty() ? config_.budget
                        : recent_sum_ / static_cast<double>(recent_q_.size());
  return std::max(0.0, mean_q / (config_.budget * config_.budget));
}

double LabelingPolicy::query_probability(double sigma_hat) const {
  switch (config_.kind) {
    case PolicyKind::kAll: return 1.0;
    case PolicyKind::kOblivious: return config_.budget;
    default: break;
  }
  const double raw = std::max(sigma_hat, 0.0) * std::exp(-log_normalizer());
  return std::clamp(raw, config_.q_floor, 1.0);
}

void LabelingPolicy::update_normalizer(double sigma_hat) {
  if (!adaptive()) return;
  const double q = query_probability(sigma_hat);
  const double nu = dual();
  // Loss is the negated payoff: c + nu (q - B); dq/dc = -q inside the clip.
  normalizer_.step(1.0 - nu * q);

  recent_q_.push_back(q);
  recent_sum_ += q;
  if (recent_q_.size() > config_.window) {
    recent_sum_ -= recent_q_.front();
    recent_q_.pop_front();
  }
}

QueryDecision LabelingPolicy::draw_label_decision(double q) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw InvariantViolation("query probability outside (0,1]");
  }
  QueryDecision d;
  d.q = q;
  d.queried = uniform01(rng_) < q;
  ++draws_;
  if (d.queried) ++queries_;
  min_emitted_ = std::min(min_emitted_, q);
  return d;
}

double trapezoid_mean(const std::function<double(double)>& f,
                      std::size_t nodes) {
  if (nodes < 2) throw ConfigError("trapezoid rule needs at least 2 nodes");
  const double h = 1.0 / static_cast<double>(nodes - 1);
  double sum = 0.5 * (f(0.0) + f(1.0));
  for (std::size_t k = 1; k + 1 < nodes; ++k) sum += f(static_cast<double>(k) * h);
  return sum * h;
}

OptimalPolicy::OptimalPolicy(std::function<double(double)> sigma,
                             double mean_sigma, double budget)
    : sigma_(std::move(sigma)), mean_sigma_(mean_sigma), budget_(budget) {
  if (!(mean_sigma > 0.0)) {
    throw ConfigError("optimal policy undefined: E[sigma] is zero");
  }
  if (!(budget > 0.0 && budget <= 1.0)) throw ConfigError("budget must be in (0,1]");
}

double OptimalPolicy::operator()(double x) const {
  return sigma_(x) * budget_ / mean_sigma_;
}

OptimalPolicy oracle_optimal_policy(std::function<double(double)> sigma,
                                    double budget, std::size_t nodes) {
  const double mean = trapezoid_mean(sigma, nodes);
  OptimalPolicy policy(std::move(sigma), mean, budget);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double v = policy(static_cast<double>(k) / static_cast<double>(nodes - 1));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  policy.min_value_ = lo;
  policy.max_value_ = hi;
  if (hi > 1.0) {
    throw ConfigError("optimal policy infeasible: q* reaches " +
                      std::to_string(hi) + " > 1");
  }
  return policy;
}

}  // namespace avrc
