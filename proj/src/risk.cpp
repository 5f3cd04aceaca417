#include "avrc/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "avrc/errors.hpp"

namespace avrc {

ScoreVector::ScoreVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DataError("score vector is empty");
  double sum = 0.0;
  for (std::size_t y = 0; y < probs_.size(); ++y) {
    const double p = probs_[y];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError("score for class " + std::to_string(y) +
                      " is outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw DataError("scores sum to " + std::to_string(sum) +
                    ", not 1 within tolerance");
  }
}

SortedScores::SortedScores(std::span<const double> probs) {
  std::vector<double> sorted(probs.begin(), probs.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  levels_.reserve(sorted.size() + 1);
  mass_.reserve(sorted.size() + 1);
  if (sorted.empty() || sorted.front() < 1.0) {
    levels_.push_back(1.0);
    mass_.push_back(0.0);
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double v = sorted[i];
    while (i < sorted.size() && sorted[i] == v) mass += sorted[i++];
    levels_.push_back(v);
    mass_.push_back(mass);
  }
}

std::size_t SortedScores::level_for(double beta) const {
  // mass_ is non-decreasing along levels_; first level reaching beta.
  const auto it = std::lower_bound(mass_.begin(), mass_.end(), beta);
  if (it == mass_.end()) return levels_.size() - 1;
  return static_cast<std::size_t>(it - mass_.begin());
}

double SortedScores::gamma(double beta) const { return levels_[level_for(beta)]; }

void SortedScores::gamma_sweep(std::span<const double> betas,
                               std::span<double> out) const {
  std::size_t k = 0;
  const std::size_t last = levels_.size() - 1;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    while (k < last && mass_[k] < betas[i]) ++k;
    out[i] = levels_[k];
  }
}

double SortedScores::mass_at(double gamma) const {
  // levels_ is descending; find the level equal to gamma.
  const auto it = std::lower_bound(levels_.begin(), levels_.end(), gamma,
                                   std::greater<>());
  if (it == levels_.end()) return mass_.back();
  return mass_[static_cast<std::size_t>(it - levels_.begin())];
}

PredictionSet build_prediction_set(const ScoreVector& s, double beta) {
  const SortedScores sorted(s.probs());
  PredictionSet set;
  set.gamma = sorted.gamma(beta);
  for (std::size_t y = 0; y < s.size(); ++y) {
    if (s[y] >= set.gamma) set.members.push_back(y);
  }
  return set;
}

int miscoverage_risk(const ScoreVector& s, std::size_t y, double beta) {
  if (y >= s.size()) {
    throw ConfigError("class index " + std::to_string(y) +
                      " out of range for " + std::to_string(s.size()) +
                      " classes");
  }
  const SortedScores sorted(s.probs());
  return s[y] < sorted.gamma(beta) ? 1 : 0;
}

int fpr_risk(double x, int y, double beta) {
  return (x >= beta && y == 0) ? 1 : 0;
}

void MiscoverageRisk::realized(const Example& ex, std::span<const double> betas,
                               std::span<double> out) const {
  if (ex.label >= ex.scores.size()) {
    throw DataError("label " + std::to_string(ex.label) + " out of range");
  }
  const SortedScores sorted(ex.scores);
  sorted.gamma_sweep(betas, out);
  const double s_y = ex.scores[ex.label];
  for (double& v : out) v = s_y < v ? 1.0 : 0.0;
}

void MiscoverageRisk::model_implied(std::span<const double> scores,
                                    std::span<const double> betas,
                                    std::span<double> out) const {
  const SortedScores sorted(scores);
  sorted.gamma_sweep(betas, out);
  const double total = sorted.mass_at(0.0);
  for (double& v : out) {
    v = std::clamp(total - sorted.mass_at(v), 0.0, 1.0);
  }
}

void FprRisk::realized(const Example& ex, std::span<const double> betas,
                       std::span<double> out) const {
  if (ex.scores.size() != 2) throw DataError("fpr risk needs binary scores");
  const double x = ex.scores[1];
  const bool negative = ex.label == 0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    out[i] = (negative && x >= betas[i]) ? 1.0 : 0.0;
  }
}

void FprRisk::model_implied(std::span<const double> scores,
                            std::span<const double> betas,
                            std::span<double> out) const {
  if (scores.size() != 2) throw DataError("fpr risk needs binary scores");
  const double x = scores[1];
  const double p_negative = scores[0];
  for (std::size_t i = 0; i < betas.size(); ++i) {
    out[i] = x >= betas[i] ? p_negative : 0.0;
  }
}

void validate_risk_contract(const RiskFunction& risk,
                            std::span<const Example> samples,
                            std::span<const double> betas) {
  if (!risk.declares_monotone()) {
    throw InvariantViolation(std::string(risk.name()) +
                             " does not declare beta-monotonicity");
  }
  std::vector<double> values(betas.size());
  auto check = [&](const char* what, std::size_t row) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
        throw InvariantViolation(std::string(risk.name()) + " " + what +
                                 " risk outside [0,1] on sample " +
                                 std::to_string(row));
      }
      if (i > 0 && values[i] > values[i - 1]) {
        throw InvariantViolation(std::string(risk.name()) + " " + what +
                                 " risk increases in beta on sample " +
                                 std::to_string(row));
      }
    }
  };
  for (std::size_t row = 0; row < samples.size(); ++row) {
    risk.realized(samples[row], betas, values);
    check("realized", row);
    risk.model_implied(samples[row].scores, betas, values);
    check("model-implied", row);
  }
}

}  // namespace avrc
