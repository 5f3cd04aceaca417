#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace avrc {

inline constexpr double kSimplexTolerance = 1e-6;

// Class-probability vector produced by a probabilistic classifier.
class ScoreVector {
 public:
  // Throws DataError unless every entry is in [0,1] and the sum is within
  // kSimplexTolerance of 1.
  explicit ScoreVector(std::vector<double> probs);

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t y) const { return probs_[y]; }

 private:
  std::vector<double> probs_;
};

struct PredictionSet {
  double gamma = 1.0;
  std::vector<std::size_t> members;  // ascending class indices
};

// Smallest top-probability set whose included mass reaches beta. gamma is the
// largest threshold among {s^y} and 1 for which the mass of {y: s^y >= gamma}
// is at least beta. When rounding leaves the total mass below beta the full
// label set is returned with gamma = min_y s^y.
PredictionSet build_prediction_set(const ScoreVector& s, double beta);

// 1 iff y is outside build_prediction_set(s, beta). Throws ConfigError on an
// out-of-range class index.
int miscoverage_risk(const ScoreVector& s, std::size_t y, double beta);

// 1{x >= beta and y == 0}.
int fpr_risk(double x, int y, double beta);

// Scores sorted once so that gamma(beta) can be read off for a whole
// ascending beta grid in one linear sweep.
class SortedScores {
 public:
  explicit SortedScores(std::span<const double> probs);

  // gamma for a single beta (binary search over cumulative mass).
  double gamma(double beta) const;

  // gamma for every beta of an ascending grid, written into out.
  void gamma_sweep(std::span<const double> betas, std::span<double> out) const;

  // Mass of {y : s^y >= gamma} for a gamma returned by this object.
  double mass_at(double gamma) const;

 private:
  std::size_t level_for(double beta) const;

  // Distinct score values in descending order, preceded by 1.0, and the
  // mass of classes with s^y >= value at each level.
  std::vector<double> levels_;
  std::vector<double> mass_;
};

// Non-owning view of one labeled row: classifier probabilities and label.
struct Example {
  std::span<const double> scores;
  std::size_t label = 0;
};

// Contract for a risk function r(x, y, beta) in [0,1], non-increasing in beta.
// Grids passed in are ascending.
class RiskFunction {
 public:
  virtual ~RiskFunction() = default;

  virtual std::string_view name() const = 0;

  // Realized risk r(x, y, beta) for every grid beta.
  virtual void realized(const Example& ex, std::span<const double> betas,
                        std::span<double> out) const = 0;

  // Model-implied conditional risk E_{Y ~ s(x)}[r(x, Y, beta)].
  virtual void model_implied(std::span<const double> scores,
                             std::span<const double> betas,
                             std::span<double> out) const = 0;

  virtual bool declares_monotone() const { return true; }
};

// Miscoverage of the top-probability prediction set.
class MiscoverageRisk final : public RiskFunction {
 public:
  std::string_view name() const override { return "miscoverage"; }
  void realized(const Example& ex, std::span<const double> betas,
                std::span<double> out) const override;
  void model_implied(std::span<const double> scores,
                     std::span<const double> betas,
                     std::span<double> out) const override;
};

// False-positive rate of a binary score: x = scores[1] = P(Y = 1 | x).
class FprRisk final : public RiskFunction {
 public:
  std::string_view name() const override { return "fpr"; }
  void realized(const Example& ex, std::span<const double> betas,
                std::span<double> out) const override;
  void model_implied(std::span<const double> scores,
                     std::span<const double> betas,
                     std::span<double> out) const override;
};

// Checks range and beta-monotonicity of both realized and model-implied
// risk on the given examples. Throws InvariantViolation on the first failure.
void validate_risk_contract(const RiskFunction& risk,
                            std::span<const Example> samples,
                            std::span<const double> betas);

}  // namespace avrc
