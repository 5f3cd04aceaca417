#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "avrc/risk.hpp"
#include "avrc/rng.hpp"
#include "avrc/wealth.hpp"

namespace avrc {

// Source of labeled rows for one trial. next() returns false once exhausted;
// the filled Example stays valid until the following call.
class ExampleStream {
 public:
  virtual ~ExampleStream() = default;
  virtual bool next(Example& out) = 0;
};

// X ~ Uniform[0,1], Y | X ~ Bern(X), presented as binary scores (1-X, X).
class SimulationStream final : public ExampleStream {
 public:
  explicit SimulationStream(std::uint64_t seed, std::uint64_t limit = 0);
  bool next(Example& out) override;

 private:
  Rng rng_;
  std::uint64_t limit_;
  std::uint64_t emitted_ = 0;
  std::array<double, 2> scores_{};
};

struct SimulatedPoint {
  double x = 0.0;
  int y = 0;
};

std::vector<SimulatedPoint> simulate_stream(std::uint64_t seed, std::size_t n);

// Population FPR risk of the simulation, (1 - beta)^2 / 2.
double oracle_rho_simulation(double beta);
// Smallest beta with (1 - beta)^2 / 2 <= theta: 1 - sqrt(2 theta).
double simulation_beta_star(double theta);
// E[sigma_beta(X)] = integral_beta^1 sqrt(x (1 - x)) dx in closed form.
double simulation_mean_sigma(double beta);

enum class ScoreFormat { kCsv, kBinary };

// Row-major probabilities with one label per row.
struct ScoreDataset {
  std::size_t num_classes = 0;
  std::vector<double> probs;
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;

  std::size_t rows() const { return labels.size(); }
  Example row(std::size_t i) const {
    return {std::span<const double>(probs).subspan(i * num_classes, num_classes),
            labels[i]};
  }
};

// Magic prefix of the binary score format.
inline constexpr std::array<char, 8> kBinaryMagic = {'A', 'V', 'R', 'C',
                                                    'S', 'C', 'R', '1'};

ScoreDataset read_score_csv(const std::filesystem::path& path);
ScoreDataset read_score_binary(const std::filesystem::path& path);
// kCsv/kBinary chosen by the file's magic bytes.
ScoreFormat detect_score_format(const std::filesystem::path& path);
ScoreDataset ingest_scores(const std::filesystem::path& path, ScoreFormat format);
ScoreDataset ingest_scores(const std::filesystem::path& path);

void write_score_csv(const std::filesystem::path& path, const ScoreDataset& data);
void write_score_binary(const std::filesystem::path& path,
                        const ScoreDataset& data);

// Dirichlet(concentration) score vectors with labels drawn from them, so the
// classifier is calibrated by construction.
ScoreDataset generate_synthetic_scores(std::size_t rows, std::size_t classes,
                                       double concentration, std::uint64_t seed);

// Fisher-Yates permutation of 0..n-1 driven by a seeded stream.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

struct HoldoutSplit {
  std::vector<std::size_t> holdout;
  std::vector<std::size_t> pool;
};

// Random split with `holdout_rows` rows reserved for risk estimation.
HoldoutSplit split_holdout(std::size_t n, std::size_t holdout_rows,
                           std::uint64_t seed);

// Replays `pool` rows of a dataset in a per-trial shuffled order.
class ReplayStream final : public ExampleStream {
 public:
  ReplayStream(const ScoreDataset& data, std::span<const std::size_t> pool,
               std::uint64_t seed);
  bool next(Example& out) override;

 private:
  const ScoreDataset* data_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

// Held-out empirical risk on a beta grid, used in place of the unknown
// population risk for score-file runs.
class EmpiricalRho {
 public:
  EmpiricalRho(const RiskFunction& risk, const ScoreDataset& data,
               std::span<const std::size_t> rows, const BetaGrid& grid);

  // Risk at the largest grid point <= beta.
  double operator()(double beta) const;
  std::span<const double> values() const { return values_; }
  // Smallest grid beta whose held-out risk is at most theta.
  double beta_star(double theta) const;

 private:
  BetaGrid grid_;
  std::vector<double> values_;
};

}  // namespace avrc
