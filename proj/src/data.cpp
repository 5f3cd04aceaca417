#include "avrc/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string_view>

#include "avrc/errors.hpp"

namespace avrc {
namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

double parse_double(std::string_view field, const std::string& ctx) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError(ctx + "cannot parse '" + std::string(field) + "' as a number");
  }
  return v;
}

std::size_t parse_label(std::string_view field, const std::string& ctx) {
  std::size_t v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError(ctx + "cannot parse label '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void check_row(const ScoreDataset& data, std::size_t row, const std::string& ctx) {
  const auto ex = data.row(row);
  if (ex.label >= data.num_classes) {
    throw DataError(ctx + "label " + std::to_string(ex.label) +
                    " out of range for " + std::to_string(data.num_classes) +
                    " classes");
  }
  double sum = 0.0;
  for (double p : ex.scores) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError(ctx + "probability outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg << ctx << "probabilities sum to " << std::setprecision(10) << sum
        << ", outside simplex tolerance";
    throw DataError(msg.str());
  }
}

template <typename T>
T read_le(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw DataError(path.string() + ": truncated binary score file");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  if constexpr (std::is_same_v<T, float>) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(v));
  } else {
    return static_cast<T>(v);
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  std::uint64_t v = 0;
  if constexpr (std::is_same_v<T, float>) {
    v = std::bit_cast<std::uint32_t>(value);
  } else {
    v = static_cast<std::uint64_t>(value);
  }
  std::array<unsigned char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

// Unbiased integer in [0, n) by rejection.
std::uint64_t bounded(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

}  // namespace

SimulationStream::SimulationStream(std::uint64_t seed, std::uint64_t limit)
    : rng_(seed), limit_(limit) {}

bool SimulationStream::next(Example& out) {
  if (limit_ != 0 && emitted_ >= limit_) return false;
  ++emitted_;
  const double x = uniform01(rng_);
  const bool positive = uniform01(rng_) < x;
  scores_ = {1.0 - x, x};
  out.scores = scores_;
  out.label = positive ? 1 : 0;
  return true;
}

std::vector<SimulatedPoint> simulate_stream(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw ConfigError("simulate_stream needs n >= 1");
  SimulationStream stream(seed);
  std::vector<SimulatedPoint> out(n);
  Example ex;
  for (auto& p : out) {
    stream.next(ex);
    p.x = ex.scores[1];
    p.y = static_cast<int>(ex.label);
  }
  return out;
}

double oracle_rho_simulation(double beta) {
  const double b = std::clamp(beta, 0.0, 1.0);
  return 0.5 * (1.0 - b) * (1.0 - b);
}

double simulation_beta_star(double theta) {
  if (theta >= 0.5) return 0.0;
  return 1.0 - std::sqrt(2.0 * theta);
}

double simulation_mean_sigma(double beta) {
  // Antiderivative of sqrt(x - x^2).
  auto F = [](double x) {
    return (2.0 * x - 1.0) / 4.0 * std::sqrt(std::max(x - x * x, 0.0)) +
           std::asin(std::clamp(2.0 * x - 1.0, -1.0, 1.0)) / 8.0;
  };
  const double b = std::clamp(beta, 0.0, 1.0);
  return F(1.0) - F(b);
}

ScoreDataset read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw DataError(where(path, 1) + "header must be id,label,p0,p1,...");
  }
  ScoreDataset data;
  data.num_classes = header.size() - 2;
  for (std::size_t k = 0; k < data.num_classes; ++k) {
    if (header[k + 2] != "p" + std::to_string(k)) {
      throw DataError(where(path, 1) + "expected column p" + std::to_string(k));
    }
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = where(path, lineno) + "row " +
                            std::to_string(data.rows() + 1) + ": ";
    const auto fields = split_csv(line);
    if (fields.size() != data.num_classes + 2) {
      throw DataError(ctx + "expected " + std::to_string(data.num_classes + 2) +
                      " fields, found " + std::to_string(fields.size()));
    }
    data.ids.emplace_back(fields[0]);
    data.labels.push_back(parse_label(fields[1], ctx));
    for (std::size_t k = 0; k < data.num_classes; ++k) {
      data.probs.push_back(parse_double(fields[k + 2], ctx));
    }
    check_row(data, data.rows() - 1, ctx);
  }
  if (data.rows() == 0) throw DataError(path.string() + ": no data rows");
  return data;
}

ScoreDataset read_score_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open score file " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kBinaryMagic) {
    throw DataError(path.string() + ": bad magic bytes for binary score file");
  }
  ScoreDataset data;
  data.num_classes = read_le<std::uint32_t>(in, path);
  const auto rows = read_le<std::uint64_t>(in, path);
  if (data.num_classes == 0) throw DataError(path.string() + ": zero classes");
  data.labels.reserve(rows);
  data.probs.reserve(rows * data.num_classes);
  for (std::uint64_t r = 0; r < rows; ++r) {
    data.labels.push_back(read_le<std::uint32_t>(in, path));
    for (std::size_t k = 0; k < data.num_classes; ++k) {
      data.probs.push_back(static_cast<double>(read_le<float>(in, path)));
    }
    data.ids.push_back(std::to_string(r));
    check_row(data, r, path.string() + ": row " + std::to_string(r + 1) + ": ");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after declared rows");
  }
  return data;
}

ScoreFormat detect_score_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open score file " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  return (in.gcount() == 8 && magic == kBinaryMagic) ? ScoreFormat::kBinary
                                                     : ScoreFormat::kCsv;
}

ScoreDataset ingest_scores(const std::filesystem::path& path, ScoreFormat format) {
  return format == ScoreFormat::kBinary ? read_score_binary(path)
                                        : read_score_csv(path);
}

ScoreDataset ingest_scores(const std::filesystem::path& path) {
  return ingest_scores(path, detect_score_format(path));
}

void write_score_csv(const std::filesystem::path& path, const ScoreDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "id,label";
  for (std::size_t k = 0; k < data.num_classes; ++k) out << ",p" << k;
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    out << (r < data.ids.size() ? data.ids[r] : std::to_string(r)) << ','
        << data.labels[r];
    for (double p : data.row(r).scores) out << ',' << p;
    out << '\n';
  }
}

void write_score_binary(const std::filesystem::path& path,
                        const ScoreDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kBinaryMagic.data(), kBinaryMagic.size());
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.num_classes));
  write_le<std::uint64_t>(out, data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.labels[r]));
    for (double p : data.row(r).scores) write_le<float>(out, static_cast<float>(p));
  }
}

ScoreDataset generate_synthetic_scores(std::size_t rows, std::size_t classes,
                                       double concentration, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("synthetic scores need at least 2 classes");
  if (!(concentration > 0.0)) throw ConfigError("concentration must be positive");
  Rng rng(seed);
  std::gamma_distribution<double> gamma(concentration, 1.0);
  ScoreDataset data;
  data.num_classes = classes;
  data.probs.reserve(rows * classes);
  std::vector<double> draw(classes);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    while (!(sum > 0.0)) {
      sum = 0.0;
      for (auto& g : draw) sum += (g = gamma(rng));
    }
    for (auto& g : draw) g /= sum;
    const double u = uniform01(rng);
    std::size_t label = classes - 1;
    double cum = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      cum += draw[k];
      if (u < cum) {
        label = k;
        break;
      }
    }
    data.probs.insert(data.probs.end(), draw.begin(), draw.end());
    data.labels.push_back(label);
    data.ids.push_back("s" + std::to_string(r));
  }
  return data;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[bounded(rng, i)]);
  }
  return idx;
}

HoldoutSplit split_holdout(std::size_t n, std::size_t holdout_rows,
                           std::uint64_t seed) {
  if (holdout_rows >= n) throw ConfigError("holdout leaves no rows to calibrate on");
  auto idx = shuffled_indices(n, seed);
  HoldoutSplit split;
  split.holdout.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(holdout_rows));
  split.pool.assign(idx.begin() + static_cast<std::ptrdiff_t>(holdout_rows), idx.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  std::sort(split.pool.begin(), split.pool.end());
  return split;
}

ReplayStream::ReplayStream(const ScoreDataset& data,
                           std::span<const std::size_t> pool, std::uint64_t seed)
    : data_(&data) {
  const auto perm = shuffled_indices(pool.size(), seed);
  order_.reserve(pool.size());
  for (std::size_t i : perm) order_.push_back(pool[i]);
}

bool ReplayStream::next(Example& out) {
  if (pos_ >= order_.size()) return false;
  out = data_->row(order_[pos_++]);
  return true;
}

EmpiricalRho::EmpiricalRho(const RiskFunction& risk, const ScoreDataset& data,
                           std::span<const std::size_t> rows, const BetaGrid& grid)
    : grid_(grid), values_(grid.size(), 0.0) {
  if (rows.empty()) throw ConfigError("empirical risk needs at least one row");
  std::vector<double> buf(grid.size());
  for (std::size_t r : rows) {
    risk.realized(data.row(r), grid.points(), buf);
    for (std::size_t i = 0; i < buf.size(); ++i) values_[i] += buf[i];
  }
  for (auto& v : values_) v /= static_cast<double>(rows.size());
}

double EmpiricalRho::operator()(double beta) const {
  return values_[grid_.floor_index(beta)];
}

double EmpiricalRho::beta_star(double theta) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] <= theta) return grid_[i];
  }
  return 1.0;
}

}  // namespace avrc
