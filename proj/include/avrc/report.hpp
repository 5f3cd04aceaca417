#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avrc/harness.hpp"

namespace avrc {

// JSON-lines encoding of trial records. A record serializes to its step
// objects (type "step", only when traced) followed by one object of type
// "trial". Runtime is never written, so equal records give equal bytes.
std::string record_to_jsonl(const TrialRecord& record);
// Parses one "trial" object. Throws DataError on malformed input.
TrialRecord record_from_json(std::string_view line);
// Reads every "trial" object of a trials file, skipping step objects.
std::vector<TrialRecord> read_records(const std::filesystem::path& path);

struct MethodSummary {
  std::string method;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  double violation_se = 0.0;
  double mean_final_beta = 0.0;
  double sd_final_beta = 0.0;
  double min_final_beta = 1.0;
  double max_final_beta = 1.0;
  double mean_query_fraction = 0.0;
  double min_query_fraction = 0.0;
  double max_query_fraction = 0.0;
  double mean_labels = 0.0;
  double mean_steps = 0.0;
  std::size_t partial_trials = 0;
  // Labels at which beta-hat first reached the target level; trials that
  // never reach it count with their total labels.
  double mean_labels_to_target = 0.0;
  double se_labels_to_target = 0.0;
  std::size_t reached_target = 0;
};

struct CurvePoint {
  std::string method;
  std::uint64_t labels = 0;
  std::size_t trials = 0;
  double mean_beta_hat = 1.0;
  double ci_low = 1.0;   // pointwise normal 95% interval
  double ci_high = 1.0;
};

struct Report {
  double target_level = 0.65;
  std::vector<MethodSummary> methods;  // first-appearance order
  std::vector<CurvePoint> curve;
  std::vector<TrialRecord> records;    // sorted by (method order, trial id)
};

// Pure function of the records. Records are sorted by trial id within each
// method, so the result does not depend on completion order.
Report build_report(std::vector<TrialRecord> records, double target_level = 0.65);

// Paired difference of labels-to-target between two methods over the trial
// ids both contain: mean(a - b) and its standard error.
struct PairedDifference {
  std::size_t pairs = 0;
  double mean = 0.0;
  double se = 0.0;
};
PairedDifference paired_labels_to_target(const Report& report, std::string_view a,
                                         std::string_view b);

std::string summary_json(const Report& report, std::string_view extra_json = "{}");
std::string format_table(const Report& report);

// violation_rate.csv, final_beta.csv and beta_curve.csv.
void write_report_csvs(const std::filesystem::path& dir, const Report& report);

}  // namespace avrc
