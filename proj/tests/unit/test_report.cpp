#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "avrc/errors.hpp"
#include "avrc/report.hpp"

using namespace avrc;
namespace fs = std::filesystem;

namespace {

TrialRecord fake(const std::string& method, std::uint64_t id, double final_beta,
                 std::uint64_t hit_labels) {
  TrialRecord r;
  r.method = method;
  r.trial_id = id;
  r.labels = 200;
  r.steps = 600;
  r.query_fraction = 1.0 / 3.0;
  r.final_beta_hat = final_beta;
  r.path = {{0, 0, 1.0}, {hit_labels * 3, hit_labels, final_beta}};
  r.checkpoint_every = 100;
  r.curve = {1.0, hit_labels <= 100 ? final_beta : 1.0, final_beta};
  return r;
}

}  // namespace

TEST(RecordJson, RoundTrip) {
  auto r = fake("learned", 3, 0.61, 120);
  r.violated = true;
  r.first_violation_step = 360;
  r.trace.push_back({});
  const auto text = record_to_jsonl(r);
  std::istringstream lines(text);
  std::string step, trial;
  std::getline(lines, step);
  std::getline(lines, trial);
  EXPECT_NE(step.find("\"type\":\"step\""), std::string::npos);
  const auto back = record_from_json(trial);
  EXPECT_EQ(back.method, "learned");
  EXPECT_EQ(back.final_beta_hat, 0.61);
  EXPECT_TRUE(back.violated);
  EXPECT_EQ(back.path.size(), 2u);
  auto copy = back;
  copy.trace = r.trace;
  EXPECT_EQ(record_to_jsonl(copy), text);
  EXPECT_THROW(record_from_json("{\"type\":\"trial\"}"), DataError);
  EXPECT_THROW(record_from_json("not json"), DataError);
}

TEST(Report, SummariesAndCurve) {
  std::vector<TrialRecord> recs = {fake("b", 1, 0.6, 80), fake("a", 0, 0.7, 150),
                                   fake("b", 0, 0.62, 60), fake("a", 1, 0.66, 100)};
  const auto rep = build_report(recs, 0.65);
  ASSERT_EQ(rep.methods.size(), 2u);
  EXPECT_EQ(rep.methods[0].method, "b");
  EXPECT_EQ(rep.records[0].trial_id, 0u);
  EXPECT_NEAR(rep.methods[0].mean_final_beta, 0.61, 1e-12);
  // "a" reaches 0.65 in neither trial, so both count with total labels.
  EXPECT_EQ(rep.methods[1].reached_target, 0u);
  EXPECT_NEAR(rep.methods[1].mean_labels_to_target, 200.0, 1e-12);
  EXPECT_EQ(rep.curve.size(), 6u);
  EXPECT_EQ(rep.curve[1].labels, 100u);
  EXPECT_NEAR(rep.curve[1].mean_beta_hat, 0.61, 1e-12);

  const auto diff = paired_labels_to_target(rep, "a", "b");
  EXPECT_EQ(diff.pairs, 2u);
  EXPECT_NEAR(diff.mean, 200.0 - 70.0, 1e-12);
}

TEST(Report, CsvsAreStable) {
  const auto dir = fs::temp_directory_path() / "avrc_report_unit";
  fs::create_directories(dir);
  std::vector<TrialRecord> recs = {fake("x", 0, 0.6, 80), fake("x", 1, 0.7, 150)};
  write_report_csvs(dir, build_report(recs));
  std::ifstream in(dir / "beta_curve.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "method,labels,trials,mean_beta_hat,ci_low,ci_high");
  const auto read_all = [&](const char* f) {
    std::ifstream s(dir / f);
    return std::string(std::istreambuf_iterator<char>(s), {});
  };
  const auto first = read_all("violation_rate.csv") + read_all("final_beta.csv");
  std::reverse(recs.begin(), recs.end());
  write_report_csvs(dir, build_report(recs));
  EXPECT_EQ(read_all("violation_rate.csv") + read_all("final_beta.csv"), first);
  EXPECT_NE(summary_json(build_report(recs)).find("\"mean_final_beta_hat\""),
            std::string::npos);
}
