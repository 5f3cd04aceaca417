// avrc: run calibration experiments and turn their artifacts into reports.
//
//   avrc simulate  [--config FILE] [flags]
//   avrc calibrate SCORES [--format auto|csv|binary] [--holdout N] [flags]
//   avrc report    DIR
//   avrc generate  OUT --rows N --classes K [--concentration C] [--format csv|binary]
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 invariant abort.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avrc/data.hpp"
#include "avrc/errors.hpp"
#include "avrc/harness.hpp"
#include "avrc/report.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

const double kTargetOffset = 0.65 - avrc::simulation_beta_star(0.1);

struct RunOptions {
  std::size_t trials = 100;
  std::uint64_t max_labels = 0;  // 0: subcommand default
  std::uint64_t max_steps = 0;
  std::string methods = "all,oblivious,pretrain,learned";
  double theta = 0.1;
  double alpha = 0.05;
  double budget = 0.3;
  std::size_t grid_size = 1000;
  double q_floor = 0.2;
  std::size_t dual_window = 100;
  std::size_t bins = 10;
  std::string bettor = "ons";
  double constant_bet = 1.0;
  std::uint64_t checkpoint_every = 50;
  double target = 0.65;
  std::uint64_t seed = 0;
  std::string out_dir = "avrc-out";
  bool trace = false;
  std::size_t jobs = 0;
};

std::vector<std::string> split_methods(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw avrc::ConfigError("methods: empty method list");
  return out;
}

avrc::ExperimentConfig experiment_from(const RunOptions& o, std::uint64_t default_labels) {
  avrc::ExperimentConfig ec;
  auto& b = ec.base;
  b.theta = o.theta;
  b.alpha = o.alpha;
  b.budget = o.budget;
  b.grid_size = o.grid_size;
  b.q_floor = o.q_floor;
  b.dual_window = o.dual_window;
  b.learned.bins = o.bins;
  b.bettor = avrc::parse_bettor_kind(o.bettor);
  b.constant_bet = o.constant_bet;
  b.checkpoint_every = o.checkpoint_every;
  b.stop.max_labels = o.max_labels != 0 ? o.max_labels : default_labels;
  b.stop.max_steps = o.max_steps;
  b.seed = o.seed;
  b.trace = o.trace;
  ec.methods = split_methods(o.methods);
  ec.trials = o.trials;
  ec.jobs = o.jobs;
  for (const auto& m : ec.methods) {
    auto probe = b;
    probe.apply_method(m);
    probe.validate();
  }
  if (ec.trials == 0) throw avrc::ConfigError("trials: must be positive");
  return ec;
}

json config_snapshot(const avrc::ExperimentConfig& ec, double target) {
  const auto& b = ec.base;
  return {{"methods", ec.methods},
          {"trials", ec.trials},
          {"theta", b.theta},
          {"alpha", b.alpha},
          {"budget", b.budget},
          {"grid_size", b.grid_size},
          {"q_floor", b.q_floor},
          {"dual_window", b.dual_window},
          {"bins", b.learned.bins},
          {"learned_grid_resolution", b.learned.grid_resolution},
          {"cocob_alpha", b.learned.cocob_alpha},
          {"bettor", std::string(avrc::to_string(b.bettor))},
          {"constant_bet", b.constant_bet},
          {"max_labels", b.stop.max_labels},
          {"max_steps", b.stop.step_cap()},
          {"checkpoint_every", b.checkpoint_every},
          {"target", target},
          {"seed", b.seed},
          {"trace", b.trace}};
}

json seed_roster(const avrc::ExperimentConfig& ec) {
  json data = json::array(), policy = json::array();
  for (std::size_t k = 0; k < ec.trials; ++k) {
    data.push_back(avrc::derive_seed(ec.base.seed, avrc::kDataStream, k));
    policy.push_back(avrc::derive_seed(ec.base.seed, avrc::kPolicyStream, k));
  }
  return {{"root", ec.base.seed}, {"data", data}, {"policy", policy}};
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw avrc::DataError("cannot write " + path.string());
  out << text;
}

const std::vector<std::string> kArtifacts = {
    "manifest.json",       "trials.jsonl",   "summary.json", "summary.txt",
    "violation_rate.csv",  "final_beta.csv", "beta_curve.csv"};

// Report artifacts derived purely from the records.
avrc::Report emit_report(const fs::path& dir, std::vector<avrc::TrialRecord> records,
                         double target, const json& extra) {
  auto report = avrc::build_report(std::move(records), target);
  avrc::write_report_csvs(dir, report);
  const auto table = avrc::format_table(report);
  write_text(dir / "summary.txt", table);
  if (!extra.is_null()) write_text(dir / "summary.json", avrc::summary_json(report, extra.dump()));
  std::cout << table;
  return report;
}

int run_and_report(const std::string& command, const avrc::ExperimentConfig& ec,
                   const avrc::DataSource& source, double target, json extra,
                   json source_info) {
  const fs::path dir = fs::path(extra.value("out_dir", std::string("avrc-out")));
  extra.erase("out_dir");
  fs::create_directories(dir);

  json manifest = {{"tool", "avrc"},
                   {"version", AVRC_VERSION},
                   {"command", command},
                   {"config", config_snapshot(ec, target)},
                   {"source", source_info},
                   {"seed_roster", seed_roster(ec)},
                   {"artifacts", kArtifacts},
                   {"started_utc", utc_now()},
                   {"status", "running"}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  const auto t0 = std::chrono::steady_clock::now();
  auto records = avrc::run_experiment(ec, source);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream out(dir / "trials.jsonl", std::ios::binary);
    if (!out) throw avrc::DataError("cannot write " + (dir / "trials.jsonl").string());
    for (const auto& r : records) out << avrc::record_to_jsonl(r);
  }
  double trial_seconds = 0.0;
  for (const auto& r : records) trial_seconds += r.runtime_seconds;

  extra["config"] = config_snapshot(ec, target);
  emit_report(dir, std::move(records), target, extra);

  manifest["status"] = "complete";
  manifest["finished_utc"] = utc_now();
  manifest["wall_clock_seconds"] = elapsed;
  manifest["trial_cpu_seconds"] = trial_seconds;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "artifacts written to " << dir.string() << "\n";
  return 0;
}

void add_run_options(CLI::App& app, RunOptions& o) {
  app.add_option("--trials", o.trials, "Trials per method")->capture_default_str();
  app.add_option("--max-labels", o.max_labels,
                 "Labels per trial (simulate 2500, calibrate 3000)");
  app.add_option("--max-steps", o.max_steps, "Hard step cap (default 50 x labels)");
  app.add_option("--methods", o.methods, "Comma-separated methods")->capture_default_str();
  app.add_option("--theta", o.theta, "Risk bound")->capture_default_str();
  app.add_option("--alpha", o.alpha, "Error level")->capture_default_str();
  app.add_option("--budget", o.budget, "Expected label budget B")->capture_default_str();
  app.add_option("--grid-size", o.grid_size, "Beta grid resolution")->capture_default_str();
  app.add_option("--q-floor", o.q_floor, "Query floor of adaptive policies")
      ->capture_default_str();
  app.add_option("--dual-window", o.dual_window, "Budget dual averaging window")
      ->capture_default_str();
  app.add_option("--bins", o.bins, "Feature bins of the learned regressors")
      ->capture_default_str();
  app.add_option("--bettor", o.bettor, "ons or constant")->capture_default_str();
  app.add_option("--constant-bet", o.constant_bet, "Bet for --bettor constant")
      ->capture_default_str();
  app.add_option("--checkpoint-every", o.checkpoint_every, "Curve spacing in labels")
      ->capture_default_str();
  app.add_option("--target", o.target, "Beta level for labels-to-target")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "Root seed")->capture_default_str();
  app.add_option("--out-dir", o.out_dir, "Artifact directory")
      ->envname("AVRC_OUT_DIR")
      ->capture_default_str();
  app.add_flag("--trace", o.trace, "Write one JSON object per step");
  app.add_option("--jobs", o.jobs, "Worker threads (0: all cores)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active, anytime-valid risk-controlling calibration"};
  app.set_version_flag("--version", std::string(AVRC_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Key/value config file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunOptions opts;
  add_run_options(app, opts);

  auto* simulate = app.add_subcommand("simulate", "Simulation experiment");

  auto* calibrate = app.add_subcommand("calibrate", "Replay a score file");
  std::string scores_path, format = "auto";
  std::size_t holdout = 0;
  calibrate->add_option("scores", scores_path, "Score file (CSV or binary)")->required();
  calibrate->add_option("--format", format, "auto, csv or binary")
      ->check(CLI::IsMember({"auto", "csv", "binary"}));
  calibrate->add_option("--holdout", holdout,
                        "Held-out rows for risk estimation (default min(1e5, n/2))");

  auto* report = app.add_subcommand("report", "Rebuild reports from artifacts");
  std::string report_dir;
  report->add_option("dir", report_dir, "Artifact directory")->required();

  auto* generate = app.add_subcommand("generate", "Write a synthetic score file");
  std::string gen_out, gen_format = "csv";
  std::size_t gen_rows = 20000, gen_classes = 10;
  double gen_conc = 0.3;
  generate->add_option("out", gen_out, "Output path")->required();
  generate->add_option("--rows", gen_rows)->capture_default_str();
  generate->add_option("--classes", gen_classes)->capture_default_str();
  generate->add_option("--concentration", gen_conc, "Dirichlet concentration")
      ->capture_default_str();
  generate->add_option("--format", gen_format)
      ->check(CLI::IsMember({"csv", "binary"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) {
      auto ec = experiment_from(opts, 2500);
      const double beta_star = avrc::simulation_beta_star(ec.base.theta);
      json extra = {{"out_dir", opts.out_dir},
                    {"source", "simulation"},
                    {"beta_star", beta_star}};
      return run_and_report("simulate", ec, avrc::simulation_source(), opts.target,
                            extra, {{"kind", "simulation"}});
    }
    if (*calibrate) {
      auto ec = experiment_from(opts, 3000);
      if (!fs::exists(scores_path)) {
        throw avrc::DataError("score file not found: " + scores_path);
      }
      const auto data =
          format == "auto" ? avrc::ingest_scores(scores_path)
                           : avrc::ingest_scores(scores_path, format == "csv"
                                                                  ? avrc::ScoreFormat::kCsv
                                                                  : avrc::ScoreFormat::kBinary);
      const auto rows = holdout != 0 ? holdout : avrc::default_holdout_rows(data.rows());
      const auto grid = avrc::BetaGrid::uniform(ec.base.grid_size);
      const auto setup = avrc::prepare_scores(data, grid, ec.base.seed, rows);
      const double beta_star = setup.rho.beta_star(ec.base.theta);
      // Without an explicit target, use the same offset above beta* as the
      // simulation default (0.65 against 1 - sqrt(0.2)).
      double target = opts.target;
      if (app.get_option("--target")->count() == 0) {
        target = std::min(1.0, beta_star + kTargetOffset);
      }
      json extra = {{"out_dir", opts.out_dir},
                    {"source", scores_path},
                    {"holdout_rows", setup.split.holdout.size()},
                    {"pool_rows", setup.split.pool.size()},
                    {"beta_star_holdout", beta_star}};
      json info = {{"kind", "scores"},
                   {"path", scores_path},
                   {"rows", data.rows()},
                   {"classes", data.num_classes},
                   {"holdout_rows", setup.split.holdout.size()}};
      return run_and_report("calibrate", ec, avrc::score_source(data, setup), target,
                            extra, info);
    }
    if (*report) {
      const fs::path dir(report_dir);
      if (!fs::is_directory(dir)) throw avrc::DataError("not a directory: " + report_dir);
      if (!fs::exists(dir / "trials.jsonl")) {
        throw avrc::DataError("missing artifact " + (dir / "trials.jsonl").string());
      }
      double target = opts.target;
      if (fs::exists(dir / "manifest.json")) {
        std::ifstream in(dir / "manifest.json");
        try {
          const auto m = json::parse(in);
          target = m.at("config").value("target", target);
        } catch (const json::exception& e) {
          throw avrc::DataError("corrupt manifest.json: " + std::string(e.what()));
        }
      }
      emit_report(dir, avrc::read_records(dir / "trials.jsonl"), target, json());
      return 0;
    }
    if (*generate) {
      const auto data = avrc::generate_synthetic_scores(gen_rows, gen_classes, gen_conc,
                                                        opts.seed);
      if (gen_format == "csv") {
        avrc::write_score_csv(gen_out, data);
      } else {
        avrc::write_score_binary(gen_out, data);
      }
      std::cout << "wrote " << data.rows() << " rows to " << gen_out << "\n";
      return 0;
    }
  } catch (const avrc::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const avrc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const avrc::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return 0;
}
