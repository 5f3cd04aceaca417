#include "avrc/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "avrc/errors.hpp"
#include "json.hpp"

namespace avrc {
namespace {

using nlohmann::json;

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

double labels_to_target_or_total(const TrialRecord& r, double level) {
  const auto hit = labels_to_threshold(r, level);
  return static_cast<double>(hit ? *hit : r.labels);
}

template <typename T>
T field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("trial record lacks field '") + key + "'");
  return it->get<T>();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

std::string record_to_jsonl(const TrialRecord& r) {
  std::string out;
  for (const auto& s : r.trace) {
    json step = {{"type", "step"},         {"method", r.method},
                 {"trial_id", r.trial_id}, {"t", s.t},
                 {"labels", s.labels},     {"beta_hat", s.beta_hat},
                 {"q", s.q},               {"queried", s.queried},
                 {"bet_max", s.bet_max},   {"bet_at_beta_hat", s.bet_at_beta_hat},
                 {"log_wealth_max", s.log_wealth_max}};
    out += step.dump();
    out += '\n';
  }
  json path = json::array();
  for (const auto& c : r.path) path.push_back({c.t, c.labels, c.beta_hat});
  json trial = {{"type", "trial"},
                {"method", r.method},
                {"trial_id", r.trial_id},
                {"seed", r.seed},
                {"final_beta_hat", r.final_beta_hat},
                {"steps", r.steps},
                {"labels", r.labels},
                {"query_fraction", r.query_fraction},
                {"mean_q", r.mean_q},
                {"min_q", r.min_q},
                {"partial", r.partial},
                {"step_capped", r.step_capped},
                {"violated", r.violated},
                {"first_violation_step", r.first_violation_step},
                {"checkpoint_every", r.checkpoint_every},
                {"curve", r.curve},
                {"path", path}};
  out += trial.dump();
  out += '\n';
  return out;
}

TrialRecord record_from_json(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed trial record: ") + e.what());
  }
  try {
    if (field<std::string>(j, "type") != "trial") {
      throw DataError("expected an object of type 'trial'");
    }
    TrialRecord r;
    r.method = field<std::string>(j, "method");
    r.trial_id = field<std::uint64_t>(j, "trial_id");
    r.seed = field<std::uint64_t>(j, "seed");
    r.final_beta_hat = field<double>(j, "final_beta_hat");
    r.steps = field<std::uint64_t>(j, "steps");
    r.labels = field<std::uint64_t>(j, "labels");
    r.query_fraction = field<double>(j, "query_fraction");
    r.mean_q = field<double>(j, "mean_q");
    r.min_q = field<double>(j, "min_q");
    r.partial = field<bool>(j, "partial");
    r.step_capped = field<bool>(j, "step_capped");
    r.violated = field<bool>(j, "violated");
    r.first_violation_step = field<std::int64_t>(j, "first_violation_step");
    r.checkpoint_every = field<std::uint64_t>(j, "checkpoint_every");
    r.curve = field<std::vector<double>>(j, "curve");
    for (const auto& c : field<json>(j, "path")) {
      if (!c.is_array() || c.size() != 3) throw DataError("malformed path entry");
      r.path.push_back({c[0].get<std::uint64_t>(), c[1].get<std::uint64_t>(),
                        c[2].get<double>()});
    }
    if (r.path.empty() || r.checkpoint_every == 0) {
      throw DataError("trial record has an empty path or zero checkpoint spacing");
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed trial record: ") + e.what());
  }
}

std::vector<TrialRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.find("\"type\":\"step\"") != std::string::npos) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw DataError(path.string() + ": no trial records");
  return out;
}

Report build_report(std::vector<TrialRecord> records, double target_level) {
  Report rep;
  rep.target_level = target_level;
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) {
      order.push_back(r.method);
    }
  }
  const auto rank = [&](const std::string& m) {
    return std::find(order.begin(), order.end(), m) - order.begin();
  };
  std::stable_sort(records.begin(), records.end(), [&](const auto& a, const auto& b) {
    const auto ra = rank(a.method), rb = rank(b.method);
    return ra != rb ? ra < rb : a.trial_id < b.trial_id;
  });

  for (const auto& m : order) {
    MethodSummary s;
    s.method = m;
    std::vector<double> finals, fractions, to_target;
    std::map<std::size_t, std::vector<double>> curve;
    std::uint64_t spacing = 0;
    double labels = 0.0, steps = 0.0;
    for (const auto& r : records) {
      if (r.method != m) continue;
      ++s.trials;
      if (r.violated) ++s.violations;
      if (r.partial) ++s.partial_trials;
      finals.push_back(r.final_beta_hat);
      fractions.push_back(r.query_fraction);
      to_target.push_back(labels_to_target_or_total(r, target_level));
      if (labels_to_threshold(r, target_level)) ++s.reached_target;
      labels += static_cast<double>(r.labels);
      steps += static_cast<double>(r.steps);
      if (spacing != 0 && spacing != r.checkpoint_every) {
        throw DataError("records of method '" + m + "' disagree on checkpoint spacing");
      }
      spacing = r.checkpoint_every;
      for (std::size_t k = 0; k < r.curve.size(); ++k) curve[k].push_back(r.curve[k]);
    }
    const double n = static_cast<double>(s.trials);
    s.violation_rate = static_cast<double>(s.violations) / n;
    s.violation_se = std::sqrt(s.violation_rate * (1.0 - s.violation_rate) / n);
    const auto fm = moments(finals);
    s.mean_final_beta = fm.mean;
    s.sd_final_beta = fm.sd;
    s.min_final_beta = *std::min_element(finals.begin(), finals.end());
    s.max_final_beta = *std::max_element(finals.begin(), finals.end());
    s.mean_query_fraction = moments(fractions).mean;
    s.min_query_fraction = *std::min_element(fractions.begin(), fractions.end());
    s.max_query_fraction = *std::max_element(fractions.begin(), fractions.end());
    s.mean_labels = labels / n;
    s.mean_steps = steps / n;
    const auto tm = moments(to_target);
    s.mean_labels_to_target = tm.mean;
    s.se_labels_to_target = tm.sd / std::sqrt(n);
    rep.methods.push_back(s);

    for (const auto& [k, values] : curve) {
      const auto cm = moments(values);
      const double half = 1.96 * cm.sd / std::sqrt(static_cast<double>(values.size()));
      CurvePoint p;
      p.method = m;
      p.labels = k * spacing;
      p.trials = values.size();
      p.mean_beta_hat = cm.mean;
      p.ci_low = cm.mean - half;
      p.ci_high = cm.mean + half;
      rep.curve.push_back(p);
    }
  }
  rep.records = std::move(records);
  return rep;
}

PairedDifference paired_labels_to_target(const Report& report, std::string_view a,
                                         std::string_view b) {
  std::map<std::uint64_t, double> va;
  for (const auto& r : report.records) {
    if (r.method == a) va[r.trial_id] = labels_to_target_or_total(r, report.target_level);
  }
  std::vector<double> diffs;
  for (const auto& r : report.records) {
    if (r.method != b) continue;
    const auto it = va.find(r.trial_id);
    if (it == va.end()) continue;
    diffs.push_back(it->second - labels_to_target_or_total(r, report.target_level));
  }
  PairedDifference d;
  d.pairs = diffs.size();
  if (diffs.empty()) return d;
  const auto m = moments(diffs);
  d.mean = m.mean;
  d.se = m.sd / std::sqrt(static_cast<double>(diffs.size()));
  return d;
}

std::string summary_json(const Report& report, std::string_view extra_json) {
  json methods = json::array();
  for (const auto& s : report.methods) {
    methods.push_back({{"method", s.method},
                       {"trials", s.trials},
                       {"violations", s.violations},
                       {"violation_rate", s.violation_rate},
                       {"violation_se", s.violation_se},
                       {"mean_final_beta_hat", s.mean_final_beta},
                       {"sd_final_beta_hat", s.sd_final_beta},
                       {"min_final_beta_hat", s.min_final_beta},
                       {"max_final_beta_hat", s.max_final_beta},
                       {"mean_query_fraction", s.mean_query_fraction},
                       {"min_query_fraction", s.min_query_fraction},
                       {"max_query_fraction", s.max_query_fraction},
                       {"mean_labels", s.mean_labels},
                       {"mean_steps", s.mean_steps},
                       {"partial_trials", s.partial_trials},
                       {"mean_labels_to_target", s.mean_labels_to_target},
                       {"se_labels_to_target", s.se_labels_to_target},
                       {"reached_target", s.reached_target}});
  }
  json out = {{"target_level", report.target_level}, {"methods", methods}};
  json extra = json::parse(extra_json);
  for (auto it = extra.begin(); it != extra.end(); ++it) out[it.key()] = it.value();
  return out.dump(2) + "\n";
}

std::string format_table(const Report& report) {
  std::ostringstream os;
  os << std::left << std::setw(11) << "method" << std::right << std::setw(7) << "trials"
     << std::setw(11) << "viol.rate" << std::setw(12) << "final.beta" << std::setw(9)
     << "sd" << std::setw(11) << "query.frac" << std::setw(13) << "labels.to."
     << fmt(report.target_level, 3) << '\n';
  for (const auto& s : report.methods) {
    os << std::left << std::setw(11) << s.method << std::right << std::setw(7)
       << s.trials << std::setw(11) << fmt(s.violation_rate, 4) << std::setw(12)
       << fmt(s.mean_final_beta, 5) << std::setw(9) << fmt(s.sd_final_beta, 3)
       << std::setw(11) << fmt(s.mean_query_fraction, 4) << std::setw(13)
       << fmt(s.mean_labels_to_target, 5) << " +/- " << fmt(s.se_labels_to_target, 3)
       << '\n';
  }
  return os.str();
}

void write_report_csvs(const std::filesystem::path& dir, const Report& report) {
  const auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    out << std::setprecision(10);
    return out;
  };
  {
    auto out = open("violation_rate.csv");
    out << "method,trials,violations,rate,ci_low,ci_high\n";
    for (const auto& s : report.methods) {
      const double half = 1.96 * s.violation_se;
      out << s.method << ',' << s.trials << ',' << s.violations << ','
          << s.violation_rate << ',' << std::max(0.0, s.violation_rate - half) << ','
          << std::min(1.0, s.violation_rate + half) << '\n';
    }
  }
  {
    auto out = open("final_beta.csv");
    out << "method,trial_id,final_beta_hat,labels,steps,query_fraction,violated\n";
    for (const auto& r : report.records) {
      out << r.method << ',' << r.trial_id << ',' << r.final_beta_hat << ','
          << r.labels << ',' << r.steps << ',' << r.query_fraction << ','
          << (r.violated ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open("beta_curve.csv");
    out << "method,labels,trials,mean_beta_hat,ci_low,ci_high\n";
    for (const auto& p : report.curve) {
      out << p.method << ',' << p.labels << ',' << p.trials << ',' << p.mean_beta_hat
          << ',' << p.ci_low << ',' << p.ci_high << '\n';
    }
  }
}

}  // namespace avrc
