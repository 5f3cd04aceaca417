#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "avrc/betting.hpp"
#include "avrc/data.hpp"
#include "avrc/errors.hpp"
#include "avrc/harness.hpp"
#include "avrc/policy.hpp"
#include "avrc/predictor.hpp"
#include "avrc/report.hpp"
#include "avrc/risk.hpp"
#include "avrc/wealth.hpp"

namespace py = pybind11;
using namespace avrc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw ConfigError("expected a 1-d array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

py::array_t<double> to_array(std::span<const double> v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

StepObservation observation(const Array& bets, std::optional<Array>& risk,
                            std::optional<Array>& predicted, double q, bool queried,
                            double q_min) {
  StepObservation obs;
  obs.bets = view(bets);
  if (risk) obs.risk = view(*risk);
  if (predicted) obs.predicted = view(*predicted);
  obs.query_prob = q;
  obs.queried = queried;
  obs.q_min = q_min;
  return obs;
}

}  // namespace

PYBIND11_MODULE(_avrc, m) {
  m.doc() = "Active anytime-valid risk-controlling calibration (C++ core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  // risk
  m.def(
      "build_prediction_set",
      [](std::vector<double> probs, double beta) {
        const auto set = build_prediction_set(ScoreVector(std::move(probs)), beta);
        return py::make_tuple(set.gamma, set.members);
      },
      py::arg("probs"), py::arg("beta"),
      "Returns (gamma, members) of the top-probability set at beta.");
  m.def(
      "miscoverage_risk",
      [](std::vector<double> probs, std::size_t y, double beta) {
        return miscoverage_risk(ScoreVector(std::move(probs)), y, beta);
      },
      py::arg("probs"), py::arg("label"), py::arg("beta"));
  m.def("fpr_risk", &fpr_risk, py::arg("x"), py::arg("y"), py::arg("beta"));

  // wealth
  py::class_<BetaGrid>(m, "BetaGrid")
      .def(py::init<std::vector<double>>(), py::arg("points"))
      .def_static("uniform", &BetaGrid::uniform, py::arg("resolution"))
      .def_property_readonly("points", [](const BetaGrid& g) { return to_array(g.points()); })
      .def("floor_index", &BetaGrid::floor_index)
      .def("__len__", &BetaGrid::size);

  m.def("validity_cap", &validity_cap, py::arg("q_min"), py::arg("theta"));
  m.def("extract_beta_hat_index", [](const std::vector<std::uint8_t>& rejected) {
    return extract_beta_hat_index(rejected);
  });

  py::class_<WealthGrid>(m, "WealthGrid")
      .def(py::init<BetaGrid, double>(), py::arg("grid"), py::arg("alpha"))
      .def(
          "update_plain",
          [](WealthGrid& w, double theta, const Array& bets, const Array& risk) {
            w.update_plain(theta, view(bets), view(risk));
          },
          py::arg("theta"), py::arg("bets"), py::arg("risk"))
      .def(
          "update_active",
          [](WealthGrid& w, double theta, const Array& bets, std::optional<Array> risk,
             double q, bool queried, double q_min) {
            std::optional<Array> none;
            w.update_active(theta, observation(bets, risk, none, q, queried, q_min));
          },
          py::arg("theta"), py::arg("bets"), py::arg("risk"), py::arg("q"),
          py::arg("queried"), py::arg("q_min"))
      .def(
          "update_predicted",
          [](WealthGrid& w, double theta, const Array& bets, std::optional<Array> risk,
             std::optional<Array> predicted, double q, bool queried, double q_min) {
            w.update_predicted(theta,
                               observation(bets, risk, predicted, q, queried, q_min));
          },
          py::arg("theta"), py::arg("bets"), py::arg("risk"), py::arg("predicted"),
          py::arg("q"), py::arg("queried"), py::arg("q_min"))
      .def_property_readonly("log_wealth",
                             [](const WealthGrid& w) { return to_array(w.log_wealth()); })
      .def_property_readonly("rejected",
                             [](const WealthGrid& w) {
                               const auto f = w.rejection_flags();
                               return std::vector<bool>(f.begin(), f.end());
                             })
      .def_property_readonly("beta_hat", &WealthGrid::beta_hat)
      .def_property_readonly("step", &WealthGrid::step);

  // betting
  m.def("surrogate_cap", &surrogate_cap, py::arg("q_min"), py::arg("theta"));
  m.def("oracle_lambda_star", &oracle_lambda_star, py::arg("theta"), py::arg("rho"),
        py::arg("mean_sigma"), py::arg("var_r"), py::arg("budget"));
  m.def("oracle_growth_bound", &oracle_growth_bound, py::arg("theta"), py::arg("rho"),
        py::arg("mean_sigma"), py::arg("var_r"), py::arg("budget"));

  py::class_<OnsBettor>(m, "OnsBettor")
      .def(py::init([](std::size_t n, double theta) { return OnsBettor(n, theta); }),
           py::arg("grid_size"), py::arg("theta"))
      .def("next_bet",
           [](OnsBettor& b, double q_min) { return to_array(b.next_bet(q_min)); })
      .def("observe_payoff",
           [](OnsBettor& b, const Array& g) { b.observe_payoff(view(g)); })
      .def("regret_estimate", &OnsBettor::regret_estimate)
      .def("best_fixed_bet", &OnsBettor::best_fixed_bet);

  // policy
  m.def(
      "oracle_optimal_policy",
      [](std::function<double(double)> sigma, double budget, std::size_t nodes) {
        const auto p = oracle_optimal_policy(std::move(sigma), budget, nodes);
        return py::make_tuple(py::cpp_function([p](double x) { return p(x); }),
                              p.mean_sigma(), p.max_value());
      },
      py::arg("sigma"), py::arg("budget"), py::arg("nodes") = 10001,
      "Returns (q_star, mean_sigma, max_q).");

  // predictor
  m.def(
      "pretrain_risk",
      [](std::vector<double> probs, double beta) {
        return pretrain_risk(ScoreVector(std::move(probs)), beta);
      },
      py::arg("probs"), py::arg("beta"));
  m.def(
      "pretrain_sigma",
      [](std::vector<double> probs, double beta) {
        return pretrain_sigma(ScoreVector(std::move(probs)), beta);
      },
      py::arg("probs"), py::arg("beta"));

  // harness
  m.def("oracle_rho_simulation", &oracle_rho_simulation, py::arg("beta"));
  m.def("simulation_beta_star", &simulation_beta_star, py::arg("theta"));
  m.def("simulation_mean_sigma", &simulation_mean_sigma, py::arg("beta"));
  m.def(
      "simulate_stream",
      [](std::uint64_t seed, std::size_t n) {
        const auto pts = simulate_stream(seed, n);
        py::array_t<double> x(static_cast<py::ssize_t>(n));
        py::array_t<int> y(static_cast<py::ssize_t>(n));
        auto xv = x.mutable_unchecked<1>();
        auto yv = y.mutable_unchecked<1>();
        for (std::size_t i = 0; i < n; ++i) {
          xv(i) = pts[i].x;
          yv(i) = pts[i].y;
        }
        return py::make_tuple(x, y);
      },
      py::arg("seed"), py::arg("n"));

  py::class_<TrialConfig>(m, "TrialConfig")
      .def(py::init([](const std::string& method) { return TrialConfig::for_method(method); }),
           py::arg("method") = "all")
      .def_readwrite("theta", &TrialConfig::theta)
      .def_readwrite("alpha", &TrialConfig::alpha)
      .def_readwrite("budget", &TrialConfig::budget)
      .def_readwrite("grid_size", &TrialConfig::grid_size)
      .def_readwrite("q_floor", &TrialConfig::q_floor)
      .def_readwrite("seed", &TrialConfig::seed)
      .def_readwrite("trial_id", &TrialConfig::trial_id)
      .def_readwrite("checkpoint_every", &TrialConfig::checkpoint_every)
      .def_readwrite("trace", &TrialConfig::trace)
      .def_property(
          "max_labels", [](const TrialConfig& c) { return c.stop.max_labels; },
          [](TrialConfig& c, std::uint64_t v) { c.stop.max_labels = v; })
      .def_property(
          "max_steps", [](const TrialConfig& c) { return c.stop.max_steps; },
          [](TrialConfig& c, std::uint64_t v) { c.stop.max_steps = v; })
      .def_property_readonly("method", [](const TrialConfig& c) { return c.method; })
      .def("validate", &TrialConfig::validate);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("method", &TrialRecord::method)
      .def_readonly("trial_id", &TrialRecord::trial_id)
      .def_readonly("final_beta_hat", &TrialRecord::final_beta_hat)
      .def_readonly("steps", &TrialRecord::steps)
      .def_readonly("labels", &TrialRecord::labels)
      .def_readonly("query_fraction", &TrialRecord::query_fraction)
      .def_readonly("partial", &TrialRecord::partial)
      .def_readonly("violated", &TrialRecord::violated)
      .def_readonly("curve", &TrialRecord::curve)
      .def_property_readonly("path",
                             [](const TrialRecord& r) {
                               py::list out;
                               for (const auto& c : r.path) {
                                 out.append(py::make_tuple(c.t, c.labels, c.beta_hat));
                               }
                               return out;
                             })
      .def("to_jsonl", &record_to_jsonl);

  m.def(
      "run_simulation_trial",
      [](const TrialConfig& cfg) {
        py::gil_scoped_release release;
        return run_trial(cfg, simulation_source());
      },
      py::arg("config"));
  m.def(
      "run_simulation_experiment",
      [](const TrialConfig& base, std::vector<std::string> methods, std::size_t trials,
         std::size_t jobs) {
        ExperimentConfig ec;
        ec.base = base;
        ec.methods = std::move(methods);
        ec.trials = trials;
        ec.jobs = jobs;
        py::gil_scoped_release release;
        return run_experiment(ec, simulation_source());
      },
      py::arg("base"), py::arg("methods"), py::arg("trials"), py::arg("jobs") = 0);
  m.def(
      "evaluate_safety_simulation",
      [](const std::vector<TrialRecord>& records, double theta) {
        return evaluate_safety(records, oracle_rho_simulation, theta);
      },
      py::arg("records"), py::arg("theta"));
  m.def(
      "summary_json",
      [](const std::vector<TrialRecord>& records, double target) {
        return summary_json(build_report(records, target));
      },
      py::arg("records"), py::arg("target") = 0.65);

  // score files
  py::class_<ScoreDataset>(m, "ScoreDataset")
      .def_readonly("num_classes", &ScoreDataset::num_classes)
      .def_readonly("labels", &ScoreDataset::labels)
      .def_readonly("ids", &ScoreDataset::ids)
      .def_property_readonly("probs",
                             [](const ScoreDataset& d) {
                               py::array_t<double> a({static_cast<py::ssize_t>(d.rows()),
                                                      static_cast<py::ssize_t>(d.num_classes)});
                               std::copy(d.probs.begin(), d.probs.end(), a.mutable_data());
                               return a;
                             })
      .def("__len__", &ScoreDataset::rows);
  m.def(
      "ingest_scores",
      [](const std::string& path) { return ingest_scores(path); }, py::arg("path"));
  m.def(
      "write_score_csv",
      [](const std::string& path, const ScoreDataset& d) { write_score_csv(path, d); });
  m.def(
      "write_score_binary",
      [](const std::string& path, const ScoreDataset& d) { write_score_binary(path, d); });
  m.def("generate_synthetic_scores", &generate_synthetic_scores, py::arg("rows"),
        py::arg("classes"), py::arg("concentration"), py::arg("seed"));
  m.def("shuffled_indices", &shuffled_indices, py::arg("n"), py::arg("seed"));
}
