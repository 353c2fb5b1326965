#include <optional>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ctmc_hums/commands.hpp"
#include "ctmc_hums/config.hpp"
#include "ctmc_hums/decision.hpp"
#include "ctmc_hums/errors.hpp"
#include "ctmc_hums/estimation.hpp"
#include "ctmc_hums/markov_chain.hpp"
#include "ctmc_hums/observation.hpp"
#include "ctmc_hums/preprocessing.hpp"
#include "ctmc_hums/zakai_filter.hpp"

namespace py = pybind11;
using namespace ctmc_hums;

namespace {

FilterConfig filter_config(const std::string& scheme) {
    FilterConfig cfg;
    cfg.scheme = parse_scheme(scheme);
    return cfg;
}

py::dict path_dict(const ChainPath& path) {
    py::dict d;
    d["jump_times"] = path.jump_times;
    d["states"] = path.states;
    d["horizon"] = path.horizon;
    return d;
}

ChainPath path_from(const std::vector<double>& jump_times, const std::vector<StateIndex>& states, double horizon) {
    ChainPath path{jump_times, states, horizon};
    path.check();
    return path;
}

py::object from_json(const json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

RunConfig run_config(const std::map<std::string, std::string>& options) {
    Config cfg;
    for (const auto& [key, value] : options) cfg.set(key, value);
    return RunConfig::from(cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Continuous-time hidden Markov filtering for degradation detection";

    static py::exception<Error> base(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(base.ptr(), e.what());
        }
    });

    m.def("validate_generator", [](const Eigen::MatrixXd& A) { return validate_generator(A).entries(); },
          py::arg("A"));
    m.def("transition_matrix",
          [](const Eigen::MatrixXd& A, double t) { return transition_matrix(GeneratorMatrix(A), t); },
          py::arg("A"), py::arg("t"));
    m.def("simulate_chain",
          [](const Eigen::MatrixXd& A, StateIndex initial, double horizon, std::uint64_t seed) {
              return path_dict(simulate_chain(GeneratorMatrix(A), initial, horizon, seed));
          },
          py::arg("A"), py::arg("initial_state"), py::arg("horizon"), py::arg("seed"));
    m.def("simulate_observation",
          [](const std::vector<double>& jump_times, const std::vector<StateIndex>& states, double horizon,
             const Eigen::VectorXd& c, double dt, double noise_scale, std::uint64_t seed) {
              const auto series =
                  simulate_observation(path_from(jump_times, states, horizon), SlopeVector(c), dt, noise_scale, seed);
              return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(series.values().data(),
                                                                      static_cast<Eigen::Index>(series.size())));
          },
          py::arg("jump_times"), py::arg("states"), py::arg("horizon"), py::arg("c"), py::arg("dt"),
          py::arg("noise_scale"), py::arg("seed"));

    m.def("run_filter",
          [](const std::vector<double>& y, double dt, const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
             double noise_scale, const Eigen::VectorXd& p0, const std::string& scheme, double t0) {
              const auto traj = run_filter(from_values(t0, dt, y), GeneratorMatrix(A), SlopeVector(c), noise_scale,
                                           InitialLaw(p0), filter_config(scheme));
              return py::make_tuple(traj.times, traj.posterior, traj.terminal.clamp_count);
          },
          py::arg("y"), py::arg("dt"), py::arg("A"), py::arg("c"), py::arg("noise_scale"), py::arg("p0"),
          py::arg("scheme") = "robust", py::arg("t0") = 0.0,
          "Posterior path for observations y on a uniform grid: (times, N x K posterior, clamp count).");

    m.def("estimate_parameters",
          [](const std::vector<double>& y, double dt, const Eigen::MatrixXd& A0, const Eigen::VectorXd& c0,
             double noise_scale, const Eigen::VectorXd& p0, bool estimate_A, bool estimate_c,
             std::size_t max_iters, double rel_tol, bool hold_degenerate, const std::string& scheme) {
              EstimationConfig ecfg;
              ecfg.estimate_A = estimate_A;
              ecfg.estimate_c = estimate_c;
              ecfg.max_iters = max_iters;
              ecfg.rel_tol = rel_tol;
              ecfg.hold_degenerate = hold_degenerate;
              const auto res = estimate_parameters(from_values(0.0, dt, y), GeneratorMatrix(A0), SlopeVector(c0),
                                                   noise_scale, InitialLaw(p0), filter_config(scheme), ecfg);
              py::dict d;
              d["A"] = res.A_hat.entries();
              d["c"] = res.c_hat.values();
              d["converged"] = res.converged;
              d["iterations"] = res.iterates.size() - 1;
              d["degenerate_states"] = res.degenerate_states;
              return d;
          },
          py::arg("y"), py::arg("dt"), py::arg("A0"), py::arg("c0"), py::arg("noise_scale"), py::arg("p0"),
          py::arg("estimate_A") = true, py::arg("estimate_c") = false, py::arg("max_iters") = 50,
          py::arg("rel_tol") = 1e-4, py::arg("hold_degenerate") = false, py::arg("scheme") = "robust");

    m.def("estimate_exponential_rate",
          [](const std::vector<double>& exposures, const std::vector<bool>& events) {
              return estimate_exponential_rate(SurvivalSample{exposures, events});
          },
          py::arg("exposures"), py::arg("events"));

    m.def("fit_temperature_regression",
          [](const std::vector<double>& temps, const std::vector<double>& tmf, double reference) {
              if (temps.size() != tmf.size()) throw DimensionError("temps and tmf differ in length");
              std::vector<TemperatureReading> rows;
              for (std::size_t k = 0; k < temps.size(); ++k) rows.push_back({temps[k], tmf[k]});
              const auto fit = fit_temperature_regression(rows, reference);
              return py::make_tuple(fit.intercept, fit.slope);
          },
          py::arg("initial_temp_c"), py::arg("tmf"), py::arg("reference_temp_c") = 10.0,
          "OLS fit tmf ~ intercept + slope * temp: (intercept, slope).");
    m.def("smooth", [](const std::vector<double>& v, std::size_t window) { return smooth(v, window).values; },
          py::arg("values"), py::arg("window") = 20, "Trailing moving average.");

    m.def("detect",
          [](const std::vector<double>& posterior, double threshold, std::size_t run_length) -> std::optional<std::size_t> {
              DecisionRule rule;
              rule.threshold = threshold;
              rule.run_length = run_length;
              return detect(posterior, rule).detection_index;
          },
          py::arg("posterior"), py::arg("threshold") = 0.999, py::arg("run_length") = 3,
          "Index where the alert fires, or None.");

    m.def("run_command",
          [](const std::string& name, const std::map<std::string, std::string>& options,
             std::optional<std::filesystem::path> input) {
              const RunConfig cfg = run_config(options);
              auto need = [&]() -> const std::filesystem::path& {
                  if (!input) throw ConfigError(name + " needs an input path");
                  return *input;
              };
              json doc;
              py::gil_scoped_release release;
              if (name == "simulate") doc = cmd_simulate(cfg);
              else if (name == "sensitivity") doc = cmd_sensitivity(cfg);
              else if (name == "estimate") doc = cmd_estimate(cfg, input);
              else if (name == "preprocess") doc = cmd_preprocess(cfg, need());
              else if (name == "filter") doc = cmd_filter(cfg, need());
              else if (name == "detect") doc = cmd_detect(cfg, need());
              else if (name == "pipeline") doc = cmd_pipeline(cfg, need());
              else if (name == "fleet-gen") doc = cmd_fleet_gen(cfg);
              else if (name == "sweep") doc = cmd_sweep(cfg, need());
              else throw ConfigError("unknown command " + name);
              py::gil_scoped_acquire acquire;
              return from_json(doc);
          },
          py::arg("name"), py::arg("options") = std::map<std::string, std::string>{}, py::arg("input") = py::none(),
          "Run a CLI subcommand with configuration keys as strings; returns its summary.");
}
