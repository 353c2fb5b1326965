#include "ctmc_hums/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"

namespace ctmc_hums {

const std::vector<Config::Key>& Config::known_keys() {
    static const std::vector<Key> keys = {
        {"model.A", "-0.1 0.1; 0.05 -0.05", "generator of the simulated chain (rows ';'-separated)"},
        {"model.c", "-1 1", "observation slope per state"},
        {"model.noise_scale", "1", "observation noise standard deviation per unit time"},
        {"model.p0", "1 0", "filter initial law for simulated data"},
        {"sim.initial_state", "0", "initial state of simulated chains"},
        {"sim.horizon", "200", "simulated time horizon"},
        {"sim.dt", "0.01", "simulation and filter grid step"},
        {"industrial.A", "-0.01 0.01; 0.001 -0.001", "generator used on logbook data"},
        {"industrial.c", "0 1", "slope vector used on logbook data"},
        {"industrial.p0", "0.99 0.01", "initial law used on logbook data"},
        {"industrial.noise_scale", "auto", "noise scale for logbook data, or 'auto' to calibrate"},
        {"industrial.calibration_span", "50", "leading smoothed points used for noise calibration"},
        {"filter.scheme", "robust", "euler|robust"},
        {"filter.renormalize_every", "1", "steps between rescalings of the unnormalized filter"},
        {"filter.clamp_eps", "1e-12", "relative floor for posterior components"},
        {"decision.threshold", "0.999", "probability threshold of the alert rule"},
        {"decision.run_length", "3", "consecutive uses above threshold before an alert"},
        {"decision.target_state", "1", "state index monitored by the alert rule"},
        {"preprocess.window", "20", "moving-average window, startups"},
        {"preprocess.reference_temp", "10", "reference initial temperature, degrees C"},
        {"preprocess.pooled", "false", "fit one temperature regression for the whole fleet"},
        {"sensitivity.A", "-0.01 0.01; 0.04 -0.04 | -0.2 0.2; 0.08 -0.08",
         "perturbed generators, '|'-separated"},
        {"sensitivity.c", "-0.5 0.5 | -1 0.5 | 0 1", "perturbed slope vectors, '|'-separated"},
        {"sensitivity.trajectories", "50", "number of simulated trajectories"},
        {"sensitivity.decision_interval", "1", "simulated time between decision points"},
        {"estimate.A", "true", "estimate the generator"},
        {"estimate.c", "false", "estimate the slope vector"},
        {"estimate.A0", "-0.2 0.2; 0.2 -0.2", "starting generator"},
        {"estimate.c0", "-0.5 0.5", "starting slope vector"},
        {"estimate.max_iters", "50", "iteration cap"},
        {"estimate.rel_tol", "1e-4", "stop when every estimate moves less than this (relative)"},
        {"estimate.hold_degenerate", "false", "keep unidentifiable rows instead of failing"},
        {"fleet.n_stable", "23", "synthetic appliances without degradation"},
        {"fleet.n_degrading", "5", "synthetic appliances that degrade and fail"},
        {"fleet.noise_scale", "3", "per-startup Tmf noise, seconds"},
        {"fleet.temp_slope", "2", "Tmf increase per degree C"},
        {"fleet.temp_intercept", "280", "Tmf at 0 degrees C"},
        {"fleet.temp_min", "-10", "lowest initial temperature"},
        {"fleet.temp_max", "35", "highest initial temperature"},
        {"fleet.horizon", "300", "longest stable logbook, startups"},
        {"fleet.min_stable", "80", "earliest degradation onset, startups"},
        {"fleet.gap_min", "50", "shortest onset-to-failure delay, startups"},
        {"fleet.gap_max", "100", "longest onset-to-failure delay, startups"},
        {"sweep.thresholds", "0.9 0.99 0.999 0.9999", "thresholds tried by the sweep"},
        {"sweep.run_lengths", "1 2 3 5 10", "run lengths tried by the sweep"},
        {"seed", "1", "base random seed"},
        {"out", "out", "output directory"},
        {"workers", "0", "worker threads for fleet commands (0: all cores)"},
    };
    return keys;
}

Config::Config() {
    for (const auto& k : known_keys()) values_[k.name] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second = csv::trim(value);
}

void Config::load(std::istream& is, const std::string& source_name) {
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = csv::trim(line);
        if (t.empty()) continue;
        if (t.front() == '[' && t.back() == ']') {
            section = csv::trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = csv::trim(t.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        try {
            set(key, t.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void Config::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    load(in, path.string());
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const auto v = csv::parse_double(get(key));
    if (!v) throw ConfigError(key + ": expected a number, got '" + get(key) + "'");
    return *v;
}

long long Config::get_int(const std::string& key) const {
    const auto v = csv::parse_integer(get(key));
    if (!v) throw ConfigError(key + ": expected an integer, got '" + get(key) + "'");
    return *v;
}

std::size_t Config::get_size(const std::string& key) const {
    const auto v = get_int(key);
    if (v < 0) throw ConfigError(key + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

bool Config::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, sep)) parts.push_back(csv::trim(cur));
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

std::vector<double> numbers(const std::string& row) {
    std::string spaced = row;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream is(spaced);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        const auto v = csv::parse_double(tok);
        if (!v) throw ConfigError("not a number: '" + tok + "'");
        out.push_back(*v);
    }
    return out;
}

}  // namespace

Eigen::MatrixXd parse_matrix(const std::string& text) {
    const auto rows = split(text, ';');
    std::vector<std::vector<double>> data;
    for (const auto& r : rows) {
        auto v = numbers(r);
        if (!v.empty()) data.push_back(std::move(v));
    }
    if (data.empty()) throw ConfigError("empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data[0].size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != data[0].size()) throw ConfigError("ragged matrix '" + text + "'");
        for (std::size_t j = 0; j < data[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
    }
    return m;
}

Eigen::VectorXd parse_vector(const std::string& text) {
    const auto v = numbers(text);
    if (v.empty()) throw ConfigError("empty vector");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd Config::get_matrix(const std::string& key) const {
    try {
        return parse_matrix(get(key));
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

Eigen::VectorXd Config::get_vector(const std::string& key) const {
    try {
        return parse_vector(get(key));
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::vector<Eigen::MatrixXd> Config::get_matrix_list(const std::string& key) const {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& part : split(get(key), '|'))
        if (!part.empty()) out.push_back(parse_matrix(part));
    return out;
}

std::vector<Eigen::VectorXd> Config::get_vector_list(const std::string& key) const {
    std::vector<Eigen::VectorXd> out;
    for (const auto& part : split(get(key), '|'))
        if (!part.empty()) out.push_back(parse_vector(part));
    return out;
}

RunConfig RunConfig::from(const Config& cfg) {
    RunConfig rc;
    try {
        rc.model = FilterModel{GeneratorMatrix(cfg.get_matrix("model.A")), SlopeVector(cfg.get_vector("model.c")),
                               cfg.get_double("model.noise_scale")};
        rc.model.check();
        rc.p0 = InitialLaw(cfg.get_vector("model.p0"));
        rc.initial_state = cfg.get_size("sim.initial_state");
        rc.horizon = cfg.get_double("sim.horizon");
        rc.dt = cfg.get_double("sim.dt");
        if (rc.p0.size() != rc.model.n_states() || rc.initial_state >= rc.model.n_states())
            throw ConfigError("model.p0 / sim.initial_state do not match model.A");
        if (!(rc.dt > 0.0) || !(rc.horizon > rc.dt)) throw ConfigError("need 0 < sim.dt < sim.horizon");

        rc.industrial = {GeneratorMatrix(cfg.get_matrix("industrial.A")), SlopeVector(cfg.get_vector("industrial.c"))};
        rc.industrial_p0 = InitialLaw(cfg.get_vector("industrial.p0"));
        if (rc.industrial.c.size() != rc.industrial.A.n_states() ||
            rc.industrial_p0.size() != rc.industrial.A.n_states())
            throw ConfigError("industrial.* dimensions disagree");
        if (cfg.get("industrial.noise_scale") == "auto")
            rc.industrial_noise_scale.reset();
        else
            rc.industrial_noise_scale = cfg.get_double("industrial.noise_scale");
        rc.calibration_span = cfg.get_size("industrial.calibration_span");

        rc.filter.scheme = parse_scheme(cfg.get("filter.scheme"));
        rc.filter.renormalize_every = cfg.get_size("filter.renormalize_every");
        rc.filter.clamp_eps = cfg.get_double("filter.clamp_eps");
        rc.filter.check();

        rc.rule.threshold = cfg.get_double("decision.threshold");
        rc.rule.run_length = cfg.get_size("decision.run_length");
        rc.rule.target_state = cfg.get_size("decision.target_state");
        rc.rule.check();

        rc.preprocess.window = cfg.get_size("preprocess.window");
        rc.preprocess.reference_temp_c = cfg.get_double("preprocess.reference_temp");
        rc.preprocess.pooled_regression = cfg.get_bool("preprocess.pooled");
        if (rc.preprocess.window == 0) throw ConfigError("preprocess.window must be positive");

        for (auto& m : cfg.get_matrix_list("sensitivity.A")) rc.sensitivity_A.emplace_back(std::move(m));
        for (auto& v : cfg.get_vector_list("sensitivity.c")) rc.sensitivity_c.emplace_back(std::move(v));
        rc.sensitivity_trajectories = cfg.get_size("sensitivity.trajectories");
        rc.decision_interval = cfg.get_double("sensitivity.decision_interval");

        rc.estimation.estimate_A = cfg.get_bool("estimate.A");
        rc.estimation.estimate_c = cfg.get_bool("estimate.c");
        rc.estimation.max_iters = cfg.get_size("estimate.max_iters");
        rc.estimation.rel_tol = cfg.get_double("estimate.rel_tol");
        rc.estimation.hold_degenerate = cfg.get_bool("estimate.hold_degenerate");
        rc.estimation.check();
        rc.estimation_A0 = GeneratorMatrix(cfg.get_matrix("estimate.A0"));
        rc.estimation_c0 = SlopeVector(cfg.get_vector("estimate.c0"));

        auto& f = rc.fleet;
        f.n_stable = cfg.get_size("fleet.n_stable");
        f.n_degrading = cfg.get_size("fleet.n_degrading");
        f.A = rc.industrial.A;
        f.c = rc.industrial.c;
        f.noise_scale = cfg.get_double("fleet.noise_scale");
        f.temp_slope = cfg.get_double("fleet.temp_slope");
        f.temp_intercept = cfg.get_double("fleet.temp_intercept");
        f.temp_min_c = cfg.get_double("fleet.temp_min");
        f.temp_max_c = cfg.get_double("fleet.temp_max");
        f.horizon = cfg.get_size("fleet.horizon");
        f.min_stable_startups = cfg.get_size("fleet.min_stable");
        f.failure_gap_min = cfg.get_size("fleet.gap_min");
        f.failure_gap_max = cfg.get_size("fleet.gap_max");

        const auto thresholds = cfg.get_vector("sweep.thresholds");
        rc.sweep_thresholds.assign(thresholds.begin(), thresholds.end());
        for (double r : cfg.get_vector("sweep.run_lengths")) {
            if (r < 1.0 || r != static_cast<double>(static_cast<std::size_t>(r)))
                throw ConfigError("sweep.run_lengths must be positive integers");
            rc.sweep_run_lengths.push_back(static_cast<std::size_t>(r));
        }

        rc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
        f.seed = rc.seed;
        rc.out_dir = cfg.get("out");
        rc.workers = cfg.get_size("workers");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

}  // namespace ctmc_hums
