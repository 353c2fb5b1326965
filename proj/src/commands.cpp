#include "ctmc_hums/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"
#include "ctmc_hums/estimation.hpp"
#include "ctmc_hums/preprocessing.hpp"

namespace fs = std::filesystem;

namespace ctmc_hums {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < n; i = next++) fn(i);
                } catch (...) {
                    failures[w] = std::current_exception();
                    next = n;
                }
            });
        }
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

namespace {

std::ofstream open_out(const fs::path& file) {
    fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    return out;
}

void write_json(const fs::path& file, const json& doc) {
    auto out = open_out(file);
    out << doc.dump(2) << '\n';
}

std::string file_safe(const std::string& id) {
    std::string out;
    for (unsigned char ch : id) out.push_back(std::isalnum(ch) || ch == '-' || ch == '_' ? char(ch) : '_');
    return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

SimulationRun simulate_run(const RunConfig& cfg, std::uint64_t seed) {
    auto path = simulate_chain(cfg.model.A, cfg.initial_state, cfg.horizon, derive_seed(seed, 0));
    auto series = simulate_observation(path, cfg.model.c, cfg.dt, cfg.model.noise_scale, derive_seed(seed, 1));
    auto traj = run_filter(series, cfg.model.A, cfg.model.c, cfg.model.noise_scale, cfg.p0, cfg.filter);
    return {std::move(path), std::move(series), std::move(traj)};
}

double tracking_error(const FilterTrajectory& traj, const ChainPath& path, StateIndex target,
                      double exclude_after_jump) {
    double total = 0.0;
    std::size_t count = 0;
    std::size_t jump = 0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        if (t > path.horizon) break;
        while (jump < path.jump_times.size() && path.jump_times[jump] <= t) ++jump;
        const StateIndex state = path.states[jump];
        if (exclude_after_jump > 0.0 && jump > 0 && t - path.jump_times[jump - 1] < exclude_after_jump)
            continue;
        const double truth = state == target ? 1.0 : 0.0;
        total += std::abs(traj.posterior(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(k)) - truth);
        ++count;
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

std::vector<double> decision_points(const FilterTrajectory& traj, StateIndex target, double interval) {
    if (traj.times.size() < 2) return traj.state_probability(target);
    const double dt = traj.times[1] - traj.times[0];
    const double ratio = interval / dt;
    const auto stride = static_cast<std::size_t>(std::llround(ratio));
    if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-6 * ratio)
        throw ConfigError("decision interval must be a whole number of grid steps");
    std::vector<double> out;
    for (std::size_t k = 0; k < traj.times.size(); k += stride)
        out.push_back(traj.posterior(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(k)));
    return out;
}

double SensitivityVariant::agreement_rate(std::size_t trajectories) const {
    return trajectories ? static_cast<double>(agreements) / static_cast<double>(trajectories) : 1.0;
}

double SensitivityVariant::median_index_difference() const { return median(index_differences); }

SensitivityReport run_sensitivity(const RunConfig& cfg) {
    SensitivityReport report;
    report.trajectories = cfg.sensitivity_trajectories;
    report.overlay_interval = cfg.decision_interval;
    for (std::size_t k = 0; k < cfg.sensitivity_A.size(); ++k)
        report.variants.push_back({"A" + std::to_string(k + 1), cfg.sensitivity_A[k], cfg.model.c, 0, 0, {}});
    for (std::size_t k = 0; k < cfg.sensitivity_c.size(); ++k)
        report.variants.push_back({"c" + std::to_string(k + 1), cfg.model.A, cfg.sensitivity_c[k], 0, 0, {}});
    for (const auto& v : report.variants)
        if (v.A.n_states() != cfg.model.n_states() || v.c.size() != cfg.model.n_states())
            throw ConfigError("perturbation " + v.label + " has the wrong dimension");

    const std::size_t n_var = report.variants.size();
    // detections[r][0] is the true model, [1..] the variants.
    std::vector<std::vector<DetectionOutcome>> detections(report.trajectories,
                                                          std::vector<DetectionOutcome>(n_var + 1));
    parallel_for(report.trajectories, cfg.workers, [&](std::size_t r) {
        auto path = simulate_chain(cfg.model.A, cfg.initial_state, cfg.horizon, derive_seed(cfg.seed, 2 * r));
        auto series = simulate_observation(path, cfg.model.c, cfg.dt, cfg.model.noise_scale,
                                           derive_seed(cfg.seed, 2 * r + 1));
        for (std::size_t v = 0; v <= n_var; ++v) {
            const auto& A = v == 0 ? cfg.model.A : report.variants[v - 1].A;
            const auto& c = v == 0 ? cfg.model.c : report.variants[v - 1].c;
            const auto traj = run_filter(series, A, c, cfg.model.noise_scale, cfg.p0, cfg.filter);
            const auto points = decision_points(traj, cfg.rule.target_state, cfg.decision_interval);
            detections[r][v] = detect(points, cfg.rule);
            if (r == 0) {
                if (v == 0) report.overlay.assign(n_var + 1, {});
                report.overlay[v] = points;
            }
        }
    });

    for (std::size_t r = 0; r < report.trajectories; ++r) {
        const auto& base = detections[r][0];
        if (base.detected()) ++report.baseline_fired;
        for (std::size_t v = 0; v < n_var; ++v) {
            auto& variant = report.variants[v];
            const auto& d = detections[r][v + 1];
            if (d.detected()) ++variant.fired;
            if (d.detected() == base.detected()) ++variant.agreements;
            if (d.detected() && base.detected())
                variant.index_differences.push_back(std::abs(static_cast<double>(*d.detection_index) -
                                                             static_cast<double>(*base.detection_index)));
        }
    }
    return report;
}

ApplianceResult process_appliance(const RunConfig& cfg, const ApplianceLogbook& book,
                                  const std::optional<RegressionFit>& pooled) {
    ApplianceResult res;
    res.appliance_id = book.appliance_id;
    res.failed = book.failed;
    res.failure_startup = book.failure_startup;

    auto pre = preprocess_logbook(book, cfg.preprocess, pooled);
    res.dropped_records = pre.dropped;
    res.fit = pre.fit;
    res.smoothed = std::move(pre.smoothed);
    res.noise_scale = cfg.industrial_noise_scale ? *cfg.industrial_noise_scale
                                                 : calibrate_noise_scale(res.smoothed, cfg.calibration_span);

    const auto series = to_observation(res.smoothed);
    const auto traj = run_filter(series, cfg.industrial.A, cfg.industrial.c, res.noise_scale,
                                 cfg.industrial_p0, cfg.filter);
    res.posterior = traj.state_probability(cfg.rule.target_state);
    res.clamp_count = traj.terminal.clamp_count;
    res.outcome = detect(res.posterior, cfg.rule);
    if (res.outcome.detected()) res.detection_startup = res.smoothed.startup_indices[*res.outcome.detection_index];
    if (book.failure_startup) {
        const auto& idx = res.smoothed.startup_indices;
        const auto it = std::lower_bound(idx.begin(), idx.end(), *book.failure_startup);
        res.failure_index = static_cast<std::size_t>(it - idx.begin());
    }
    return res;
}

PipelineReport run_pipeline(const RunConfig& cfg, const FleetDataset& fleet) {
    std::optional<RegressionFit> pooled;
    if (cfg.preprocess.pooled_regression) pooled = fit_pooled_regression(fleet, cfg.preprocess.reference_temp_c);

    const std::size_t n = fleet.appliances.size();
    std::vector<std::optional<ApplianceResult>> results(n);
    std::vector<std::string> errors(n);
    parallel_for(n, cfg.workers, [&](std::size_t k) {
        try {
            results[k] = process_appliance(cfg, fleet.appliances[k], pooled);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });

    PipelineReport report;
    std::vector<FleetRecord> records;
    for (std::size_t k = 0; k < n; ++k) {
        if (!results[k]) {
            report.errors.emplace_back(fleet.appliances[k].appliance_id, errors[k]);
            continue;
        }
        auto& r = *results[k];
        records.push_back({r.outcome, r.failed, r.failure_index});
        report.appliances.push_back(std::move(r));
    }
    report.confusion = score_fleet(records);
    return report;
}

json to_json(const ConfusionMatrix& m) {
    return {{"true_positive", m.true_positive},
            {"false_positive", m.false_positive},
            {"false_negative", m.false_negative},
            {"true_negative", m.true_negative},
            {"total", m.total()}};
}

json to_json(const PipelineReport& report) {
    json apps = json::array();
    for (const auto& a : report.appliances) {
        const double peak = a.posterior.empty() ? 0.0 : *std::max_element(a.posterior.begin(), a.posterior.end());
        apps.push_back({{"appliance_id", a.appliance_id},
                        {"failed", a.failed},
                        {"failure_startup", a.failure_startup ? json(*a.failure_startup) : json(nullptr)},
                        {"detected", a.outcome.detected()},
                        {"detection_startup", a.detection_startup ? json(*a.detection_startup) : json(nullptr)},
                        {"detected_before_failure",
                         FleetRecord{a.outcome, a.failed, a.failure_index}.detected_in_time()},
                        {"noise_scale", a.noise_scale},
                        {"regression_slope", a.fit.slope},
                        {"smoothed_points", a.smoothed.values.size()},
                        {"dropped_records", a.dropped_records},
                        {"clamp_count", a.clamp_count},
                        {"max_posterior", peak}});
    }
    json errs = json::array();
    for (const auto& [id, msg] : report.errors) errs.push_back({{"appliance_id", id}, {"error", msg}});
    return {{"fleet_size", report.appliances.size() + report.errors.size()},
            {"processed", report.appliances.size()},
            {"confusion", to_json(report.confusion)},
            {"appliances", apps},
            {"errors", errs}};
}

json cmd_simulate(const RunConfig& cfg) {
    const auto run = simulate_run(cfg, cfg.seed);
    const fs::path dir = cfg.out_dir;
    {
        auto out = open_out(dir / "chain_path.csv");
        write_chain_path_csv(out, run.path);
    }
    {
        auto out = open_out(dir / "observation.csv");
        write_observation_csv(out, run.series);
    }
    {
        auto out = open_out(dir / "filter_trajectory.csv");
        write_trajectory_csv(out, run.trajectory);
    }
    const auto totals = reduce_functionals(run.trajectory.terminal);
    const double elapsed = run.series.time(run.series.size() - 1) - run.series.t0();
    const StateIndex target = cfg.rule.target_state;
    json doc = {
        {"command", "simulate"},
        {"seed", cfg.seed},
        {"horizon", cfg.horizon},
        {"dt", cfg.dt},
        {"scheme", to_string(cfg.filter.scheme)},
        {"n_jumps", run.path.n_jumps()},
        {"occupation_true", run.path.occupation(cfg.model.n_states())},
        {"occupation_filtered", vector_json(totals.occupation)},
        {"elapsed", elapsed},
        {"mean_abs_error", tracking_error(run.trajectory, run.path, target)},
        {"mean_abs_error_excluding_transients", tracking_error(run.trajectory, run.path, target, 2.0)},
        {"clamp_count", run.trajectory.terminal.clamp_count},
        {"files", {"chain_path.csv", "observation.csv", "filter_trajectory.csv"}},
    };
    write_json(dir / "summary.json", doc);
    return doc;
}

json cmd_sensitivity(const RunConfig& cfg) {
    const auto report = run_sensitivity(cfg);
    const fs::path dir = cfg.out_dir;
    {
        auto out = open_out(dir / "sensitivity_overlay.csv");
        out << "t,baseline";
        for (const auto& v : report.variants) out << ',' << v.label;
        out << '\n';
        const std::size_t n = report.overlay.empty() ? 0 : report.overlay[0].size();
        for (std::size_t k = 0; k < n; ++k) {
            out << csv::format_double(static_cast<double>(k) * report.overlay_interval);
            for (const auto& col : report.overlay) out << ',' << csv::format_double(col[k]);
            out << '\n';
        }
    }
    json variants = json::array();
    for (const auto& v : report.variants) {
        variants.push_back({{"label", v.label},
                            {"A", matrix_json(v.A.entries())},
                            {"c", vector_json(v.c.values())},
                            {"fired", v.fired},
                            {"agreement_rate", v.agreement_rate(report.trajectories)},
                            {"both_fired", v.index_differences.size()},
                            {"median_index_difference", v.median_index_difference()}});
    }
    json doc = {{"command", "sensitivity"},
                {"seed", cfg.seed},
                {"trajectories", report.trajectories},
                {"decision_interval", report.overlay_interval},
                {"baseline_fired", report.baseline_fired},
                {"variants", variants},
                {"files", {"sensitivity_overlay.csv"}}};
    write_json(dir / "summary.json", doc);
    return doc;
}

namespace {

ObservationSeries read_any_series(const fs::path& file, bool& is_logbook_scale) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::string header;
    std::getline(in, header);
    header = csv::trim(header);
    in.clear();
    in.seekg(0);
    if (header == "t,y") {
        is_logbook_scale = false;
        return read_observation_csv(in);
    }
    if (header == "startup_index,tmf_l") {
        is_logbook_scale = true;
        std::getline(in, header);
        std::vector<double> values;
        std::optional<long long> first;
        std::string line;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (csv::trim(line).empty()) continue;
            const auto f = csv::split_line(line);
            const auto idx = f.size() == 2 ? csv::parse_integer(f[0]) : std::nullopt;
            const auto v = f.size() == 2 ? csv::parse_double(f[1]) : std::nullopt;
            if (!idx || !v) throw ParseError(file.string(), line_no, "bad smoothed row");
            if (!first) first = *idx;
            values.push_back(*v);
        }
        return from_values(static_cast<double>(first.value_or(0)), 1.0, std::move(values));
    }
    throw SchemaError(file.string() + ": expected header 't,y' or 'startup_index,tmf_l'");
}

}  // namespace

json cmd_estimate(const RunConfig& cfg, const std::optional<fs::path>& series_file) {
    std::optional<ObservationSeries> series;
    std::string source;
    if (series_file) {
        bool logbook = false;
        series = read_any_series(*series_file, logbook);
        source = series_file->string();
    } else {
        series = simulate_run(cfg, cfg.seed).series;
        source = "simulated";
    }
    const auto result = estimate_parameters(*series, cfg.estimation_A0, cfg.estimation_c0, cfg.model.noise_scale,
                                            cfg.p0, cfg.filter, cfg.estimation);
    const fs::path dir = cfg.out_dir;
    {
        auto out = open_out(dir / "estimation_report.txt");
        write_estimation_report(out, result, cfg.estimation);
    }
    json doc = {{"command", "estimate"},
                {"source", source},
                {"converged", result.converged},
                {"iterations", result.iterates.size() - 1},
                {"A_hat", matrix_json(result.A_hat.entries())},
                {"c_hat", vector_json(result.c_hat.values())},
                {"degenerate_states", result.degenerate_states},
                {"files", {"estimation_report.txt"}}};
    write_json(dir / "summary.json", doc);
    return doc;
}

json cmd_preprocess(const RunConfig& cfg, const fs::path& fleet_path) {
    const auto fleet = read_fleet(fleet_path);
    std::optional<RegressionFit> pooled;
    if (cfg.preprocess.pooled_regression) pooled = fit_pooled_regression(fleet, cfg.preprocess.reference_temp_c);
    const fs::path dir = cfg.out_dir;
    json apps = json::array();
    json errs = json::array();
    for (const auto& book : fleet.appliances) {
        try {
            const auto pre = preprocess_logbook(book, cfg.preprocess, pooled);
            auto out = open_out(dir / (file_safe(book.appliance_id) + "_tmf_l.csv"));
            write_smoothed_csv(out, pre.smoothed);
            apps.push_back({{"appliance_id", book.appliance_id},
                            {"regression_slope", pre.fit.slope},
                            {"regression_intercept", pre.fit.intercept},
                            {"dropped_records", pre.dropped},
                            {"smoothed_points", pre.smoothed.values.size()},
                            {"start_index", pre.smoothed.start_index}});
        } catch (const Error& e) {
            errs.push_back({{"appliance_id", book.appliance_id}, {"error", e.what()}});
        }
    }
    json doc = {{"command", "preprocess"}, {"appliances", apps}, {"errors", errs}};
    write_json(dir / "summary.json", doc);
    return doc;
}

json cmd_filter(const RunConfig& cfg, const fs::path& series_file) {
    bool logbook = false;
    const auto series = read_any_series(series_file, logbook);
    FilterTrajectory traj;
    double noise = cfg.model.noise_scale;
    if (logbook) {
        SmoothedSeries sm;
        sm.values.assign(series.values().begin(), series.values().end());
        noise = cfg.industrial_noise_scale ? *cfg.industrial_noise_scale
                                           : calibrate_noise_scale(sm, cfg.calibration_span);
        traj = run_filter(series, cfg.industrial.A, cfg.industrial.c, noise, cfg.industrial_p0, cfg.filter);
    } else {
        traj = run_filter(series, cfg.model.A, cfg.model.c, noise, cfg.p0, cfg.filter);
    }
    const fs::path dir = cfg.out_dir;
    {
        auto out = open_out(dir / "filter_trajectory.csv");
        write_trajectory_csv(out, traj);
    }
    const auto outcome = detect(traj.state_probability(cfg.rule.target_state), cfg.rule);
    json doc = {{"command", "filter"},
                {"source", series_file.string()},
                {"model", logbook ? "industrial" : "simulation"},
                {"noise_scale", noise},
                {"points", traj.times.size()},
                {"clamp_count", traj.terminal.clamp_count},
                {"detected", outcome.detected()},
                {"detection_time", outcome.detected() ? json(traj.times[*outcome.detection_index]) : json(nullptr)},
                {"files", {"filter_trajectory.csv"}}};
    write_json(dir / "summary.json", doc);
    return doc;
}

json cmd_detect(const RunConfig& cfg, const fs::path& trajectory_file) {
    std::ifstream in(trajectory_file, std::ios::binary);
    if (!in) throw IoError("cannot open " + trajectory_file.string());
    std::string line;
    std::getline(in, line);
    const auto header = csv::split_line(line);
    const std::string column = "p_state_" + std::to_string(cfg.rule.target_state);
    const auto it = std::find(header.begin(), header.end(), column);
    if (header.empty() || csv::trim(header[0]) != "t" || it == header.end())
        throw SchemaError(trajectory_file.string() + ": needs columns t and " + column);
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::vector<double> times, probs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split_line(line);
        const auto t = f.size() == header.size() ? csv::parse_double(f[0]) : std::nullopt;
        const auto p = f.size() == header.size() ? csv::parse_double(f[col]) : std::nullopt;
        if (!t || !p) throw ParseError(trajectory_file.string(), line_no, "bad trajectory row");
        times.push_back(*t);
        probs.push_back(*p);
    }
    const auto outcome = detect(probs, cfg.rule);
    json doc = {{"command", "detect"},
                {"source", trajectory_file.string()},
                {"threshold", cfg.rule.threshold},
                {"run_length", cfg.rule.run_length},
                {"target_state", cfg.rule.target_state},
                {"detected", outcome.detected()},
                {"detection_index", outcome.detected() ? json(*outcome.detection_index) : json(nullptr)},
                {"detection_time", outcome.detected() ? json(times[*outcome.detection_index]) : json(nullptr)}};
    write_json(fs::path(cfg.out_dir) / "summary.json", doc);
    return doc;
}

json cmd_pipeline(const RunConfig& cfg, const fs::path& fleet_path) {
    const auto fleet = read_fleet(fleet_path);
    const auto report = run_pipeline(cfg, fleet);
    const fs::path dir = cfg.out_dir;
    // Distinct files per appliance, so these writes may run concurrently.
    parallel_for(report.appliances.size(), cfg.workers, [&](std::size_t k) {
        const auto& a = report.appliances[k];
        const std::string stem = file_safe(a.appliance_id);
        {
            auto out = open_out(dir / "appliances" / (stem + "_tmf_l.csv"));
            write_smoothed_csv(out, a.smoothed);
        }
        auto out = open_out(dir / "appliances" / (stem + "_posterior.csv"));
        out << "startup_index,p_state_" << cfg.rule.target_state << '\n';
        for (std::size_t i = 0; i < a.posterior.size(); ++i)
            out << a.smoothed.startup_indices[i] << ',' << csv::format_double(a.posterior[i]) << '\n';
    });
    {
        auto out = open_out(dir / "confusion.csv");
        write_confusion_csv(out, report.confusion);
    }
    {
        auto out = open_out(dir / "confusion_table.txt");
        write_confusion_table(out, report.confusion);
    }
    json doc = to_json(report);
    doc["command"] = "pipeline";
    doc["source"] = fleet_path.string();
    doc["rule"] = {{"threshold", cfg.rule.threshold}, {"run_length", cfg.rule.run_length}};
    doc["files"] = {"confusion.csv", "confusion_table.txt", "appliances/"};
    write_json(dir / "summary.json", doc);
    return doc;
}

json cmd_fleet_gen(const RunConfig& cfg) {
    SyntheticTruth truth;
    const auto fleet = generate_synthetic_fleet(cfg.fleet, truth);
    const fs::path dir = cfg.out_dir;
    write_fleet(fleet, dir / "fleet.csv");
    json apps = json::array();
    for (std::size_t k = 0; k < fleet.appliances.size(); ++k) {
        const auto& a = fleet.appliances[k];
        apps.push_back({{"appliance_id", a.appliance_id},
                        {"records", a.records.size()},
                        {"failed", a.failed},
                        {"degradation_onset", truth.onset_startup[k] ? json(*truth.onset_startup[k]) : json(nullptr)}});
    }
    json doc = {{"command", "fleet-gen"},
                {"seed", cfg.fleet.seed},
                {"n_stable", cfg.fleet.n_stable},
                {"n_degrading", cfg.fleet.n_degrading},
                {"appliances", apps},
                {"files", {"fleet.csv"}}};
    write_json(dir / "summary.json", doc);
    return doc;
}

json cmd_sweep(const RunConfig& cfg, const fs::path& fleet_path) {
    const auto fleet = read_fleet(fleet_path);
    const auto report = run_pipeline(cfg, fleet);
    std::vector<ScoredPosterior> scored;
    for (const auto& a : report.appliances) scored.push_back({a.posterior, a.failed, a.failure_index});
    const auto rows = sweep_rules(scored, cfg.sweep_thresholds, cfg.sweep_run_lengths);
    const fs::path dir = cfg.out_dir;
    {
        auto out = open_out(dir / "sweep.csv");
        write_sweep_csv(out, rows);
    }
    {
        auto out = open_out(dir / "sweep.txt");
        write_sweep_table(out, rows);
    }
    json table = json::array();
    for (const auto& r : rows)
        table.push_back({{"threshold", r.threshold}, {"run_length", r.run_length}, {"confusion", to_json(r.matrix)}});
    json doc = {{"command", "sweep"}, {"source", fleet_path.string()}, {"rules", table}, {"files", {"sweep.csv", "sweep.txt"}}};
    write_json(dir / "summary.json", doc);
    return doc;
}

}  // namespace ctmc_hums
