#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ctmc_hums/commands.hpp"
#include "ctmc_hums/config.hpp"
#include "ctmc_hums/errors.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("ctmc-hums");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("CTMC_HUMS_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

struct Alias {
    const char* flag;
    const char* key;
    const char* help;
};

constexpr Alias kAliases[] = {
    {"--dt", "sim.dt", "grid step (sim.dt)"},
    {"--scheme", "filter.scheme", "euler|robust (filter.scheme)"},
    {"--window", "preprocess.window", "moving-average window (preprocess.window)"},
    {"--threshold", "decision.threshold", "alert threshold (decision.threshold)"},
    {"--run-length", "decision.run_length", "alert run length (decision.run_length)"},
};

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    namespace ch = ctmc_hums;

    CLI::App app{"Continuous-time hidden Markov filtering for degradation detection"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);

    // Every configuration key is also a flag of the same name.
    std::map<std::string, std::string> overrides;
    for (const auto& key : ch::Config::known_keys()) {
        app.add_option_function<std::string>(
               "--" + key.name, [&overrides, name = key.name](const std::string& v) { overrides[name] = v; },
               key.help + " [" + key.default_value + "]")
            ->group("Configuration keys");
    }
    for (const auto& alias : kAliases) {
        app.add_option_function<std::string>(
               alias.flag, [&overrides, key = alias.key](const std::string& v) { overrides[key] = v; }, alias.help);
    }

    std::string fleet_path, series_path, trajectory_path, estimate_series;
    app.add_subcommand("simulate", "simulate a chain, its observations and the filter");
    app.add_subcommand("sensitivity", "decision agreement under perturbed parameters");
    auto* estimate = app.add_subcommand("estimate", "iterative parameter estimation");
    estimate->add_option("--series", estimate_series, "observation CSV (t,y or startup_index,tmf_l); default: simulate")
        ->check(CLI::ExistingFile);
    auto* preprocess = app.add_subcommand("preprocess", "temperature correction and smoothing of a fleet");
    preprocess->add_option("fleet", fleet_path, "fleet CSV file or directory")->required();
    auto* filter = app.add_subcommand("filter", "filter one observation series");
    filter->add_option("series", series_path, "observation CSV")->required()->check(CLI::ExistingFile);
    auto* detect = app.add_subcommand("detect", "apply the alert rule to a filter trajectory");
    detect->add_option("trajectory", trajectory_path, "filter trajectory CSV")->required()->check(CLI::ExistingFile);
    auto* pipeline = app.add_subcommand("pipeline", "preprocess, filter, detect and score a fleet");
    pipeline->add_option("fleet", fleet_path, "fleet CSV file or directory")->required();
    app.add_subcommand("fleet-gen", "write a synthetic fleet");
    auto* sweep = app.add_subcommand("sweep", "confusion matrices over a grid of alert rules");
    sweep->add_option("fleet", fleet_path, "fleet CSV file or directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    ch::RunConfig cfg;
    try {
        ch::Config config;
        if (!config_path.empty()) config.load_file(config_path);
        for (const auto& [key, value] : overrides) config.set(key, value);
        cfg = ch::RunConfig::from(config);
    } catch (const ch::Error& e) {
        spdlog::error("{}", e.what());
        return 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    spdlog::info("{}: out={} seed={}", name, cfg.out_dir.string(), cfg.seed);
    try {
        ch::json summary;
        if (name == "simulate") summary = ch::cmd_simulate(cfg);
        else if (name == "sensitivity") summary = ch::cmd_sensitivity(cfg);
        else if (name == "estimate")
            summary = ch::cmd_estimate(cfg, estimate_series.empty() ? std::nullopt
                                                                    : std::optional<std::filesystem::path>(estimate_series));
        else if (name == "preprocess") summary = ch::cmd_preprocess(cfg, fleet_path);
        else if (name == "filter") summary = ch::cmd_filter(cfg, series_path);
        else if (name == "detect") summary = ch::cmd_detect(cfg, trajectory_path);
        else if (name == "pipeline") summary = ch::cmd_pipeline(cfg, fleet_path);
        else if (name == "fleet-gen") summary = ch::cmd_fleet_gen(cfg);
        else if (name == "sweep") summary = ch::cmd_sweep(cfg, fleet_path);

        if (summary.contains("errors"))
            for (const auto& e : summary["errors"])
                spdlog::warn("{}: {}", e["appliance_id"].get<std::string>(), e["error"].get<std::string>());
        std::cout << summary.dump(2) << '\n';
    } catch (const ch::ConfigError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
