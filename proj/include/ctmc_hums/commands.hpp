#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctmc_hums/config.hpp"
#include "ctmc_hums/decision.hpp"
#include "ctmc_hums/logbook_io.hpp"
#include "ctmc_hums/markov_chain.hpp"
#include "ctmc_hums/observation.hpp"
#include "ctmc_hums/zakai_filter.hpp"

namespace ctmc_hums {

using json = nlohmann::json;

/// Independent 64-bit stream seed derived from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Runs fn(0..n-1) on up to `workers` threads (0: hardware concurrency).
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// One simulated chain, its observation path and the filtered posterior.
struct SimulationRun {
    ChainPath path;
    ObservationSeries series;
    FilterTrajectory trajectory;
};

SimulationRun simulate_run(const RunConfig& cfg, std::uint64_t seed);

/// Mean over grid points of |P(X_t = target | Y) - 1{X_t = target}|. Grid
/// points less than `exclude_after_jump` time units after a jump are skipped.
double tracking_error(const FilterTrajectory& traj, const ChainPath& path, StateIndex target,
                      double exclude_after_jump = 0.0);

/// Target-state posterior read every `interval` time units (decision points).
std::vector<double> decision_points(const FilterTrajectory& traj, StateIndex target, double interval);

struct SensitivityVariant {
    std::string label;
    GeneratorMatrix A;
    SlopeVector c;
    std::size_t fired = 0;
    std::size_t agreements = 0;           ///< same fire / no-fire decision as the true model
    std::vector<double> index_differences;  ///< |index - true index| where both fire

    double agreement_rate(std::size_t trajectories) const;
    double median_index_difference() const;
};

struct SensitivityReport {
    std::size_t trajectories = 0;
    std::size_t baseline_fired = 0;
    std::vector<SensitivityVariant> variants;
    /// Posterior of the first trajectory at decision points: baseline then variants.
    std::vector<std::vector<double>> overlay;
    double overlay_interval = 1.0;
};

SensitivityReport run_sensitivity(const RunConfig& cfg);

struct ApplianceResult {
    std::string appliance_id;
    bool failed = false;
    std::optional<long long> failure_startup;
    std::size_t dropped_records = 0;
    double noise_scale = 0.0;
    RegressionFit fit;
    SmoothedSeries smoothed;
    std::vector<double> posterior;  ///< target-state probability at each smoothed point
    DetectionOutcome outcome;
    std::optional<long long> detection_startup;
    std::optional<std::size_t> failure_index;
    std::size_t clamp_count = 0;
};

struct PipelineReport {
    std::vector<ApplianceResult> appliances;
    std::vector<std::pair<std::string, std::string>> errors;  ///< (appliance id, message)
    ConfusionMatrix confusion;
};

/// Preprocess -> filter -> detect for one logbook.
ApplianceResult process_appliance(const RunConfig& cfg, const ApplianceLogbook& book,
                                  const std::optional<RegressionFit>& pooled);

/// Whole fleet, appliances in parallel; a failing logbook is reported in
/// `errors` and left out of the confusion matrix.
PipelineReport run_pipeline(const RunConfig& cfg, const FleetDataset& fleet);

json to_json(const ConfusionMatrix& m);
json to_json(const PipelineReport& report);

// Subcommands. Each writes its files under cfg.out_dir and returns the
// summary document it also stores as summary.json.
json cmd_simulate(const RunConfig& cfg);
json cmd_sensitivity(const RunConfig& cfg);
json cmd_estimate(const RunConfig& cfg, const std::optional<std::filesystem::path>& series_file);
json cmd_preprocess(const RunConfig& cfg, const std::filesystem::path& fleet_path);
json cmd_filter(const RunConfig& cfg, const std::filesystem::path& series_file);
json cmd_detect(const RunConfig& cfg, const std::filesystem::path& trajectory_file);
json cmd_pipeline(const RunConfig& cfg, const std::filesystem::path& fleet_path);
json cmd_fleet_gen(const RunConfig& cfg);
json cmd_sweep(const RunConfig& cfg, const std::filesystem::path& fleet_path);

}  // namespace ctmc_hums
