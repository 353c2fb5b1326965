#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctmc_hums/markov_chain.hpp"
#include "ctmc_hums/observation.hpp"

namespace ctmc_hums {

/// One startup entry. Missing numeric fields are NaN.
struct LogbookRecord {
    long long startup_index = 0;
    double cum_hours = 0.0;
    double initial_temp_c = 0.0;
    double tmf_s = 0.0;
};

struct ApplianceLogbook {
    std::string appliance_id;
    std::vector<LogbookRecord> records;
    bool failed = false;
    std::optional<long long> failure_startup;

    void check() const;
};

struct FleetDataset {
    std::vector<ApplianceLogbook> appliances;

    std::size_t size() const noexcept { return appliances.size(); }
    void check() const;
};

inline constexpr const char* kFleetHeader =
    "appliance_id,startup_index,cum_hours,initial_temp_c,tmf_s,failed,failure_startup";

/// Reads one CSV file (any number of appliances, grouped by appliance_id) or
/// every *.csv file of a directory in name order.
FleetDataset read_fleet(const std::filesystem::path& path);
FleetDataset read_fleet_csv(std::istream& is, const std::string& source_name = "<fleet>");

/// A path ending in ".csv" gets a single concatenated file; any other path is
/// treated as a directory receiving one file per appliance.
void write_fleet(const FleetDataset& fleet, const std::filesystem::path& path);
void write_fleet_csv(std::ostream& os, const FleetDataset& fleet);

struct SyntheticFleetConfig {
    std::size_t n_stable = 23;
    std::size_t n_degrading = 5;

    /// Per-startup chain: the stable -> degraded rate of A draws the onset
    /// delay, c gives the Tmf slope per startup in each state.
    GeneratorMatrix A = GeneratorMatrix::two_state(1.0 / 100.0, 1.0 / 1000.0);
    SlopeVector c{0.0, 1.0};
    double noise_scale = 3.0;  ///< std of per-startup Tmf noise, seconds

    double temp_slope = 2.0;         ///< seconds per degree C
    double temp_intercept = 280.0;   ///< Tmf at 0 degrees C
    double temp_min_c = -10.0;
    double temp_max_c = 35.0;
    double unit_offset_spread = 20.0;  ///< per-appliance level offset, uniform +-

    std::size_t horizon = 300;            ///< longest stable logbook, startups
    std::size_t min_stable_startups = 80;  ///< earliest degradation onset
    std::size_t failure_gap_min = 50;
    std::size_t failure_gap_max = 100;
    double hours_per_startup = 1.5;

    std::uint64_t seed = 1;
};

/// Synthetic logbooks: raw Tmf = level + temp effect + integrated slope + noise.
/// Degrading appliances end at their failure startup.
FleetDataset generate_synthetic_fleet(const SyntheticFleetConfig& cfg);

/// Ground truth kept alongside a synthetic fleet for tests.
struct SyntheticTruth {
    std::vector<std::optional<long long>> onset_startup;
};
FleetDataset generate_synthetic_fleet(const SyntheticFleetConfig& cfg, SyntheticTruth& truth);

}  // namespace ctmc_hums
