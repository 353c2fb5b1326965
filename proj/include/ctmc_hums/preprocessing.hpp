#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ctmc_hums/logbook_io.hpp"
#include "ctmc_hums/observation.hpp"

namespace ctmc_hums {

struct TemperatureReading {
    double initial_temp_c = 0.0;
    double tmf = 0.0;
};

/// tmf ~ intercept + slope * initial_temp, by ordinary least squares.
struct RegressionFit {
    double intercept = 0.0;
    double slope = 0.0;
    std::size_t n_points = 0;
    double reference_temp_c = 10.0;
};

/// Throws DegenerateRegressionError unless at least two temperatures differ.
RegressionFit fit_temperature_regression(std::span<const TemperatureReading> records,
                                         double reference_temp_c = 10.0);

/// Tmf brought to the reference temperature: tmf - slope * (temp - reference).
double correct_tmf(const TemperatureReading& record, const RegressionFit& fit);

/// Trailing moving average. values[k] is the mean of inputs k .. k+window-1,
/// i.e. the value at 1-based startup start_index + k.
struct SmoothedSeries {
    std::size_t start_index = 0;
    std::vector<double> values;
    /// Logbook startup index for each value when produced from a logbook.
    std::vector<long long> startup_indices;
};

SmoothedSeries smooth(std::span<const double> values, std::size_t window = 20);

struct PreprocessOptions {
    std::size_t window = 20;
    double reference_temp_c = 10.0;
    bool pooled_regression = false;
};

struct PreprocessedAppliance {
    std::string appliance_id;
    RegressionFit fit;
    std::vector<long long> startup_indices;  ///< records kept after cleaning
    std::vector<double> corrected;           ///< temperature-corrected Tmf per kept record
    SmoothedSeries smoothed;
    std::size_t dropped = 0;                 ///< records with missing or non-positive Tmf
};

/// Records usable for the model: finite positive Tmf and finite temperature.
std::vector<LogbookRecord> clean_records(const ApplianceLogbook& book, std::size_t* dropped = nullptr);

/// Regression on every clean record of the fleet.
RegressionFit fit_pooled_regression(const FleetDataset& fleet, double reference_temp_c = 10.0);

/// Clean -> regress (own fit unless `pooled` is given) -> correct -> smooth.
PreprocessedAppliance preprocess_logbook(const ApplianceLogbook& book, const PreprocessOptions& opts,
                                         const std::optional<RegressionFit>& pooled = std::nullopt);

/// Smoothed series as the observation path Y on a one-startup grid.
ObservationSeries to_observation(const SmoothedSeries& series);

/// Sample standard deviation of the first differences over the leading
/// `span` points of the smoothed series.
double calibrate_noise_scale(const SmoothedSeries& series, std::size_t span = 50);

/// CSV with header `startup_index,tmf_l`.
void write_smoothed_csv(std::ostream& os, const SmoothedSeries& series);

}  // namespace ctmc_hums
