#include "ctmc_hums/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"

namespace ctmc_hums {

RegressionFit fit_temperature_regression(std::span<const TemperatureReading> records,
                                         double reference_temp_c) {
    const std::size_t n = records.size();
    if (n < 2) throw DegenerateRegressionError();
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& r : records) {
        mean_x += r.initial_temp_c;
        mean_y += r.tmf;
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& r : records) {
        const double dx = r.initial_temp_c - mean_x;
        sxx += dx * dx;
        sxy += dx * (r.tmf - mean_y);
    }
    if (!(sxx > 0.0)) throw DegenerateRegressionError();
    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.n_points = n;
    fit.reference_temp_c = reference_temp_c;
    return fit;
}

double correct_tmf(const TemperatureReading& record, const RegressionFit& fit) {
    return record.tmf - fit.slope * (record.initial_temp_c - fit.reference_temp_c);
}

// Rolling sum with Kahan compensation; exact re-summation every window
// keeps the error bounded on long series.
SmoothedSeries smooth(std::span<const double> values, std::size_t window) {
    if (window == 0) throw Error("window must be positive");
    if (values.size() < window) throw SeriesTooShortError(values.size(), window);
    SmoothedSeries out;
    out.start_index = window;
    out.values.reserve(values.size() - window + 1);

    const double w = static_cast<double>(window);
    double sum = 0.0, comp = 0.0;
    auto add = [&](double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    for (std::size_t k = 0; k < window; ++k) add(values[k]);
    out.values.push_back(sum / w);
    for (std::size_t k = window; k < values.size(); ++k) {
        if ((k - window + 1) % window == 0) {
            sum = 0.0;
            comp = 0.0;
            for (std::size_t i = k - window + 1; i <= k; ++i) add(values[i]);
        } else {
            add(values[k]);
            add(-values[k - window]);
        }
        out.values.push_back(sum / w);
    }
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.startup_indices.push_back(static_cast<long long>(window + k));
    return out;
}

std::vector<LogbookRecord> clean_records(const ApplianceLogbook& book, std::size_t* dropped) {
    std::vector<LogbookRecord> kept;
    kept.reserve(book.records.size());
    for (const auto& r : book.records)
        if (std::isfinite(r.tmf_s) && r.tmf_s > 0.0 && std::isfinite(r.initial_temp_c)) kept.push_back(r);
    if (dropped) *dropped = book.records.size() - kept.size();
    return kept;
}

namespace {

std::vector<TemperatureReading> readings(const std::vector<LogbookRecord>& records) {
    std::vector<TemperatureReading> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({r.initial_temp_c, r.tmf_s});
    return out;
}

}  // namespace

RegressionFit fit_pooled_regression(const FleetDataset& fleet, double reference_temp_c) {
    std::vector<TemperatureReading> all;
    for (const auto& book : fleet.appliances) {
        const auto r = readings(clean_records(book));
        all.insert(all.end(), r.begin(), r.end());
    }
    return fit_temperature_regression(all, reference_temp_c);
}

PreprocessedAppliance preprocess_logbook(const ApplianceLogbook& book, const PreprocessOptions& opts,
                                         const std::optional<RegressionFit>& pooled) {
    PreprocessedAppliance out;
    out.appliance_id = book.appliance_id;
    const auto kept = clean_records(book, &out.dropped);
    const auto points = readings(kept);
    out.fit = pooled ? *pooled : fit_temperature_regression(points, opts.reference_temp_c);
    out.fit.reference_temp_c = opts.reference_temp_c;

    out.corrected.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        out.corrected.push_back(correct_tmf(points[k], out.fit));
        out.startup_indices.push_back(kept[k].startup_index);
    }
    out.smoothed = smooth(out.corrected, opts.window);
    for (std::size_t k = 0; k < out.smoothed.values.size(); ++k)
        out.smoothed.startup_indices[k] = out.startup_indices[k + opts.window - 1];
    return out;
}

ObservationSeries to_observation(const SmoothedSeries& series) {
    return from_values(static_cast<double>(series.start_index), 1.0, series.values);
}

double calibrate_noise_scale(const SmoothedSeries& series, std::size_t span) {
    const std::size_t n = std::min(span, series.values.size());
    if (n < 3) throw SeriesTooShortError(series.values.size(), 3);
    std::vector<double> diffs;
    for (std::size_t k = 1; k < n; ++k) diffs.push_back(series.values[k] - series.values[k - 1]);
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= static_cast<double>(diffs.size() - 1);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) throw Error("calibration span has zero variance; set the noise scale explicitly");
    return sd;
}

void write_smoothed_csv(std::ostream& os, const SmoothedSeries& series) {
    os << "startup_index,tmf_l\n";
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        const long long idx = k < series.startup_indices.size()
                                  ? series.startup_indices[k]
                                  : static_cast<long long>(series.start_index + k);
        os << idx << ',' << csv::format_double(series.values[k]) << '\n';
    }
}

}  // namespace ctmc_hums
