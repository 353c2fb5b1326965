#include "ctmc_hums/observation.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"

namespace ctmc_hums {

SlopeVector::SlopeVector(Eigen::VectorXd c) : c_(std::move(c)) {
    if (c_.size() == 0) throw DimensionError("slope vector is empty");
    if (!c_.allFinite()) throw Error("slope vector has non-finite entries");
}

SlopeVector::SlopeVector(std::initializer_list<double> c)
    : SlopeVector(Eigen::Map<const Eigen::VectorXd>(c.begin(), static_cast<Eigen::Index>(c.size()))) {}

ObservationSeries::ObservationSeries(double t0, double dt, std::vector<double> y)
    : t0_(t0), dt_(dt), y_(std::move(y)) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw Error("grid step must be positive");
    if (!std::isfinite(t0_)) throw Error("series start time must be finite");
    if (y_.size() < 2) throw SeriesTooShortError(y_.size(), 2);
    for (double v : y_)
        if (!std::isfinite(v)) throw Error("observation series has non-finite values");
}

std::vector<double> ObservationSeries::increments() const {
    std::vector<double> dy(y_.size() - 1);
    for (std::size_t k = 0; k + 1 < y_.size(); ++k) dy[k] = y_[k + 1] - y_[k];
    return dy;
}

ObservationSeries ObservationSeries::subsample(std::size_t stride) const {
    if (stride == 0) throw Error("stride must be positive");
    std::vector<double> y;
    for (std::size_t k = 0; k < y_.size(); k += stride) y.push_back(y_[k]);
    return ObservationSeries(t0_, dt_ * static_cast<double>(stride), std::move(y));
}

std::vector<StateIndex> sample_path_on_grid(const ChainPath& path, std::size_t n_points, double dt) {
    std::vector<StateIndex> out(n_points);
    std::size_t jump = 0;
    for (std::size_t k = 0; k < n_points; ++k) {
        const double t = static_cast<double>(k) * dt;
        while (jump < path.jump_times.size() && path.jump_times[jump] <= t) ++jump;
        out[k] = path.states[jump];
    }
    return out;
}

ObservationSeries simulate_observation(const ChainPath& path, const SlopeVector& c, double dt,
                                       double noise_scale, std::uint64_t rng_seed) {
    if (!(dt > 0.0)) throw Error("grid step must be positive");
    if (!(noise_scale >= 0.0)) throw Error("noise scale must be non-negative");
    for (StateIndex s : path.states)
        if (s >= c.size()) throw DimensionError("path visits a state with no slope entry");

    const auto n_steps = static_cast<std::size_t>(std::floor(path.horizon / dt + 1e-9));
    if (n_steps < 2) throw SeriesTooShortError(n_steps + 1, 3);

    const auto states = sample_path_on_grid(path, n_steps, dt);
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double diffusion = noise_scale * std::sqrt(dt);

    std::vector<double> y(n_steps + 1, 0.0);
    for (std::size_t k = 0; k < n_steps; ++k)
        y[k + 1] = y[k] + c[states[k]] * dt + diffusion * normal(rng);
    return ObservationSeries(0.0, dt, std::move(y));
}

ObservationSeries from_values(double t0, double dt, std::vector<double> values) {
    return ObservationSeries(t0, dt, std::move(values));
}

void write_observation_csv(std::ostream& os, const ObservationSeries& series) {
    os << "t,y\n";
    for (std::size_t k = 0; k < series.size(); ++k)
        os << csv::format_double(series.time(k)) << ',' << csv::format_double(series.values()[k]) << '\n';
}

ObservationSeries read_observation_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || csv::trim(line) != "t,y")
        throw SchemaError("observation CSV must start with header t,y");
    std::vector<double> t, y;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != 2) throw ParseError("<observation>", line_no, "expected 2 fields");
        const auto tv = csv::parse_double(fields[0]);
        const auto yv = csv::parse_double(fields[1]);
        if (!tv || !yv) throw ParseError("<observation>", line_no, "bad number");
        t.push_back(*tv);
        y.push_back(*yv);
    }
    if (t.size() < 2) throw SeriesTooShortError(t.size(), 2);
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * std::max(1.0, std::abs(dt)))
            throw Error("observation grid is not uniform near row " + std::to_string(k + 1));
    }
    return ObservationSeries(t.front(), dt, std::move(y));
}

}  // namespace ctmc_hums
