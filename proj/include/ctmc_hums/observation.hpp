#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ctmc_hums/markov_chain.hpp"

namespace ctmc_hums {

/// Per-state observation drift c = (c_1, ..., c_N); c(X_t) = <X_t, c>.
class SlopeVector {
public:
    explicit SlopeVector(Eigen::VectorXd c);
    SlopeVector(std::initializer_list<double> c);

    std::size_t size() const noexcept { return static_cast<std::size_t>(c_.size()); }
    const Eigen::VectorXd& values() const noexcept { return c_; }
    double operator[](std::size_t i) const { return c_(static_cast<Eigen::Index>(i)); }

private:
    Eigen::VectorXd c_;
};

/// Cumulative observation process Y sampled on the uniform grid t0 + k*dt.
class ObservationSeries {
public:
    ObservationSeries(double t0, double dt, std::vector<double> y);

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    std::size_t size() const noexcept { return y_.size(); }
    std::size_t n_increments() const noexcept { return y_.size() - 1; }
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
    std::span<const double> values() const noexcept { return y_; }
    double increment(std::size_t k) const { return y_[k + 1] - y_[k]; }
    std::vector<double> increments() const;

    /// Keeps every `stride`-th grid point, i.e. the same path on a coarser grid.
    ObservationSeries subsample(std::size_t stride) const;

private:
    double t0_;
    double dt_;
    std::vector<double> y_;
};

/// Euler scheme for dY = c(X_t) dt + noise_scale dW on [0, path.horizon],
/// with the chain read at left grid endpoints.
ObservationSeries simulate_observation(const ChainPath& path, const SlopeVector& c, double dt,
                                       double noise_scale, std::uint64_t rng_seed);

ObservationSeries from_values(double t0, double dt, std::vector<double> values);

/// Chain state at each grid time of a series (left-endpoint sampling).
std::vector<StateIndex> sample_path_on_grid(const ChainPath& path, std::size_t n_points, double dt);

/// CSV with header `t,y`.
void write_observation_csv(std::ostream& os, const ObservationSeries& series);
ObservationSeries read_observation_csv(std::istream& is);

}  // namespace ctmc_hums
