#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctmc_hums/decision.hpp"
#include "ctmc_hums/estimation.hpp"
#include "ctmc_hums/logbook_io.hpp"
#include "ctmc_hums/preprocessing.hpp"
#include "ctmc_hums/zakai_filter.hpp"

namespace ctmc_hums {

/// Flat key=value configuration with dotted keys ("model.A", "filter.scheme").
/// Files may also group keys under "[section]" headers; "#" starts a comment.
/// Only known keys are accepted.
class Config {
public:
    struct Key {
        std::string name;
        std::string default_value;
        std::string help;
    };

    Config();

    static const std::vector<Key>& known_keys();

    void load_file(const std::filesystem::path& path);
    void load(std::istream& is, const std::string& source_name = "<config>");
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::size_t get_size(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    /// "a b; c d" (commas also separate entries).
    Eigen::MatrixXd get_matrix(const std::string& key) const;
    Eigen::VectorXd get_vector(const std::string& key) const;
    /// '|'-separated list of matrices or vectors.
    std::vector<Eigen::MatrixXd> get_matrix_list(const std::string& key) const;
    std::vector<Eigen::VectorXd> get_vector_list(const std::string& key) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

Eigen::MatrixXd parse_matrix(const std::string& text);
Eigen::VectorXd parse_vector(const std::string& text);

/// Typed view of a Config, validated on construction.
struct RunConfig {
    // Simulation model (defaults: the two-state benchmark of the simulation study).
    FilterModel model{GeneratorMatrix::two_state(0.1, 0.05), SlopeVector{-1.0, 1.0}, 1.0};
    InitialLaw p0 = InitialLaw::point_mass(2, 0);
    StateIndex initial_state = 0;
    double horizon = 200.0;
    double dt = 0.01;

    // Model applied to logbook data.
    ModelParameters industrial = industrial_defaults();
    InitialLaw industrial_p0{Eigen::Vector2d(0.99, 0.01)};
    std::optional<double> industrial_noise_scale;  ///< empty: calibrate per appliance
    std::size_t calibration_span = 50;

    FilterConfig filter;
    DecisionRule rule;
    PreprocessOptions preprocess;

    std::vector<GeneratorMatrix> sensitivity_A;
    std::vector<SlopeVector> sensitivity_c;
    std::size_t sensitivity_trajectories = 50;
    double decision_interval = 1.0;  ///< simulated time between decision points

    EstimationConfig estimation;
    GeneratorMatrix estimation_A0 = GeneratorMatrix::two_state(0.2, 0.2);
    SlopeVector estimation_c0{-0.5, 0.5};

    SyntheticFleetConfig fleet;

    std::vector<double> sweep_thresholds;
    std::vector<std::size_t> sweep_run_lengths;

    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "out";
    std::size_t workers = 0;  ///< 0: hardware concurrency

    static RunConfig from(const Config& cfg);
};

}  // namespace ctmc_hums
