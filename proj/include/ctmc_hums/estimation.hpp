#pragma once

#include <iosfwd>
#include <vector>

#include "ctmc_hums/markov_chain.hpp"
#include "ctmc_hums/observation.hpp"
#include "ctmc_hums/zakai_filter.hpp"

namespace ctmc_hums {

struct EstimationConfig {
    std::size_t max_iters = 50;
    double rel_tol = 1e-4;
    bool estimate_A = true;
    bool estimate_c = false;
    /// Keep a degenerate row at its previous value instead of throwing
    /// DegenerateOccupationError.
    bool hold_degenerate = false;

    void check() const;
};

struct EstimationIterate {
    GeneratorMatrix A;
    SlopeVector c;
    double max_rel_change = 0.0;  ///< versus the previous iterate; 0 for the starting point
};

struct EstimationResult {
    GeneratorMatrix A_hat;
    SlopeVector c_hat;
    std::vector<EstimationIterate> iterates;  ///< iterates[0] is the starting point
    bool converged = false;
    std::vector<StateIndex> degenerate_states;
};

/// Fixed-point iteration on the filter-based estimators
///   a_ij = J^ij / O^i,  c_i = T^i / O^i,
/// re-running the filter with the latest parameters at every iteration.
/// When both flags are set, A is refreshed first and c is estimated with the
/// new A inside the same iteration.
EstimationResult estimate_parameters(const ObservationSeries& series, const GeneratorMatrix& A0,
                                     const SlopeVector& c0, double noise_scale,
                                     const InitialLaw& p0, const FilterConfig& fcfg,
                                     const EstimationConfig& ecfg);

/// Time at risk and failure indicator per appliance.
struct SurvivalSample {
    std::vector<double> exposures;
    std::vector<bool> event_flags;

    void check() const;
};

/// Maximum-likelihood rate of a right-censored exponential sample:
/// number of events over total exposure.
double estimate_exponential_rate(const SurvivalSample& sample);

struct ModelParameters {
    GeneratorMatrix A;
    SlopeVector c;
};

/// Parameter choice for the cool-down-time application: a flat stable
/// regime, unit slope when degraded, a_12 = 1/100 and a small reverse rate
/// a_21 = 1/1000 so the filter can still leave the degraded state.
ModelParameters industrial_defaults();

/// Plain-text report: one row per iterate with every estimated entry.
void write_estimation_report(std::ostream& os, const EstimationResult& result,
                             const EstimationConfig& cfg);

}  // namespace ctmc_hums
