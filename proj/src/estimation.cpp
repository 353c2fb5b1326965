#include "ctmc_hums/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ctmc_hums/errors.hpp"

namespace ctmc_hums {

void EstimationConfig::check() const {
    if (!estimate_A && !estimate_c) throw ConfigError("nothing to estimate: enable A and/or c");
    if (max_iters == 0) throw ConfigError("max_iters must be positive");
    if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
}

namespace {

double rel_change(double before, double after) {
    const double scale = std::max(std::abs(before), std::abs(after));
    return scale > 0.0 ? std::abs(after - before) / scale : 0.0;
}

// Occupation below this is indistinguishable from the clamp floor.
double occupation_floor(const ObservationSeries& series, const FilterConfig& fcfg) {
    return 10.0 * fcfg.clamp_eps * static_cast<double>(series.n_increments()) * series.dt();
}

}  // namespace

EstimationResult estimate_parameters(const ObservationSeries& series, const GeneratorMatrix& A0,
                                     const SlopeVector& c0, double noise_scale,
                                     const InitialLaw& p0, const FilterConfig& fcfg,
                                     const EstimationConfig& ecfg) {
    ecfg.check();
    fcfg.check();
    if (c0.size() != A0.n_states()) throw DimensionError("slope vector and generator sizes differ");
    const auto n = static_cast<Eigen::Index>(A0.n_states());
    const double floor = occupation_floor(series, fcfg);

    EstimationResult result{A0, c0, {{A0, c0, 0.0}}, false, {}};
    GeneratorMatrix A = A0;
    SlopeVector c = c0;

    auto flag_degenerate = [&](Eigen::Index i, double occ) {
        const auto s = static_cast<StateIndex>(i);
        if (!ecfg.hold_degenerate) throw DegenerateOccupationError(s, occ);
        if (std::find(result.degenerate_states.begin(), result.degenerate_states.end(), s) ==
            result.degenerate_states.end())
            result.degenerate_states.push_back(s);
    };

    for (std::size_t iter = 0; iter < ecfg.max_iters; ++iter) {
        double change = 0.0;

        if (ecfg.estimate_A) {
            const auto totals =
                reduce_functionals(run_filter_terminal(series, A, c, noise_scale, p0, fcfg));
            Eigen::MatrixXd rates = A.entries();
            for (Eigen::Index i = 0; i < n; ++i) {
                const double occ = totals.occupation(i);
                if (!(occ > floor)) {
                    flag_degenerate(i, occ);
                    continue;
                }
                for (Eigen::Index j = 0; j < n; ++j)
                    if (i != j) rates(i, j) = totals.jumps(i, j) / occ;
            }
            GeneratorMatrix next = GeneratorMatrix::from_rates(rates);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    if (i != j) change = std::max(change, rel_change(A(i, j), next(i, j)));
            A = std::move(next);
        }

        if (ecfg.estimate_c) {
            const auto totals =
                reduce_functionals(run_filter_terminal(series, A, c, noise_scale, p0, fcfg));
            Eigen::VectorXd slopes = c.values();
            for (Eigen::Index i = 0; i < n; ++i) {
                const double occ = totals.occupation(i);
                if (!(occ > floor)) {
                    flag_degenerate(i, occ);
                    continue;
                }
                slopes(i) = totals.drift(i) / occ;
            }
            for (Eigen::Index i = 0; i < n; ++i)
                change = std::max(change, rel_change(c.values()(i), slopes(i)));
            c = SlopeVector(std::move(slopes));
        }

        result.iterates.push_back({A, c, change});
        if (change < ecfg.rel_tol) {
            result.converged = true;
            break;
        }
    }
    result.A_hat = A;
    result.c_hat = c;
    return result;
}

void SurvivalSample::check() const {
    if (exposures.size() != event_flags.size())
        throw DimensionError("exposures and event flags differ in length");
    for (double e : exposures)
        if (!(e > 0.0) || !std::isfinite(e)) throw Error("exposures must be positive and finite");
}

double estimate_exponential_rate(const SurvivalSample& sample) {
    sample.check();
    double exposure = 0.0;
    std::size_t events = 0;
    for (std::size_t k = 0; k < sample.exposures.size(); ++k) {
        exposure += sample.exposures[k];
        if (sample.event_flags[k]) ++events;
    }
    if (!(exposure > 0.0)) throw ZeroExposureError();
    return static_cast<double>(events) / exposure;
}

ModelParameters industrial_defaults() {
    return {GeneratorMatrix::two_state(1.0 / 100.0, 1.0 / 1000.0), SlopeVector{0.0, 1.0}};
}

void write_estimation_report(std::ostream& os, const EstimationResult& result,
                             const EstimationConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(result.A_hat.n_states());
    char buf[64];
    os << "iter";
    if (cfg.estimate_A)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) {
                    std::snprintf(buf, sizeof buf, "  %14s", ("a_" + std::to_string(i + 1) + std::to_string(j + 1)).c_str());
                    os << buf;
                }
    if (cfg.estimate_c)
        for (Eigen::Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "  %14s", ("c_" + std::to_string(i + 1)).c_str());
            os << buf;
        }
    os << "      rel_change\n";
    for (std::size_t k = 0; k < result.iterates.size(); ++k) {
        const auto& it = result.iterates[k];
        std::snprintf(buf, sizeof buf, "%4zu", k);
        os << buf;
        if (cfg.estimate_A)
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    if (i != j) {
                        std::snprintf(buf, sizeof buf, "  %14.8g", it.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
                        os << buf;
                    }
        if (cfg.estimate_c)
            for (Eigen::Index i = 0; i < n; ++i) {
                std::snprintf(buf, sizeof buf, "  %14.8g", it.c.values()(i));
                os << buf;
            }
        std::snprintf(buf, sizeof buf, "  %14.6g\n", it.max_rel_change);
        os << buf;
    }
    os << "converged: " << (result.converged ? "true" : "false") << " after "
       << result.iterates.size() - 1 << " iterations\n";
    if (!result.degenerate_states.empty()) {
        os << "degenerate states held at previous values:";
        for (auto s : result.degenerate_states) os << ' ' << s + 1;
        os << '\n';
    }
}

}  // namespace ctmc_hums
