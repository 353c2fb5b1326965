#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctmc_hums/markov_chain.hpp"
#include "ctmc_hums/observation.hpp"

namespace ctmc_hums {

enum class Scheme {
    euler,   ///< explicit Euler on the unnormalized (Zakai) equations
    robust,  ///< exp(A^T dt) prediction followed by exact Gaussian likelihood weights
};

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& text);

struct FilterConfig {
    Scheme scheme = Scheme::robust;
    /// Working arrays are rescaled to unit mass every this many steps.
    std::size_t renormalize_every = 1;
    /// Posterior components are floored at clamp_eps * max component.
    double clamp_eps = 1e-12;

    void check() const;
};

/// Hidden-state model seen by the filter: dY = c(X) dt + noise_scale dW.
struct FilterModel {
    GeneratorMatrix A;
    SlopeVector c;
    double noise_scale = 1.0;

    std::size_t n_states() const noexcept { return A.n_states(); }
    void check() const;
};

/// Normalized filter state. Every array holds its unnormalized quantity
/// divided by sigma(1); the true scale is exp(log_norm).
///
///  q          sigma(X_t) / sigma(1), the posterior P(X_t = e_i | Y_0..t)
///  jump_aux   N x N^2, column i*N+j is sigma(J^{ij}_t X_t) (i -> j jump count)
///  occ_aux    N x N,   column i is sigma(O^i_t X_t) (time spent in i)
///  drift_aux  N x N,   column i is sigma(T^i_t X_t), T^i_t = int <X, e_i> dY
struct FilterState {
    Eigen::VectorXd q;
    double log_norm = 0.0;
    Eigen::MatrixXd jump_aux;
    Eigen::MatrixXd occ_aux;
    Eigen::MatrixXd drift_aux;
    double t = 0.0;
    std::size_t steps = 0;
    std::size_t clamp_count = 0;

    std::size_t n_states() const noexcept { return static_cast<std::size_t>(q.size()); }
    Eigen::Index jump_column(std::size_t from, std::size_t to) const noexcept {
        return static_cast<Eigen::Index>(from * n_states() + to);
    }
};

FilterState init_filter(const InitialLaw& p0, std::size_t n_states);

/// Advances one grid step with observation increment dy. Throws
/// NumericalBlowupError when the result is not finite.
FilterState step(const FilterState& state, const GeneratorMatrix& A, const SlopeVector& c,
                 double noise_scale, double dy, double dt, const FilterConfig& cfg);

/// Filter reduced to totals: contractions of the auxiliary arrays against the
/// ones vector, all divided by sigma(1).
struct FunctionalTotals {
    Eigen::MatrixXd jumps;       ///< (i, j): expected number of i -> j jumps
    Eigen::VectorXd occupation;  ///< expected time spent in each state
    Eigen::VectorXd drift;       ///< expected int <X, e_i> dY
    double log_norm = 0.0;       ///< log sigma(1)
};

FunctionalTotals reduce_functionals(const FilterState& state);

struct FilterTrajectory {
    std::vector<double> times;
    Eigen::MatrixXd posterior;  ///< N x times.size(); column k is the posterior at times[k]
    FilterState terminal;

    std::vector<double> state_probability(std::size_t state) const;
};

/// Online filter for a fixed model and grid step. Holds the propagation
/// matrices and scratch space so repeated updates do not allocate.
class ZakaiFilter {
public:
    ZakaiFilter(FilterModel model, double dt, FilterConfig cfg);

    void reset(const InitialLaw& p0, double t0 = 0.0);
    void load(const FilterState& state);

    /// One grid step with observation increment dy.
    void update(double dy);

    /// Normalized posterior written into out (resized to N).
    void posterior(Eigen::VectorXd& out) const;
    FilterState state() const;

    const FilterModel& model() const noexcept { return model_; }
    double dt() const noexcept { return dt_; }

private:
    void normalize();
    void euler_update(double dy);
    void robust_update(double dy);

    FilterModel model_;
    double dt_;
    FilterConfig cfg_;
    Eigen::MatrixXd transition_t_;  // exp(A dt)^T
    Eigen::MatrixXd transition_;    // exp(A dt)
    Eigen::MatrixXd generator_t_;   // A^T
    Eigen::VectorXd likelihood_gain_;  // c / noise_scale^2

    FilterState work_;
    Eigen::VectorXd scratch_q_;
    Eigen::MatrixXd scratch_jump_, scratch_occ_, scratch_drift_;
};

FilterTrajectory run_filter(const ObservationSeries& series, const GeneratorMatrix& A,
                            const SlopeVector& c, double noise_scale, const InitialLaw& p0,
                            const FilterConfig& cfg = {});

/// Same recursion as run_filter without storing the posterior path.
FilterState run_filter_terminal(const ObservationSeries& series, const GeneratorMatrix& A,
                                const SlopeVector& c, double noise_scale, const InitialLaw& p0,
                                const FilterConfig& cfg = {});

/// CSV with header `t,p_state_0,...,p_state_{N-1}`, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const FilterTrajectory& traj);

}  // namespace ctmc_hums
