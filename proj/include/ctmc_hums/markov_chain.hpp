#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ctmc_hums {

using StateIndex = std::size_t;

/// Finite state space {e_1, ..., e_N}; states are carried as indices into it.
struct StateSpace {
    std::size_t n_states = 2;
    std::vector<std::string> labels{"stable", "degraded"};

    StateSpace() = default;
    StateSpace(std::size_t n, std::vector<std::string> names);
    static StateSpace two_state() { return {}; }
};

/// Q-matrix in row convention: a_ij (i != j) is the jump rate i -> j and each
/// row sums to zero. Construction validates; an instance is always valid.
class GeneratorMatrix {
public:
    static constexpr double kRowSumTolerance = 1e-12;

    /// Throws NonGeneratorError naming the first offending row.
    explicit GeneratorMatrix(Eigen::MatrixXd entries);

    /// Builds a matrix from off-diagonal rates, filling the diagonal with
    /// minus the row sums. Negative rates are floored at zero.
    static GeneratorMatrix from_rates(const Eigen::MatrixXd& rates);

    static GeneratorMatrix two_state(double rate_01, double rate_10);

    std::size_t n_states() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

    /// Total exit rate -a_ii.
    double exit_rate(StateIndex i) const { return -entries_(i, i); }

    /// Stationary law of an irreducible 2-state chain; throws for N != 2.
    Eigen::VectorXd two_state_stationary() const;

private:
    Eigen::MatrixXd entries_;
};

GeneratorMatrix validate_generator(const Eigen::MatrixXd& A);

/// Probability vector over the state space.
class InitialLaw {
public:
    static constexpr double kSumTolerance = 1e-12;

    explicit InitialLaw(Eigen::VectorXd probs);
    static InitialLaw point_mass(std::size_t n_states, StateIndex state);

    std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
    const Eigen::VectorXd& probs() const noexcept { return probs_; }
    double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

private:
    Eigen::VectorXd probs_;
};

/// Piecewise-constant, right-continuous chain trajectory on [0, horizon].
struct ChainPath {
    std::vector<double> jump_times;   // strictly increasing, in (0, horizon]
    std::vector<StateIndex> states;   // states[0] is the initial state
    double horizon = 0.0;

    std::size_t n_jumps() const noexcept { return jump_times.size(); }

    /// Time spent in each state over [0, horizon].
    std::vector<double> occupation(std::size_t n_states) const;

    /// Throws Error when jump times or states break the path invariants.
    void check() const;
};

/// Exact jump-chain / holding-time simulation, deterministic for a seed.
ChainPath simulate_chain(const GeneratorMatrix& A, StateIndex initial, double horizon,
                         std::uint64_t rng_seed);

/// exp(t A) by uniformization with scaling and squaring. Rows are stochastic.
Eigen::MatrixXd transition_matrix(const GeneratorMatrix& A, double t);

/// p_t = p_0 exp(t A), the solution of the forward Kolmogorov equation.
InitialLaw forward_law(const GeneratorMatrix& A, const InitialLaw& p0, double t);

/// Value of the path at time t; throws std::out_of_range outside [0, horizon].
StateIndex state_at(const ChainPath& path, double t);

/// CSV with header `t_jump,state_index`; first row is (0, initial state).
void write_chain_path_csv(std::ostream& os, const ChainPath& path);
ChainPath read_chain_path_csv(std::istream& is, double horizon);

}  // namespace ctmc_hums
