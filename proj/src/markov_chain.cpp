#include "ctmc_hums/markov_chain.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"

namespace ctmc_hums {

StateSpace::StateSpace(std::size_t n, std::vector<std::string> names)
    : n_states(n), labels(std::move(names)) {
    if (n_states < 2) throw DimensionError("state space needs at least two states");
    if (labels.empty()) {
        for (std::size_t i = 0; i < n_states; ++i) labels.push_back("state_" + std::to_string(i));
    }
    if (labels.size() != n_states) throw DimensionError("one label per state required");
}

GeneratorMatrix::GeneratorMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
        throw DimensionError("generator must be a non-empty square matrix");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        const auto row = static_cast<std::size_t>(i);
        double sum = 0.0;
        double scale = 1.0;
        for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
            const double a = entries_(i, j);
            if (!std::isfinite(a)) throw NonGeneratorError(row, "non-finite entry");
            if (i != j && a < 0.0) throw NonGeneratorError(row, "negative off-diagonal rate");
            sum += a;
            scale = std::max(scale, std::abs(a));
        }
        if (std::abs(sum) > kRowSumTolerance * scale)
            throw NonGeneratorError(row, "row sums to " + csv::format_double(sum));
    }
}

GeneratorMatrix GeneratorMatrix::from_rates(const Eigen::MatrixXd& rates) {
    Eigen::MatrixXd m = rates.cwiseMax(0.0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, i) = 0.0;
        m(i, i) = -m.row(i).sum();
    }
    return GeneratorMatrix(std::move(m));
}

GeneratorMatrix GeneratorMatrix::two_state(double rate_01, double rate_10) {
    Eigen::MatrixXd m(2, 2);
    m << -rate_01, rate_01, rate_10, -rate_10;
    return GeneratorMatrix(std::move(m));
}

Eigen::VectorXd GeneratorMatrix::two_state_stationary() const {
    if (n_states() != 2) throw DimensionError("closed-form stationary law needs N = 2");
    const double a = entries_(0, 1), b = entries_(1, 0);
    if (a + b <= 0.0) throw Error("chain has no transitions; stationary law not unique");
    Eigen::VectorXd pi(2);
    pi << b / (a + b), a / (a + b);
    return pi;
}

GeneratorMatrix validate_generator(const Eigen::MatrixXd& A) { return GeneratorMatrix(A); }

InitialLaw::InitialLaw(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    if (probs_.size() == 0) throw DimensionError("initial law is empty");
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
        if (!std::isfinite(probs_(i)) || probs_(i) < 0.0)
            throw Error("initial law entry " + std::to_string(i) + " is not a probability");
    }
    if (std::abs(probs_.sum() - 1.0) > kSumTolerance)
        throw Error("initial law sums to " + csv::format_double(probs_.sum()));
}

InitialLaw InitialLaw::point_mass(std::size_t n_states, StateIndex state) {
    if (state >= n_states) throw DimensionError("state index out of range");
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_states));
    p(static_cast<Eigen::Index>(state)) = 1.0;
    return InitialLaw(std::move(p));
}

std::vector<double> ChainPath::occupation(std::size_t n_states) const {
    std::vector<double> occ(n_states, 0.0);
    double last = 0.0;
    for (std::size_t k = 0; k < jump_times.size(); ++k) {
        occ.at(states[k]) += jump_times[k] - last;
        last = jump_times[k];
    }
    occ.at(states.back()) += horizon - last;
    return occ;
}

void ChainPath::check() const {
    if (states.size() != jump_times.size() + 1) throw Error("chain path: states/jumps size mismatch");
    double last = 0.0;
    for (std::size_t k = 0; k < jump_times.size(); ++k) {
        if (!(jump_times[k] > last) || jump_times[k] > horizon)
            throw Error("chain path: jump times must increase within (0, horizon]");
        if (states[k + 1] == states[k]) throw Error("chain path: jump without state change");
        last = jump_times[k];
    }
}

ChainPath simulate_chain(const GeneratorMatrix& A, StateIndex initial, double horizon,
                         std::uint64_t rng_seed) {
    const std::size_t n = A.n_states();
    if (initial >= n) throw DimensionError("initial state out of range");
    if (!(horizon > 0.0)) throw Error("horizon must be positive");

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ChainPath path;
    path.horizon = horizon;
    path.states.push_back(initial);
    StateIndex current = initial;
    double t = 0.0;
    for (;;) {
        const double rate = A.exit_rate(current);
        if (rate <= 0.0) break;  // absorbing
        t += std::exponential_distribution<double>(rate)(rng);
        if (t > horizon) break;

        double u = unif(rng) * rate;
        StateIndex next = current;
        // On round-off the last state with a positive rate is kept.
        for (StateIndex j = 0; j < n; ++j) {
            if (j == current || A(current, j) <= 0.0) continue;
            next = j;
            u -= A(current, j);
            if (u < 0.0) break;
        }
        path.jump_times.push_back(t);
        path.states.push_back(next);
        current = next;
    }
    return path;
}

Eigen::MatrixXd transition_matrix(const GeneratorMatrix& A, double t) {
    if (t < 0.0 || !std::isfinite(t)) throw Error("transition time must be finite and >= 0");
    const auto n = static_cast<Eigen::Index>(A.n_states());
    const double lambda = (-A.entries().diagonal()).maxCoeff();
    if (t == 0.0 || lambda <= 0.0) return Eigen::MatrixXd::Identity(n, n);

    // Halve the step until lambda*h <= 0.5, so the Poisson series converges fast.
    int squarings = 0;
    double h = t;
    while (lambda * h > 0.5) {
        h *= 0.5;
        ++squarings;
    }

    const Eigen::MatrixXd uniformized = Eigen::MatrixXd::Identity(n, n) + A.entries() / lambda;
    const double mu = lambda * h;
    double weight = std::exp(-mu);
    double mass = weight;
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd result = weight * power;
    for (int k = 1; 1.0 - mass > 1e-17 && k < 200; ++k) {
        power = power * uniformized;
        weight *= mu / k;
        mass += weight;
        result += weight * power;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;

    for (Eigen::Index i = 0; i < n; ++i) {
        result.row(i) = result.row(i).cwiseMax(0.0);
        result.row(i) /= result.row(i).sum();
    }
    return result;
}

InitialLaw forward_law(const GeneratorMatrix& A, const InitialLaw& p0, double t) {
    if (p0.size() != A.n_states()) throw DimensionError("initial law / generator size mismatch");
    if (t == 0.0) return p0;
    Eigen::VectorXd p = (p0.probs().transpose() * transition_matrix(A, t)).transpose();
    p = p.cwiseMax(0.0);
    p /= p.sum();
    return InitialLaw(std::move(p));
}

StateIndex state_at(const ChainPath& path, double t) {
    if (!(t >= 0.0 && t <= path.horizon)) throw std::out_of_range("time outside [0, horizon]");
    const auto it = std::upper_bound(path.jump_times.begin(), path.jump_times.end(), t);
    return path.states[static_cast<std::size_t>(it - path.jump_times.begin())];
}

void write_chain_path_csv(std::ostream& os, const ChainPath& path) {
    os << "t_jump,state_index\n";
    os << "0," << path.states.front() << '\n';
    for (std::size_t k = 0; k < path.jump_times.size(); ++k)
        os << csv::format_double(path.jump_times[k]) << ',' << path.states[k + 1] << '\n';
}

ChainPath read_chain_path_csv(std::istream& is, double horizon) {
    std::string line;
    if (!std::getline(is, line) || csv::trim(line) != "t_jump,state_index")
        throw SchemaError("chain path CSV must start with header t_jump,state_index");
    ChainPath path;
    path.horizon = horizon;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != 2) throw ParseError("<chain path>", line_no, "expected 2 fields");
        const auto t = csv::parse_double(fields[0]);
        const auto s = csv::parse_integer(fields[1]);
        if (!t || !s || *s < 0) throw ParseError("<chain path>", line_no, "bad number");
        if (path.states.empty()) {
            path.states.push_back(static_cast<StateIndex>(*s));
        } else {
            path.jump_times.push_back(*t);
            path.states.push_back(static_cast<StateIndex>(*s));
        }
    }
    if (path.states.empty()) throw SchemaError("chain path CSV has no rows");
    path.check();
    return path;
}

}  // namespace ctmc_hums
