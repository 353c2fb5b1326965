#include "ctmc_hums/zakai_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"

namespace ctmc_hums {

std::string to_string(Scheme s) { return s == Scheme::euler ? "euler" : "robust"; }

Scheme parse_scheme(const std::string& text) {
    if (text == "euler") return Scheme::euler;
    if (text == "robust") return Scheme::robust;
    throw ConfigError("unknown filter scheme '" + text + "' (expected euler|robust)");
}

void FilterConfig::check() const {
    if (renormalize_every == 0) throw ConfigError("renormalize_every must be positive");
    if (!(clamp_eps > 0.0 && clamp_eps <= 1e-3)) throw ConfigError("clamp_eps must lie in (0, 1e-3]");
}

void FilterModel::check() const {
    if (c.size() != A.n_states()) throw DimensionError("slope vector and generator sizes differ");
    if (!(noise_scale > 0.0) || !std::isfinite(noise_scale))
        throw Error("noise scale must be positive and finite");
}

FilterState init_filter(const InitialLaw& p0, std::size_t n_states) {
    if (p0.size() != n_states) throw DimensionError("initial law does not match state count");
    const auto n = static_cast<Eigen::Index>(n_states);
    FilterState s;
    s.q = p0.probs();
    s.jump_aux = Eigen::MatrixXd::Zero(n, n * n);
    s.occ_aux = Eigen::MatrixXd::Zero(n, n);
    s.drift_aux = Eigen::MatrixXd::Zero(n, n);
    return s;
}

ZakaiFilter::ZakaiFilter(FilterModel model, double dt, FilterConfig cfg)
    : model_(std::move(model)), dt_(dt), cfg_(cfg) {
    model_.check();
    cfg_.check();
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw Error("grid step must be positive");
    transition_ = transition_matrix(model_.A, dt_);
    transition_t_ = transition_.transpose();
    generator_t_ = model_.A.entries().transpose();
    likelihood_gain_ = model_.c.values() / (model_.noise_scale * model_.noise_scale);
    work_ = init_filter(InitialLaw::point_mass(model_.n_states(), 0), model_.n_states());
}

void ZakaiFilter::reset(const InitialLaw& p0, double t0) {
    work_ = init_filter(p0, model_.n_states());
    work_.t = t0;
}

void ZakaiFilter::load(const FilterState& state) {
    const auto n = static_cast<Eigen::Index>(model_.n_states());
    if (state.q.size() != n || state.jump_aux.rows() != n || state.jump_aux.cols() != n * n ||
        state.occ_aux.rows() != n || state.occ_aux.cols() != n || state.drift_aux.rows() != n ||
        state.drift_aux.cols() != n)
        throw DimensionError("filter state does not match the model");
    work_ = state;
}

void ZakaiFilter::update(double dy) {
    if (cfg_.scheme == Scheme::robust)
        robust_update(dy);
    else
        euler_update(dy);

    auto& w = work_;
    ++w.steps;
    w.t += dt_;

    const double top = w.q.maxCoeff();
    if (!std::isfinite(top) || !(top > 0.0)) throw NumericalBlowupError(w.steps);
    const double floor = cfg_.clamp_eps * top;
    for (Eigen::Index i = 0; i < w.q.size(); ++i) {
        if (w.q(i) < floor) {
            w.q(i) = floor;
            ++w.clamp_count;
        }
    }
    if (!w.q.allFinite() || !w.jump_aux.allFinite() || !w.occ_aux.allFinite() ||
        !w.drift_aux.allFinite())
        throw NumericalBlowupError(w.steps);

    if (w.steps % cfg_.renormalize_every == 0) normalize();
}

// Forward-algorithm ordering: the chain moves over [t, t+dt] (exact
// transition matrix), then the increment dy reweights each state by its
// Gaussian likelihood ratio exp(g_i dy - g_i c_i dt / 2), g = c / noise^2.
// The functionals accumulate against the state at the end of the step.
void ZakaiFilter::robust_update(double dy) {
    auto& w = work_;
    const auto n = w.q.size();

    scratch_q_.noalias() = transition_t_ * w.q;
    scratch_jump_.noalias() = transition_t_ * w.jump_aux;
    scratch_occ_.noalias() = transition_t_ * w.occ_aux;
    scratch_drift_.noalias() = transition_t_ * w.drift_aux;

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) scratch_jump_(j, i * n + j) += transition_(i, j) * w.q(i);
        }
        scratch_occ_(i, i) += scratch_q_(i) * dt_;
        scratch_drift_(i, i) += scratch_q_(i) * dy;
    }

    double shift = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double g = likelihood_gain_(i);
        shift = std::max(shift, g * dy - 0.5 * g * model_.c.values()(i) * dt_);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double g = likelihood_gain_(i);
        const double weight = std::exp(g * dy - 0.5 * g * model_.c.values()(i) * dt_ - shift);
        scratch_q_(i) *= weight;
        scratch_jump_.row(i) *= weight;
        scratch_occ_.row(i) *= weight;
        scratch_drift_.row(i) *= weight;
    }
    w.log_norm += shift;

    w.q.swap(scratch_q_);
    w.jump_aux.swap(scratch_jump_);
    w.occ_aux.swap(scratch_occ_);
    w.drift_aux.swap(scratch_drift_);
}

// Explicit Euler on
//   d s     = A^T s dt + C s dY
//   d J^ij  = A^T J^ij dt + C J^ij dY + a_ij <s, e_i> e_j dt
//   d O^i   = A^T O^i dt  + C O^i dY  + <s, e_i> e_i dt
//   d T^i   = A^T T^i dt  + C T^i dY  + c_i <s, e_i> e_i dt + <s, e_i> e_i dY
// with C = diag(c) / noise^2.
void ZakaiFilter::euler_update(double dy) {
    auto& w = work_;
    const auto n = w.q.size();
    const auto& A = model_.A.entries();

    scratch_q_.noalias() = generator_t_ * w.q;
    scratch_jump_.noalias() = generator_t_ * w.jump_aux;
    scratch_occ_.noalias() = generator_t_ * w.occ_aux;
    scratch_drift_.noalias() = generator_t_ * w.drift_aux;

    for (Eigen::Index i = 0; i < n; ++i) {
        const double gain = likelihood_gain_(i) * dy;
        scratch_q_(i) = w.q(i) + scratch_q_(i) * dt_ + gain * w.q(i);
        scratch_jump_.row(i) = w.jump_aux.row(i) + scratch_jump_.row(i) * dt_ + gain * w.jump_aux.row(i);
        scratch_occ_.row(i) = w.occ_aux.row(i) + scratch_occ_.row(i) * dt_ + gain * w.occ_aux.row(i);
        scratch_drift_.row(i) =
            w.drift_aux.row(i) + scratch_drift_.row(i) * dt_ + gain * w.drift_aux.row(i);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) scratch_jump_(j, i * n + j) += A(i, j) * w.q(i) * dt_;
        }
        scratch_occ_(i, i) += w.q(i) * dt_;
        scratch_drift_(i, i) += model_.c.values()(i) * w.q(i) * dt_ + w.q(i) * dy;
    }

    w.q.swap(scratch_q_);
    w.jump_aux.swap(scratch_jump_);
    w.occ_aux.swap(scratch_occ_);
    w.drift_aux.swap(scratch_drift_);
}

void ZakaiFilter::normalize() {
    auto& w = work_;
    const double mass = w.q.sum();
    if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericalBlowupError(w.steps);
    const double inv = 1.0 / mass;
    w.q *= inv;
    w.jump_aux *= inv;
    w.occ_aux *= inv;
    w.drift_aux *= inv;
    w.log_norm += std::log(mass);
}

void ZakaiFilter::posterior(Eigen::VectorXd& out) const {
    out = work_.q / work_.q.sum();
}

FilterState ZakaiFilter::state() const {
    ZakaiFilter copy = *this;
    copy.normalize();
    return copy.work_;
}

FilterState step(const FilterState& state, const GeneratorMatrix& A, const SlopeVector& c,
                 double noise_scale, double dy, double dt, const FilterConfig& cfg) {
    ZakaiFilter filter(FilterModel{A, c, noise_scale}, dt, cfg);
    filter.load(state);
    filter.update(dy);
    return filter.state();
}

FunctionalTotals reduce_functionals(const FilterState& state) {
    const auto n = static_cast<Eigen::Index>(state.n_states());
    const double mass = state.q.sum();
    FunctionalTotals out;
    out.jumps = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) out.jumps(i, j) = state.jump_aux.col(i * n + j).sum() / mass;
    out.occupation = state.occ_aux.colwise().sum().transpose() / mass;
    out.drift = state.drift_aux.colwise().sum().transpose() / mass;
    out.log_norm = state.log_norm + std::log(mass);
    return out;
}

std::vector<double> FilterTrajectory::state_probability(std::size_t state) const {
    const auto row = posterior.row(static_cast<Eigen::Index>(state));
    return {row.begin(), row.end()};
}

namespace {

template <typename Visit>
FilterState run_recursion(const ObservationSeries& series, const GeneratorMatrix& A,
                          const SlopeVector& c, double noise_scale, const InitialLaw& p0,
                          const FilterConfig& cfg, Visit&& visit) {
    ZakaiFilter filter(FilterModel{A, c, noise_scale}, series.dt(), cfg);
    filter.reset(p0, series.t0());
    Eigen::VectorXd q;
    filter.posterior(q);
    visit(std::size_t{0}, q);
    const auto y = series.values();
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
        filter.update(y[k + 1] - y[k]);
        filter.posterior(q);
        visit(k + 1, q);
    }
    return filter.state();
}

}  // namespace

FilterTrajectory run_filter(const ObservationSeries& series, const GeneratorMatrix& A,
                            const SlopeVector& c, double noise_scale, const InitialLaw& p0,
                            const FilterConfig& cfg) {
    FilterTrajectory traj;
    traj.times.resize(series.size());
    traj.posterior.resize(static_cast<Eigen::Index>(A.n_states()),
                          static_cast<Eigen::Index>(series.size()));
    traj.terminal = run_recursion(series, A, c, noise_scale, p0, cfg,
                                  [&](std::size_t k, const Eigen::VectorXd& q) {
                                      traj.times[k] = series.time(k);
                                      traj.posterior.col(static_cast<Eigen::Index>(k)) = q;
                                  });
    return traj;
}

FilterState run_filter_terminal(const ObservationSeries& series, const GeneratorMatrix& A,
                                const SlopeVector& c, double noise_scale, const InitialLaw& p0,
                                const FilterConfig& cfg) {
    return run_recursion(series, A, c, noise_scale, p0, cfg,
                         [](std::size_t, const Eigen::VectorXd&) {});
}

void write_trajectory_csv(std::ostream& os, const FilterTrajectory& traj) {
    const auto n = traj.posterior.rows();
    os << 't';
    for (Eigen::Index i = 0; i < n; ++i) os << ",p_state_" << i;
    os << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << csv::format_double(traj.times[k]);
        for (Eigen::Index i = 0; i < n; ++i)
            os << ',' << csv::format_double(traj.posterior(i, static_cast<Eigen::Index>(k)));
        os << '\n';
    }
}

}  // namespace ctmc_hums
