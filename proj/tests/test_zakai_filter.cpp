#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ctmc_hums/errors.hpp"
#include "ctmc_hums/zakai_filter.hpp"
#include "oracles.hpp"

using namespace ctmc_hums;

namespace {

const GeneratorMatrix kBaseline = GeneratorMatrix::two_state(0.1, 0.05);
const SlopeVector kSlopes{-1.0, 1.0};

FilterConfig scheme(Scheme s) {
    FilterConfig cfg;
    cfg.scheme = s;
    return cfg;
}

ObservationSeries simulated(double horizon, double dt, std::uint64_t seed, double noise = 1.0,
                            ChainPath* path_out = nullptr) {
    auto path = simulate_chain(kBaseline, 0, horizon, seed);
    auto series = simulate_observation(path, kSlopes, dt, noise, seed + 1000);
    if (path_out) *path_out = path;
    return series;
}

double sup_distance_to_oracle(const FilterTrajectory& traj, const ObservationSeries& series, double a, double b,
                              const Eigen::Vector2d& c, double s, const Eigen::Vector2d& p0) {
    const std::vector<double> y(series.values().begin(), series.values().end());
    const auto ref = oracle::forward_algorithm(a, b, c, s, p0, y, series.dt());
    double sup = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k)
        sup = std::max(sup, (traj.posterior.col(static_cast<Eigen::Index>(k)) - Eigen::VectorXd(ref[k]))
                                .cwiseAbs()
                                .maxCoeff());
    return sup;
}

}  // namespace

TEST(InitFilter, CopiesInitialLaw) {
    for (auto p : {Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.99, 0.01)}) {
        const auto st = init_filter(InitialLaw(p), 2);
        EXPECT_EQ(st.q, Eigen::VectorXd(p));
        EXPECT_EQ(st.log_norm, 0.0);
        EXPECT_EQ(st.t, 0.0);
        EXPECT_EQ(st.jump_aux.cwiseAbs().sum(), 0.0);
        EXPECT_EQ(st.occ_aux.cwiseAbs().sum(), 0.0);
        EXPECT_EQ(st.drift_aux.cwiseAbs().sum(), 0.0);
        EXPECT_EQ(st.jump_aux.cols(), 4);
    }
    EXPECT_THROW(init_filter(InitialLaw(Eigen::Vector2d(1, 0)), 3), DimensionError);
}

TEST(FilterConfigTest, ClampRange) {
    FilterConfig cfg;
    cfg.clamp_eps = 0.0;
    EXPECT_THROW(cfg.check(), Error);
    cfg.clamp_eps = 2e-3;
    EXPECT_THROW(cfg.check(), Error);
    cfg.clamp_eps = 1e-3;
    EXPECT_NO_THROW(cfg.check());
    cfg.renormalize_every = 0;
    EXPECT_THROW(cfg.check(), Error);
    EXPECT_EQ(parse_scheme("euler"), Scheme::euler);
    EXPECT_EQ(parse_scheme("robust"), Scheme::robust);
    EXPECT_THROW(parse_scheme("rk4"), Error);
}

TEST(Step, UninformativeObservationLeavesPosterior) {
    const GeneratorMatrix zero(Eigen::MatrixXd::Zero(2, 2));
    const auto st0 = init_filter(InitialLaw(Eigen::Vector2d(0.3, 0.7)), 2);
    for (double dy : {-3.0, -0.2, 0.0, 0.4, 5.0}) {
        const auto st = step(st0, zero, SlopeVector{0.7, 0.7}, 1.3, dy, 0.01, scheme(Scheme::robust));
        EXPECT_NEAR(st.q(0), 0.3, 1e-15);
        EXPECT_NEAR(st.q(1), 0.7, 1e-15);
    }
    // Euler scales both components by 1 + c dy / s^2, which must stay positive.
    for (double dy : {-2.0, -0.2, 0.0, 0.4, 5.0}) {
        const auto st = step(st0, zero, SlopeVector{0.7, 0.7}, 1.3, dy, 0.01, scheme(Scheme::euler));
        EXPECT_NEAR(st.q(0), 0.3, 1e-15);
        EXPECT_NEAR(st.q(1), 0.7, 1e-15);
    }
    EXPECT_THROW(step(st0, zero, SlopeVector{0.7, 0.7}, 1.3, -3.0, 0.01, scheme(Scheme::euler)),
                 NumericalBlowupError);
}

TEST(Step, RobustOneStepClosedForm) {
    const GeneratorMatrix zero(Eigen::MatrixXd::Zero(2, 2));
    const auto st0 = init_filter(InitialLaw(Eigen::Vector2d(0.5, 0.5)), 2);
    const auto st = step(st0, zero, kSlopes, 1.0, 0.5, 0.01, scheme(Scheme::robust));
    const double w0 = 0.5 * std::exp(-0.5 - 0.005);
    const double w1 = 0.5 * std::exp(0.5 - 0.005);
    EXPECT_NEAR(st.q(1), w1 / (w0 + w1), 1e-15);
    EXPECT_NEAR(st.q(0), w0 / (w0 + w1), 1e-15);
    EXPECT_GT(st.q(1), 0.5);
    EXPECT_EQ(st.steps, 1u);
    EXPECT_NEAR(st.t, 0.01, 1e-15);
}

TEST(Step, EulerOneStepClosedForm) {
    const auto st0 = init_filter(InitialLaw(Eigen::Vector2d(0.5, 0.5)), 2);
    const double dt = 0.01, dy = 0.5, s = 2.0;
    const auto st = step(st0, kBaseline, kSlopes, s, dy, dt, scheme(Scheme::euler));
    // sigma + A^T sigma dt + diag(c) sigma dy / s^2
    const double u0 = 0.5 + (-0.1 * 0.5 + 0.05 * 0.5) * dt + (-1.0) * 0.5 * dy / (s * s);
    const double u1 = 0.5 + (0.1 * 0.5 - 0.05 * 0.5) * dt + (1.0) * 0.5 * dy / (s * s);
    EXPECT_NEAR(st.q(1), u1 / (u0 + u1), 1e-15);
    EXPECT_NEAR(st.log_norm, std::log(u0 + u1), 1e-15);
}

TEST(Step, NoiseScaleEntersSquared) {
    const GeneratorMatrix zero(Eigen::MatrixXd::Zero(2, 2));
    const auto st0 = init_filter(InitialLaw(Eigen::Vector2d(0.5, 0.5)), 2);
    const auto a = step(st0, zero, SlopeVector{-2.0, 2.0}, 2.0, 0.5, 0.01, scheme(Scheme::robust));
    const auto b = step(st0, zero, SlopeVector{-0.5, 0.5}, 1.0, 0.5, 0.01, scheme(Scheme::robust));
    // c / s^2 matches, the c^2 dt / (2 s^2) term is the same for both states.
    EXPECT_NEAR(a.q(1), b.q(1), 1e-15);
}

TEST(Step, BlowupIsReported) {
    const auto st0 = init_filter(InitialLaw(Eigen::Vector2d(0.5, 0.5)), 2);
    try {
        step(st0, kBaseline, kSlopes, 1.0, std::numeric_limits<double>::infinity(), 0.01, scheme(Scheme::euler));
        FAIL();
    } catch (const NumericalBlowupError& e) {
        EXPECT_EQ(e.step(), 1u);
    }
}

TEST(Step, EulerNegativeMassIsClamped) {
    const auto st0 = init_filter(InitialLaw(Eigen::Vector2d(0.5, 0.5)), 2);
    const auto st = step(st0, kBaseline, kSlopes, 1.0, 3.0, 0.01, scheme(Scheme::euler));
    EXPECT_GE(st.q.minCoeff(), 0.0);
    EXPECT_NEAR(st.q.sum(), 1.0, 1e-12);
    EXPECT_EQ(st.clamp_count, 1u);
}

TEST(Step, DimensionMismatch) {
    const auto st0 = init_filter(InitialLaw(Eigen::Vector2d(0.5, 0.5)), 2);
    EXPECT_THROW(step(st0, kBaseline, SlopeVector{1.0, 2.0, 3.0}, 1.0, 0.1, 0.01, {}), DimensionError);
    EXPECT_THROW(step(st0, kBaseline, kSlopes, 0.0, 0.1, 0.01, {}), Error);
}

TEST(RunFilter, ZeroIncrementsFavorZeroSlope) {
    const GeneratorMatrix zero(Eigen::MatrixXd::Zero(2, 2));
    const auto series = from_values(0.0, 0.1, std::vector<double>(200, 3.0));
    const auto traj = run_filter(series, zero, SlopeVector{0.0, 1.5}, 1.0,
                                 InitialLaw(Eigen::Vector2d(0.5, 0.5)), scheme(Scheme::robust));
    // Likelihood ratio after k steps: exp(-c^2 k dt / 2).
    const double k = 199, r = std::exp(-1.5 * 1.5 * k * 0.1 / 2.0);
    EXPECT_NEAR(traj.posterior(1, 199), r / (1.0 + r), 1e-12);
    for (Eigen::Index j = 1; j < traj.posterior.cols(); ++j)
        EXPECT_LT(traj.posterior(1, j), traj.posterior(1, j - 1));
}

TEST(RunFilter, UninformativeSlopesGiveConstantPosterior) {
    const GeneratorMatrix zero(Eigen::MatrixXd::Zero(2, 2));
    const auto series = simulated(20.0, 0.01, 3);
    for (auto s : {Scheme::euler, Scheme::robust}) {
        const auto traj = run_filter(series, zero, SlopeVector{0.4, 0.4}, 1.0,
                                     InitialLaw(Eigen::Vector2d(0.2, 0.8)), scheme(s));
        EXPECT_LT((traj.posterior.row(1).array() - 0.8).abs().maxCoeff(), 1e-12);
    }
}

TEST(RunFilter, UninformativeSlopesFollowForwardLaw) {
    const auto series = simulated(50.0, 0.01, 4);
    const InitialLaw p0(Eigen::Vector2d(0.9, 0.1));
    const auto traj = run_filter(series, kBaseline, SlopeVector{1.0, 1.0}, 1.0, p0, scheme(Scheme::robust));
    double sup = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto p = forward_law(kBaseline, p0, traj.times[k]);
        sup = std::max(sup, (traj.posterior.col(static_cast<Eigen::Index>(k)) - p.probs()).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(sup, 1e-9);
}

TEST(RunFilter, EulerUninformativeDependsOnIncrements) {
    // With equal slopes the Euler posterior obeys p += A^T p dt / (1 + g dy),
    // so it does not reproduce the prior law exactly.
    const auto series = simulated(10.0, 0.01, 4);
    const InitialLaw p0(Eigen::Vector2d(0.9, 0.1));
    const double g = 1.0;
    const auto traj = run_filter(series, kBaseline, SlopeVector{g, g}, 1.0, p0, scheme(Scheme::euler));
    Eigen::VectorXd p = p0.probs();
    const Eigen::MatrixXd At = kBaseline.entries().transpose();
    for (Eigen::Index k = 0; k < traj.posterior.cols(); ++k) {
        ASSERT_LT((traj.posterior.col(k) - p).cwiseAbs().maxCoeff(), 1e-12) << k;
        if (k + 1 < traj.posterior.cols())
            p += At * p * 0.01 / (1.0 + g * series.increment(static_cast<std::size_t>(k)));
    }
    const auto prior = forward_law(kBaseline, p0, traj.times.back());
    EXPECT_GT((traj.posterior.col(traj.posterior.cols() - 1) - prior.probs()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RunFilter, RobustIsTheDiscreteForwardAlgorithm) {
    const Eigen::Vector2d p0(0.7, 0.3);
    for (double dt : {0.5, 0.05}) {
        const auto series = simulated(100.0, dt, 12, 0.8);
        const auto traj = run_filter(series, kBaseline, kSlopes, 0.8, InitialLaw(p0), scheme(Scheme::robust));
        EXPECT_LT(sup_distance_to_oracle(traj, series, 0.1, 0.05, {-1.0, 1.0}, 0.8, p0), 1e-11) << dt;
    }
}

TEST(RunFilter, BothSchemesMatchOracleAtFineGrid) {
    const Eigen::Vector2d p0(1.0, 0.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto series = simulated(50.0, 1e-3, seed);
        for (auto s : {Scheme::euler, Scheme::robust}) {
            const auto traj = run_filter(series, kBaseline, kSlopes, 1.0, InitialLaw(p0), scheme(s));
            EXPECT_LE(sup_distance_to_oracle(traj, series, 0.1, 0.05, {-1.0, 1.0}, 1.0, p0), 1e-2)
                << to_string(s) << " seed " << seed;
        }
    }
}

TEST(RunFilter, SchemesAgree) {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        const auto series = simulated(100.0, 1e-3, seed);
        const InitialLaw p0(Eigen::Vector2d(1.0, 0.0));
        const auto e = run_filter(series, kBaseline, kSlopes, 1.0, p0, scheme(Scheme::euler));
        const auto r = run_filter(series, kBaseline, kSlopes, 1.0, p0, scheme(Scheme::robust));
        EXPECT_LE((e.posterior - r.posterior).cwiseAbs().maxCoeff(), 5e-2) << "seed " << seed;
    }
}

TEST(RunFilter, PosteriorsStayNormalized) {
    const auto series = simulated(200.0, 0.01, 31);
    for (auto s : {Scheme::euler, Scheme::robust}) {
        const auto traj = run_filter(series, kBaseline, kSlopes, 1.0, InitialLaw(Eigen::Vector2d(1, 0)), scheme(s));
        ASSERT_EQ(traj.times.size(), series.size());
        for (Eigen::Index k = 0; k < traj.posterior.cols(); ++k) {
            ASSERT_NEAR(traj.posterior.col(k).sum(), 1.0, 1e-9);
            ASSERT_GE(traj.posterior.col(k).minCoeff(), 0.0);
            ASSERT_LE(traj.posterior.col(k).maxCoeff(), 1.0);
        }
    }
}

TEST(RunFilter, RenormalizationPeriodDoesNotChangePosterior) {
    const auto series = simulated(50.0, 0.01, 8);
    FilterConfig every, sparse;
    sparse.renormalize_every = 25;
    const InitialLaw p0(Eigen::Vector2d(1, 0));
    const auto a = run_filter(series, kBaseline, kSlopes, 1.0, p0, every);
    const auto b = run_filter(series, kBaseline, kSlopes, 1.0, p0, sparse);
    EXPECT_LT((a.posterior - b.posterior).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(a.terminal.log_norm, b.terminal.log_norm, 1e-8 * std::abs(a.terminal.log_norm) + 1e-8);
}

TEST(RunFilter, LongLogbookDoesNotOverflow) {
    const auto series = simulated(1e5, 1.0, 9, 0.3);
    const auto st = run_filter_terminal(series, kBaseline, kSlopes, 0.3, InitialLaw(Eigen::Vector2d(1, 0)), {});
    EXPECT_TRUE(std::isfinite(st.log_norm));
    EXPECT_NEAR(st.q.sum(), 1.0, 1e-12);
}

TEST(RunFilter, TerminalMatchesTrajectory) {
    const auto series = simulated(30.0, 0.01, 10);
    const InitialLaw p0(Eigen::Vector2d(0.5, 0.5));
    const auto traj = run_filter(series, kBaseline, kSlopes, 1.0, p0);
    const auto st = run_filter_terminal(series, kBaseline, kSlopes, 1.0, p0);
    EXPECT_EQ(st.q, traj.terminal.q);
    EXPECT_EQ(st.occ_aux, traj.terminal.occ_aux);
}

TEST(Functionals, FreshStateIsZero) {
    const auto tot = reduce_functionals(init_filter(InitialLaw(Eigen::Vector2d(0.5, 0.5)), 2));
    EXPECT_EQ(tot.jumps.cwiseAbs().sum(), 0.0);
    EXPECT_EQ(tot.occupation.cwiseAbs().sum(), 0.0);
    EXPECT_EQ(tot.drift.cwiseAbs().sum(), 0.0);
}

TEST(Functionals, OccupationSumsToElapsedTime) {
    const auto series = simulated(500.0, 0.01, 13);
    for (auto s : {Scheme::euler, Scheme::robust}) {
        const auto st = run_filter_terminal(series, kBaseline, kSlopes, 1.0, InitialLaw(Eigen::Vector2d(1, 0)),
                                            scheme(s));
        const auto tot = reduce_functionals(st);
        EXPECT_NEAR(tot.occupation.sum(), 500.0, 5.0) << to_string(s);
    }
}

TEST(Functionals, SingleVisibleJumpIsCounted) {
    const double dt = 1e-4, noise = 0.1;
    ChainPath path{{4.0}, {0, 1}, 10.0};
    const auto series = simulate_observation(path, kSlopes, dt, noise, 3);
    // Realized T^i = int 1{X = e_i} dY on the grid.
    const auto grid = sample_path_on_grid(path, series.size(), dt);
    double realized[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < series.n_increments(); ++k) realized[grid[k]] += series.increment(k);
    for (auto s : {Scheme::euler, Scheme::robust}) {
        const auto tot = reduce_functionals(run_filter_terminal(
            series, kBaseline, kSlopes, noise, InitialLaw(Eigen::Vector2d(1, 0)), scheme(s)));
        EXPECT_NEAR(tot.jumps(0, 1), 1.0, 0.1) << to_string(s);
        EXPECT_NEAR(tot.jumps(1, 0), 0.0, 0.1) << to_string(s);
        EXPECT_NEAR(tot.occupation(0), 4.0, 0.05);
        EXPECT_NEAR(tot.occupation(1), 6.0, 0.05);
        // The jump time itself is only known to a few hundredths.
        EXPECT_NEAR(tot.drift(0), realized[0], 0.2) << to_string(s);
        EXPECT_NEAR(tot.drift(1), realized[1], 0.2) << to_string(s);
    }
}

TEST(RunFilter, GridRefinementIsFirstOrder) {
    // Same observation path on grids dt, dt/2 and the dt/8 reference.
    const double fine = 1.0 / 1024.0;
    const std::size_t stride = 16;  // dt = 1/64
    const InitialLaw p0(Eigen::Vector2d(0.5, 0.5));
    for (auto s : {Scheme::euler, Scheme::robust}) {
        double err_coarse = 0.0, err_half = 0.0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const auto series = simulated(20.0, fine, 500 + seed);
            auto terminal = [&](std::size_t k) {
                return run_filter_terminal(series.subsample(k), kBaseline, kSlopes, 1.0, p0, scheme(s)).q(1);
            };
            const double ref = terminal(stride / 8);
            err_coarse += std::abs(terminal(stride) - ref);
            err_half += std::abs(terminal(stride / 2) - ref);
        }
        const double ratio = err_coarse / err_half;
        EXPECT_GE(ratio, 1.5) << to_string(s);
        EXPECT_LE(ratio, 3.0) << to_string(s);
    }
}

TEST(TrajectoryCsv, Format) {
    const auto series = from_values(0.0, 0.5, {0.0, 0.1, 0.3});
    const auto traj = run_filter(series, kBaseline, kSlopes, 1.0, InitialLaw(Eigen::Vector2d(0.25, 0.75)));
    std::stringstream ss;
    write_trajectory_csv(ss, traj);
    std::string header, first;
    std::getline(ss, header);
    std::getline(ss, first);
    EXPECT_EQ(header, "t,p_state_0,p_state_1");
    EXPECT_EQ(first, "0,0.25,0.75");
}
