#include <gtest/gtest.h>

#include <sstream>

#include "ctmc_hums/errors.hpp"
#include "ctmc_hums/estimation.hpp"

using namespace ctmc_hums;

namespace {

const GeneratorMatrix kBaseline = GeneratorMatrix::two_state(0.1, 0.05);

ObservationSeries long_series(std::uint64_t seed) {
    const auto path = simulate_chain(kBaseline, 0, 1e4, seed);
    return simulate_observation(path, SlopeVector{-1.0, 1.0}, 0.01, 1.0, seed + 1);
}

}  // namespace

TEST(EstimateParameters, RecoversSlopes) {
    const auto series = long_series(100);
    EstimationConfig cfg;
    cfg.estimate_A = false;
    cfg.estimate_c = true;
    const auto res = estimate_parameters(series, kBaseline, SlopeVector{-0.5, 0.5}, 1.0,
                                         InitialLaw(Eigen::Vector2d(1, 0)), {}, cfg);
    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.iterates.size() - 1, 50u);
    EXPECT_NEAR(res.c_hat[0], -1.0, 0.1);
    EXPECT_NEAR(res.c_hat[1], 1.0, 0.1);
    EXPECT_EQ(res.A_hat.entries(), kBaseline.entries());
}

TEST(EstimateParameters, RecoversGeneratorWithinFactorTwo) {
    const auto series = long_series(200);
    EstimationConfig cfg;
    const auto res = estimate_parameters(series, GeneratorMatrix::two_state(0.2, 0.2), SlopeVector{-1.0, 1.0},
                                         1.0, InitialLaw(Eigen::Vector2d(1, 0)), {}, cfg);
    EXPECT_TRUE(res.converged);
    const double a12 = res.A_hat(0, 1), a21 = res.A_hat(1, 0);
    EXPECT_GT(a12, 0.05);
    EXPECT_LT(a12, 0.2);
    EXPECT_GT(a21, 0.025);
    EXPECT_LT(a21, 0.1);
    EXPECT_NO_THROW(validate_generator(res.A_hat.entries()));
}

TEST(EstimateParameters, IteratesStartAtInitialGuess) {
    const auto path = simulate_chain(kBaseline, 0, 300.0, 5);
    const auto series = simulate_observation(path, SlopeVector{-1.0, 1.0}, 0.01, 1.0, 6);
    EstimationConfig cfg;
    cfg.estimate_c = true;
    cfg.max_iters = 3;
    cfg.rel_tol = 1e-12;
    const auto A0 = GeneratorMatrix::two_state(0.2, 0.2);
    const auto res = estimate_parameters(series, A0, SlopeVector{-0.5, 0.5}, 1.0,
                                         InitialLaw(Eigen::Vector2d(1, 0)), {}, cfg);
    ASSERT_EQ(res.iterates.size(), 4u);
    EXPECT_EQ(res.iterates[0].A.entries(), A0.entries());
    EXPECT_EQ(res.iterates[0].max_rel_change, 0.0);
    EXPECT_FALSE(res.converged);
    std::ostringstream os;
    write_estimation_report(os, res, cfg);
    EXPECT_NE(os.str().find("converged: false after 3 iterations"), std::string::npos);
}

TEST(EstimateParameters, UnvisitedStateIsDegenerate) {
    ChainPath path{{}, {0}, 20.0};
    const auto series = simulate_observation(path, SlopeVector{-1.0, 1.0}, 0.01, 1.0, 1);
    Eigen::MatrixXd A0(2, 2);
    A0 << 0.0, 0.0, 0.2, -0.2;
    EstimationConfig cfg;
    try {
        estimate_parameters(series, GeneratorMatrix(A0), SlopeVector{-1.0, 1.0}, 1.0,
                            InitialLaw(Eigen::Vector2d(1, 0)), {}, cfg);
        FAIL() << "expected DegenerateOccupationError";
    } catch (const DegenerateOccupationError& e) {
        EXPECT_EQ(e.row(), 1u);
    }
    cfg.hold_degenerate = true;
    const auto res = estimate_parameters(series, GeneratorMatrix(A0), SlopeVector{-1.0, 1.0}, 1.0,
                                         InitialLaw(Eigen::Vector2d(1, 0)), {}, cfg);
    ASSERT_EQ(res.degenerate_states, std::vector<StateIndex>{1});
    EXPECT_DOUBLE_EQ(res.A_hat(1, 0), 0.2);
    EXPECT_DOUBLE_EQ(res.A_hat(0, 1), 0.0);
}

TEST(EstimateParameters, ConfigValidation) {
    const auto series = from_values(0.0, 1.0, {0, 1, 2});
    EstimationConfig cfg;
    cfg.estimate_A = false;
    const InitialLaw p0(Eigen::Vector2d(1, 0));
    EXPECT_THROW(estimate_parameters(series, kBaseline, SlopeVector{0, 1}, 1.0, p0, {}, cfg), ConfigError);
    cfg.estimate_A = true;
    cfg.max_iters = 0;
    EXPECT_THROW(estimate_parameters(series, kBaseline, SlopeVector{0, 1}, 1.0, p0, {}, cfg), ConfigError);
    EXPECT_THROW(estimate_parameters(series, kBaseline, SlopeVector{0, 1, 2}, 1.0, p0, {}, {}), DimensionError);
}

TEST(ExponentialRate, FiveEventsInFiveThousandStartups) {
    // 5 failures and 23 censored appliances, 5000 startups in total.
    SurvivalSample s;
    for (int k = 0; k < 28; ++k) {
        s.exposures.push_back(k < 5 ? 250.0 : 3750.0 / 23.0);
        s.event_flags.push_back(k < 5);
    }
    double total = 0.0;
    for (double e : s.exposures) total += e;
    EXPECT_EQ(estimate_exponential_rate(s), 5.0 / total);
    EXPECT_NEAR(estimate_exponential_rate(s), 1.0 / 1000.0, 1e-18);
    EXPECT_EQ(estimate_exponential_rate({{1000.0, 1000.0, 1000.0, 1000.0, 1000.0}, {true, true, true, true, true}}),
              1.0 / 1000.0);
}

TEST(ExponentialRate, CensoredUnitsAddExposureOnly) {
    EXPECT_EQ(estimate_exponential_rate({{100.0}, {false}}), 0.0);
    EXPECT_EQ(estimate_exponential_rate({{10.0, 30.0}, {true, true}}), 0.05);
    EXPECT_EQ(estimate_exponential_rate({{10.0, 30.0, 60.0}, {true, false, true}}), 2.0 / 100.0);
}

TEST(ExponentialRate, Errors) {
    EXPECT_THROW(estimate_exponential_rate({{}, {}}), ZeroExposureError);
    EXPECT_THROW(estimate_exponential_rate({{1.0, 2.0}, {true}}), DimensionError);
    EXPECT_THROW(estimate_exponential_rate({{-1.0}, {true}}), Error);
}

TEST(IndustrialDefaults, Values) {
    const auto d = industrial_defaults();
    EXPECT_DOUBLE_EQ(d.A(0, 1), 0.01);
    EXPECT_DOUBLE_EQ(d.A(1, 0), 0.001);
    EXPECT_DOUBLE_EQ(d.A(0, 0), -0.01);
    EXPECT_DOUBLE_EQ(d.A(1, 1), -0.001);
    EXPECT_EQ(d.c[0], 0.0);
    EXPECT_EQ(d.c[1], 1.0);
    EXPECT_NO_THROW(validate_generator(d.A.entries()));
}
