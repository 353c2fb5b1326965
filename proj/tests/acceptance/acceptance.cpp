// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ctmc_hums/commands.hpp"
#include "ctmc_hums/estimation.hpp"
#include "ctmc_hums/preprocessing.hpp"
#include "decision_properties.hpp"
#include "oracles.hpp"

using namespace ctmc_hums;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const GeneratorMatrix kA = GeneratorMatrix::two_state(0.1, 0.05);
const SlopeVector kC{-1.0, 1.0};

// Worst normalization defect seen in criteria 1 and 2.
struct NormalizationAudit {
    double worst_sum = 0.0;
    double min_component = 1.0;
    double max_component = 0.0;
    double worst_occupation = 0.0;

    void posterior(const Eigen::MatrixXd& p) {
        for (Eigen::Index k = 0; k < p.cols(); ++k)
            worst_sum = std::max(worst_sum, std::abs(p.col(k).sum() - 1.0));
        min_component = std::min(min_component, p.minCoeff());
        max_component = std::max(max_component, p.maxCoeff());
    }
    void occupation(const FilterState& st, double elapsed) {
        const double total = reduce_functionals(st).occupation.sum();
        worst_occupation = std::max(worst_occupation, std::abs(total - elapsed) / elapsed);
    }
} audit;

void criterion1() {
    const auto t0 = Clock::now();
    RunConfig cfg;
    cfg.horizon = 200.0;
    cfg.dt = 0.01;
    double mae = 0.0, mae_band = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const auto run = simulate_run(cfg, 1000 + s);
        mae += tracking_error(run.trajectory, run.path, 1);
        mae_band += tracking_error(run.trajectory, run.path, 1, 2.0);
        audit.posterior(run.trajectory.posterior);
        audit.occupation(run.trajectory.terminal, run.series.time(run.series.size() - 1));
    }
    mae /= seeds;
    mae_band /= seeds;
    const double secs = seconds_since(t0);
    report(1, mae <= 0.20 && mae_band <= 0.10 && secs < 5.0,
           fmt("tracking MAE %.4f (<= 0.20), excluding 2-unit post-jump band %.4f (<= 0.10), 20 seeds, %.2f s (< 5 s)",
               mae, mae_band, secs));
}

void criterion2() {
    const double dt = 1e-3;
    const Eigen::Vector2d p0(1.0, 0.0);
    double worst_euler = 0.0, worst_robust = 0.0;
    for (int s = 0; s < 10; ++s) {
        const auto path = simulate_chain(kA, 0, 50.0, 2000 + s);
        const auto series = simulate_observation(path, kC, dt, 1.0, 3000 + s);
        const std::vector<double> y(series.values().begin(), series.values().end());
        const auto ref = oracle::forward_algorithm(0.1, 0.05, {-1.0, 1.0}, 1.0, p0, y, dt);
        for (auto scheme : {Scheme::euler, Scheme::robust}) {
            FilterConfig fc;
            fc.scheme = scheme;
            const auto traj = run_filter(series, kA, kC, 1.0, InitialLaw(p0), fc);
            audit.posterior(traj.posterior);
            audit.occupation(traj.terminal, 50.0);
            double sup = 0.0;
            for (std::size_t k = 0; k < ref.size(); ++k)
                sup = std::max(sup, (traj.posterior.col(static_cast<Eigen::Index>(k)) - Eigen::VectorXd(ref[k]))
                                        .cwiseAbs()
                                        .maxCoeff());
            (scheme == Scheme::euler ? worst_euler : worst_robust) = std::max(
                scheme == Scheme::euler ? worst_euler : worst_robust, sup);
        }
    }
    report(2, worst_euler <= 1e-2 && worst_robust <= 1e-2,
           fmt("sup distance to forward algorithm over 10 seeds: euler %.3e, robust %.3e (<= 1e-2)", worst_euler,
               worst_robust));
}

void criterion3() {
    const bool ok = audit.worst_sum <= 1e-9 && audit.min_component >= 0.0 && audit.max_component <= 1.0 &&
                    audit.worst_occupation <= 0.01;
    report(3, ok,
           fmt("max |sum - 1| %.2e (<= 1e-9), components in [%.3g, %.3g], occupation identity max rel. error "
               "%.2e (<= 1e-2)",
               audit.worst_sum, audit.min_component, audit.max_component, audit.worst_occupation));
}

void criterion4() {
    const auto t0 = Clock::now();
    RunConfig cfg = RunConfig::from(Config{});
    cfg.sensitivity_trajectories = 50;
    cfg.seed = 4242;
    const auto rep = run_sensitivity(cfg);
    bool ok = true;
    std::ostringstream detail;
    detail << "baseline fired " << rep.baseline_fired << "/50;";
    for (const auto& v : rep.variants) {
        const double rate = v.agreement_rate(rep.trajectories);
        const double med = v.median_index_difference();
        ok = ok && rate >= 0.9 && med <= 10.0;
        detail << ' ' << v.label << fmt(" agree %.2f", rate) << " (both fired " << v.index_differences.size()
               << fmt(", median diff %.1f)", med);
    }
    detail << fmt("; %.1f s", seconds_since(t0));

    // Lower threshold, same data, to show the comparison on trajectories that do fire.
    cfg.rule.threshold = 0.95;
    const auto low = run_sensitivity(cfg);
    detail << " | at threshold 0.95: baseline fired " << low.baseline_fired << "/50;";
    for (const auto& v : low.variants)
        detail << ' ' << v.label << fmt(" %.2f/%.1f", v.agreement_rate(low.trajectories), v.median_index_difference());
    report(4, ok, detail.str());
}

void criterion5() {
    const auto t0 = Clock::now();
    const auto path = simulate_chain(kA, 0, 1e4, 5005);
    const auto series = simulate_observation(path, kC, 0.01, 1.0, 5006);
    const InitialLaw p0(Eigen::Vector2d(1.0, 0.0));

    EstimationConfig ec;
    ec.estimate_A = false;
    ec.estimate_c = true;
    const auto rc = estimate_parameters(series, kA, SlopeVector{-0.5, 0.5}, 1.0, p0, {}, ec);

    EstimationConfig ea;
    const auto ra = estimate_parameters(series, GeneratorMatrix::two_state(0.2, 0.2), kC, 1.0, p0, {}, ea);
    const double secs = seconds_since(t0);

    const bool c_ok = std::abs(rc.c_hat[0] + 1.0) <= 0.1 && std::abs(rc.c_hat[1] - 1.0) <= 0.1;
    auto within2 = [](double est, double truth) { return est >= truth / 2.0 && est <= truth * 2.0; };
    const bool a_ok = within2(ra.A_hat(0, 1), 0.1) && within2(ra.A_hat(1, 0), 0.05);
    const bool conv = rc.converged && ra.converged && rc.iterates.size() - 1 <= 50 && ra.iterates.size() - 1 <= 50;
    report(5, c_ok && a_ok && conv && secs < 60.0,
           fmt("c_hat (%.4f, %.4f) in %zu it; a12 %.4f a21 %.4f in %zu it; converged %s; %.1f s (< 60 s)",
               rc.c_hat[0], rc.c_hat[1], rc.iterates.size() - 1, ra.A_hat(0, 1), ra.A_hat(1, 0),
               ra.iterates.size() - 1, conv ? "yes" : "no", secs));
}

void criterion6() {
    SurvivalSample fixture;
    fixture.exposures = {1200, 800, 1000, 1500, 500};
    fixture.event_flags = {true, true, true, true, true};
    const double a = estimate_exponential_rate(fixture);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(1.0, 500.0);
    bool exact = true;
    for (int k = 0; k < 200; ++k) {
        SurvivalSample s;
        double total = 0.0;
        std::size_t events = 0;
        for (int j = 0; j < 28; ++j) {
            s.exposures.push_back(u(rng));
            s.event_flags.push_back(rng() % 5 == 0);
            total += s.exposures.back();
            events += s.event_flags.back();
        }
        exact = exact && estimate_exponential_rate(s) == static_cast<double>(events) / total;
    }
    report(6, a == 1.0 / 1000.0 && exact,
           fmt("5 events / 5000 startups -> %.17g; events/exposure exact on 200 random samples: %s", a,
               exact ? "yes" : "no"));
}

void criterion7() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(300.0, 30.0);
    std::vector<double> v(50000);
    for (auto& x : v) x = n(rng);
    const auto s = smooth(v, 20);
    const auto ref = oracle::naive_moving_average(v, 20);
    double worst = s.values.size() == ref.size() ? 0.0 : 1.0;
    for (std::size_t k = 0; k < std::min(ref.size(), s.values.size()); ++k)
        worst = std::max(worst, std::abs(s.values[k] - ref[k]));

    std::uniform_real_distribution<double> temp(-10.0, 35.0);
    std::vector<TemperatureReading> pts;
    for (int k = 0; k < 2000; ++k) {
        const double t = temp(rng);
        pts.push_back({t, 280.0 + 2.0 * t + n(rng) - 300.0});
    }
    const auto fit = fit_temperature_regression(pts);
    std::vector<TemperatureReading> corrected;
    for (const auto& p : pts) corrected.push_back({p.initial_temp_c, correct_tmf(p, fit)});
    const double beta = fit_temperature_regression(corrected).slope;

    ApplianceLogbook book;
    book.appliance_id = "u";
    for (int k = 1; k <= 60; ++k) book.records.push_back({k, 1.0 * k, temp(rng), 300.0 + n(rng) / 10.0});
    const auto pre = preprocess_logbook(book, {});
    const bool starts = pre.smoothed.start_index == 20 && pre.smoothed.startup_indices.front() == 20 &&
                        to_observation(pre.smoothed).t0() == 20.0;

    report(7, worst <= 1e-12 && std::abs(beta) < 1e-9 && starts,
           fmt("moving average vs naive max diff %.2e (<= 1e-12); post-correction slope %.2e (< 1e-9); window-20 "
               "series starts at startup %lld",
               worst, beta, pre.smoothed.startup_indices.front()));
}

void criterion8() {
    const auto t0 = Clock::now();
    std::size_t worst_fp = 0, worst_tp = 5, sum_tp = 0;
    std::string table;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        RunConfig cfg;
        cfg.fleet.seed = seed;
        const auto fleet = generate_synthetic_fleet(cfg.fleet);
        const auto rep = run_pipeline(cfg, fleet);
        const auto& m = rep.confusion;
        ok = ok && rep.errors.empty() && m.false_positive == 0 && m.true_positive >= 4 && m.total() == 28;
        worst_fp = std::max(worst_fp, m.false_positive);
        worst_tp = std::min(worst_tp, m.true_positive);
        sum_tp += m.true_positive;
        if (seed == 1) {
            std::ostringstream os;
            write_confusion_table(os, m);
            table = os.str();
        }
    }
    const double secs = seconds_since(t0);
    report(8, ok && secs < 30.0,
           fmt("10 synthetic fleets: max FP %zu (= 0), min TP %zu/5 (>= 4), mean TP %.1f; %.1f s (< 30 s)", worst_fp,
               worst_tp, sum_tp / 10.0, secs));
    std::printf("  confusion table, fleet seed 1:\n");
    std::istringstream lines(table);
    for (std::string line; std::getline(lines, line);) std::printf("    %s\n", line.c_str());
}

void criterion9() {
    const auto violation = props::check_monotonicity(1000, 9);
    report(9, violation.empty(),
           violation.empty() ? "threshold and run-length monotonicity hold on 1000 random cases"
                             : "violation: " + violation);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
