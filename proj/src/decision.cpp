#include "ctmc_hums/decision.hpp"

#include <cstdio>
#include <ostream>

#include "ctmc_hums/csv.hpp"
#include "ctmc_hums/errors.hpp"

namespace ctmc_hums {

void DecisionRule::check() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
    if (run_length == 0) throw ConfigError("run_length must be at least 1");
}

DetectionOutcome detect(std::span<const double> posterior, const DecisionRule& rule) {
    rule.check();
    std::size_t run = 0;
    for (std::size_t j = 0; j < posterior.size(); ++j) {
        run = posterior[j] >= rule.threshold ? run + 1 : 0;
        if (run >= rule.run_length) return {j};
    }
    return {};
}

bool FleetRecord::detected_in_time() const noexcept {
    if (!outcome.detected()) return false;
    return !failure_index || *outcome.detection_index < *failure_index;
}

ConfusionMatrix score_fleet(std::span<const FleetRecord> records) {
    ConfusionMatrix m;
    for (const auto& r : records) {
        if (r.failed) {
            if (r.detected_in_time())
                ++m.true_positive;
            else
                ++m.false_negative;
        } else if (r.outcome.detected()) {
            ++m.false_positive;
        } else {
            ++m.true_negative;
        }
    }
    return m;
}

std::vector<SweepRow> sweep_rules(std::span<const ScoredPosterior> fleet,
                                  std::span<const double> thresholds,
                                  std::span<const std::size_t> run_lengths) {
    std::vector<SweepRow> rows;
    std::vector<FleetRecord> records(fleet.size());
    for (double threshold : thresholds) {
        for (std::size_t run_length : run_lengths) {
            DecisionRule rule;
            rule.threshold = threshold;
            rule.run_length = run_length;
            for (std::size_t k = 0; k < fleet.size(); ++k)
                records[k] = {detect(fleet[k].posterior, rule), fleet[k].failed, fleet[k].failure_index};
            rows.push_back({threshold, run_length, score_fleet(records)});
        }
    }
    return rows;
}

void write_confusion_csv(std::ostream& os, const ConfusionMatrix& m) {
    os << "true_positive,false_positive,false_negative,true_negative\n"
       << m.true_positive << ',' << m.false_positive << ',' << m.false_negative << ','
       << m.true_negative << '\n';
}

void write_confusion_table(std::ostream& os, const ConfusionMatrix& m) {
    char buf[160];
    auto row = [&](const char* label, std::size_t a, std::size_t b) {
        std::snprintf(buf, sizeof buf, "| %-28s | %16zu | %19zu |\n", label, a, b);
        os << buf;
    };
    const char* rule = "+------------------------------+------------------+---------------------+\n";
    os << rule;
    std::snprintf(buf, sizeof buf, "| %-28s | %16s | %19s |\n", "Decision criterion", "Observed failure",
                  "No observed failure");
    os << buf << rule;
    row("Future failure detected", m.true_positive, m.false_positive);
    row("Future failure not detected", m.false_negative, m.true_negative);
    os << rule;
    row("Total", m.true_positive + m.false_negative, m.false_positive + m.true_negative);
    os << rule;
    os << "Correct decisions: " << m.correct() << " of " << m.total() << '\n';
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
    os << "threshold,run_length,true_positive,false_positive,false_negative,true_negative\n";
    for (const auto& r : rows)
        os << csv::format_double(r.threshold) << ',' << r.run_length << ',' << r.matrix.true_positive
           << ',' << r.matrix.false_positive << ',' << r.matrix.false_negative << ','
           << r.matrix.true_negative << '\n';
}

void write_sweep_table(std::ostream& os, std::span<const SweepRow> rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%12s %6s %4s %4s %4s %4s %8s\n", "threshold", "run", "TP", "FP", "FN",
                  "TN", "correct");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%12.6g %6zu %4zu %4zu %4zu %4zu %5zu/%zu\n", r.threshold,
                      r.run_length, r.matrix.true_positive, r.matrix.false_positive,
                      r.matrix.false_negative, r.matrix.true_negative, r.matrix.correct(),
                      r.matrix.total());
        os << buf;
    }
}

}  // namespace ctmc_hums
