#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ctmc_hums/markov_chain.hpp"

namespace ctmc_hums {

/// Alert when the target-state probability stays >= threshold for
/// run_length consecutive uses. "Equal to one" is read as >= 1 - 1e-3.
struct DecisionRule {
    double threshold = 1.0 - 1e-3;
    std::size_t run_length = 3;
    StateIndex target_state = 1;

    void check() const;
};

struct DetectionOutcome {
    std::optional<std::size_t> detection_index;

    bool detected() const noexcept { return detection_index.has_value(); }
};

/// First index j whose run_length values ending at j all reach the threshold.
/// A value below the threshold (or NaN) resets the run.
DetectionOutcome detect(std::span<const double> posterior, const DecisionRule& rule);

struct ConfusionMatrix {
    std::size_t true_positive = 0;   ///< failed, detected before failure
    std::size_t false_positive = 0;  ///< not failed, detected
    std::size_t false_negative = 0;  ///< failed, undetected or detected too late
    std::size_t true_negative = 0;   ///< not failed, undetected

    std::size_t total() const noexcept {
        return true_positive + false_positive + false_negative + true_negative;
    }
    std::size_t correct() const noexcept { return true_positive + true_negative; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Outcome and ground truth of one appliance. failure_index is expressed in
/// the same index space as the posterior sequence.
struct FleetRecord {
    DetectionOutcome outcome;
    bool failed = false;
    std::optional<std::size_t> failure_index;

    /// A detection counts only when strictly before the failure index (or
    /// when the failure index is unknown).
    bool detected_in_time() const noexcept;
};

ConfusionMatrix score_fleet(std::span<const FleetRecord> records);

/// Posterior path plus ground truth, for rule sweeps.
struct ScoredPosterior {
    std::vector<double> posterior;  ///< target-state probability per use
    bool failed = false;
    std::optional<std::size_t> failure_index;
};

struct SweepRow {
    double threshold = 0.0;
    std::size_t run_length = 0;
    ConfusionMatrix matrix;
};

/// Every (threshold, run_length) combination, thresholds outermost.
std::vector<SweepRow> sweep_rules(std::span<const ScoredPosterior> fleet,
                                  std::span<const double> thresholds,
                                  std::span<const std::size_t> run_lengths);

/// `true_positive,false_positive,false_negative,true_negative` with header.
void write_confusion_csv(std::ostream& os, const ConfusionMatrix& m);
/// Aligned table: rows detected / not detected / total, columns observed
/// failure / no observed failure.
void write_confusion_table(std::ostream& os, const ConfusionMatrix& m);

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);
void write_sweep_table(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace ctmc_hums
