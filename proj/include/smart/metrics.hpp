#pragma once

#include "smart/model.hpp"
#include "smart/predicate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smart {

// Report metrics for one slice. Ratio metrics are empty when their
// denominator degenerates (rendered as NA).
struct SliceMetrics {
    std::size_t group_size = 0;
    double support = 0.0;
    int num_criteria = 1;
    double outcome_diff = 0.0;  // |dataset rate - slice rate|
    double accuracy_diff = 0.0; // |dataset accuracy - slice accuracy|
    std::optional<double> odds_ratio_outcome; // p1(1-p1) / (p0(1-p0)), p0 = rest of dataset
    std::optional<double> odds_ratio_acc;
    std::optional<double> lift_outcome; // p1 / p, p = entire dataset
    std::optional<double> lift_acc;
    double weighted_relative_y = 0.0;   // support * (slice rate - dataset rate)
    double weighted_relative_acc = 0.0; // support * (slice accuracy - dataset accuracy)

    // underlying rates, kept for consistency checks and machine output
    double outcome_slice = 0.0;
    double outcome_dataset = 0.0;
    double outcome_rest = 0.0;
    double acc_slice = 0.0;
    double acc_dataset = 0.0;
    double acc_rest = 0.0;

    // conventional odds ratio [p1/(1-p1)]/[p0/(1-p0)], emitted only on request
    std::optional<double> conventional_or_outcome;
    std::optional<double> conventional_or_acc;
};

SliceMetrics slice_metrics(const Slice& slice, const Dataset& dataset,
                           const std::vector<std::uint8_t>& labels,
                           const Predictions& predictions);

std::vector<std::string> consistency_check(const SliceMetrics& metrics,
                                           std::size_t dataset_size);

} // namespace smart
