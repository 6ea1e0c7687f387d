#pragma once

#include "smart/falsify.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smart {

struct BaselineConfig {
    int max_order = 2;
    int numeric_bins = 10;
    int beam_width = 20;
    int top_k = 20;
    double alpha = 0.05;
    Correction correction = Correction::None;
    int bootstrap_b = 1000;
    std::size_t min_slice_size = 10;
    std::uint64_t seed = 0;
    std::size_t candidate_cap = 1000000;

    void validate() const;
};

struct BaselineResult {
    std::vector<SliceTestResult> results; // ranked by |delta_acc| descending
    std::size_t total_candidates = 0;     // enumeration size (analytic count)
    std::size_t total_tested = 0;         // slices that met the size preconditions
};

// Order-1 atoms: one equality per categorical value, both boolean values,
// both directions of every numeric quantile-bin edge.
std::vector<PredicatePtr> enumerate_conditions(const Dataset& dataset,
                                               const std::string& target_column,
                                               int numeric_bins);

BaselineResult exhaustive_search(const Dataset& dataset, const std::vector<std::uint8_t>& labels,
                                 const Predictions& predictions, const BaselineConfig& config);

BaselineResult beam_search(const Dataset& dataset, const std::vector<std::uint8_t>& labels,
                           const Predictions& predictions, const BaselineConfig& config);

} // namespace smart
