#pragma once

#include "smart/model.hpp"
#include "smart/predicate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smart {

enum class Correction { None, Bonferroni };

std::string to_string(Correction c);

struct TestConfig {
    double alpha = 0.05;
    Correction correction = Correction::Bonferroni;
    int bootstrap_b = 1000;
    int top_n = 10;
    std::size_t min_slice_size = 10;
    std::uint64_t seed = 0;
    // Compare the slice against the whole dataset (overlapping estimator)
    // instead of its complement.
    bool vs_overall = false;

    void validate() const;
};

enum class Evidence { Supported, NotSupported, Untested };

std::string to_string(Evidence e);

struct SliceTestResult {
    int hypothesis_id = -1;
    PredicatePtr predicate;
    std::size_t group_size = 0;
    double acc_slice = 0.0;
    double acc_rest = 0.0;    // complement accuracy
    double acc_overall = 0.0; // whole-dataset accuracy
    double delta_acc = 0.0;   // |acc_slice - acc_overall|
    double observed_stat = 0.0;
    double p_value = 1.0;
    double adjusted_alpha = 0.0;
    bool significant = false;
    Evidence evidence = Evidence::Untested;
};

// Count of null-resampled |delta*| >= |observed|. Exposed in serial and
// OpenMP forms; both walk identical per-resample RNG streams and return the
// same count for the same inputs.
struct BootstrapSpec {
    std::size_t n_slice = 0;
    std::size_t n_other = 0; // complement size (or it stays the complement in vs_overall mode)
    double pooled_rate = 0.0;
    double observed_abs = 0.0;
    bool vs_overall = false;
    int resamples = 0;
    std::uint64_t stream_seed = 0;
};

std::int64_t bootstrap_null_exceedances(const BootstrapSpec& spec);
std::int64_t bootstrap_null_exceedances_serial(const BootstrapSpec& spec);

SliceTestResult test_slice(const Slice& slice, const std::vector<std::uint8_t>& labels,
                           const Predictions& predictions, const TestConfig& config,
                           int hypothesis_id = 0);

struct OperationalizedHypothesis; // hypothesis.hpp

std::vector<SliceTestResult> run_falsification(
    const std::vector<OperationalizedHypothesis>& hypotheses, const Dataset& dataset,
    const std::vector<std::uint8_t>& labels, const Predictions& predictions,
    const TestConfig& config);

// Sorts by (p ascending, |delta_acc| descending, rendered predicate) and
// truncates to top_n.
void rank_and_truncate(std::vector<SliceTestResult>& results, int top_n);

// 1 - (1 - alpha)^m
double fwer_naive(int m, double alpha);

// The no-self-falsification ablation: provider order, nothing tested.
std::vector<SliceTestResult> smart_nsf_rank(
    const std::vector<OperationalizedHypothesis>& hypotheses, const Dataset& dataset,
    const std::vector<std::uint8_t>& labels, const Predictions& predictions);

} // namespace smart
