#include "smart/falsify.hpp"

#include "smart/errors.hpp"
#include "smart/hypothesis.hpp"
#include "smart/rng.hpp"

#include <algorithm>
#include <cmath>

namespace smart {

std::string to_string(Correction c) {
    return c == Correction::Bonferroni ? "bonferroni" : "none";
}

std::string to_string(Evidence e) {
    switch (e) {
        case Evidence::Supported: return "Supported";
        case Evidence::NotSupported: return "Not supported";
        case Evidence::Untested: return "Untested";
    }
    return "?";
}

void TestConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (bootstrap_b < 100) throw ConfigError("bootstrap resample count must be >= 100");
    if (top_n < 1) throw ConfigError("top_n must be >= 1");
}

namespace {

// One null resample: draw both groups from Bernoulli(pooled rate) and return
// the resampled statistic.
inline double null_delta(Rng& rng, std::uint64_t thresh, std::size_t n_slice,
                         std::size_t n_other, bool vs_overall) {
    std::size_t hits_s = 0, hits_o = 0;
    for (std::size_t i = 0; i < n_slice; ++i) hits_s += rng.next_u64() < thresh;
    for (std::size_t i = 0; i < n_other; ++i) hits_o += rng.next_u64() < thresh;
    const double mean_s = static_cast<double>(hits_s) / static_cast<double>(n_slice);
    if (vs_overall) {
        const double mean_all = static_cast<double>(hits_s + hits_o) /
                                static_cast<double>(n_slice + n_other);
        return mean_s - mean_all;
    }
    const double mean_o = static_cast<double>(hits_o) / static_cast<double>(n_other);
    return mean_s - mean_o;
}

inline std::uint64_t bernoulli_threshold(double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return UINT64_MAX;
    return static_cast<std::uint64_t>(p * 18446744073709551616.0);
}

} // namespace

std::int64_t bootstrap_null_exceedances_serial(const BootstrapSpec& spec) {
    const std::uint64_t thresh = bernoulli_threshold(spec.pooled_rate);
    std::int64_t count = 0;
    for (int b = 0; b < spec.resamples; ++b) {
        Rng rng(derive_seed(spec.stream_seed, static_cast<std::uint64_t>(b)));
        const double delta =
            null_delta(rng, thresh, spec.n_slice, spec.n_other, spec.vs_overall);
        count += std::fabs(delta) >= spec.observed_abs;
    }
    return count;
}

std::int64_t bootstrap_null_exceedances(const BootstrapSpec& spec) {
    const std::uint64_t thresh = bernoulli_threshold(spec.pooled_rate);
    std::int64_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
    for (int b = 0; b < spec.resamples; ++b) {
        Rng rng(derive_seed(spec.stream_seed, static_cast<std::uint64_t>(b)));
        const double delta =
            null_delta(rng, thresh, spec.n_slice, spec.n_other, spec.vs_overall);
        count += std::fabs(delta) >= spec.observed_abs;
    }
    return count;
}

SliceTestResult test_slice(const Slice& slice, const std::vector<std::uint8_t>& labels,
                           const Predictions& predictions, const TestConfig& config,
                           int hypothesis_id) {
    config.validate();
    if (labels.size() != predictions.size())
        throw DataError("labels/predictions length mismatch");
    const std::size_t n = labels.size();
    const std::size_t n_s = slice.size();
    if (n_s < config.min_slice_size)
        throw UndersizedSliceError("slice has " + std::to_string(n_s) +
                                   " rows, below the minimum of " +
                                   std::to_string(config.min_slice_size));
    if (n_s >= n) throw DataError("slice complement is empty");

    std::vector<std::uint8_t> in_slice(n, 0);
    for (std::size_t r : slice.row_indices) {
        if (r >= n) throw DataError("slice row index out of range");
        in_slice[r] = 1;
    }

    std::size_t correct_total = 0, correct_slice = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ok = predictions.values[i] == labels[i];
        correct_total += ok;
        if (in_slice[i]) correct_slice += ok;
    }
    const std::size_t n_c = n - n_s;
    const std::size_t correct_rest = correct_total - correct_slice;

    SliceTestResult result;
    result.hypothesis_id = hypothesis_id;
    result.predicate = slice.predicate;
    result.group_size = n_s;
    result.acc_slice = static_cast<double>(correct_slice) / static_cast<double>(n_s);
    result.acc_rest = static_cast<double>(correct_rest) / static_cast<double>(n_c);
    result.acc_overall = static_cast<double>(correct_total) / static_cast<double>(n);
    result.delta_acc = std::fabs(result.acc_slice - result.acc_overall);
    result.observed_stat = config.vs_overall ? result.acc_slice - result.acc_overall
                                             : result.acc_slice - result.acc_rest;

    BootstrapSpec spec;
    spec.n_slice = n_s;
    spec.n_other = n_c;
    spec.pooled_rate = result.acc_overall;
    spec.observed_abs = std::fabs(result.observed_stat);
    spec.vs_overall = config.vs_overall;
    spec.resamples = config.bootstrap_b;
    spec.stream_seed = derive_seed(config.seed, 0xfa15, static_cast<std::uint64_t>(hypothesis_id));

    const std::int64_t exceed = bootstrap_null_exceedances(spec);
    result.p_value = static_cast<double>(1 + exceed) / static_cast<double>(config.bootstrap_b + 1);
    result.adjusted_alpha = config.alpha;
    result.significant = result.p_value < result.adjusted_alpha;
    result.evidence = result.significant ? Evidence::Supported : Evidence::NotSupported;
    return result;
}

void rank_and_truncate(std::vector<SliceTestResult>& results, int top_n) {
    std::sort(results.begin(), results.end(),
              [](const SliceTestResult& a, const SliceTestResult& b) {
                  if (a.p_value != b.p_value) return a.p_value < b.p_value;
                  if (a.delta_acc != b.delta_acc) return a.delta_acc > b.delta_acc;
                  return render(a.predicate) < render(b.predicate);
              });
    if (top_n > 0 && results.size() > static_cast<std::size_t>(top_n))
        results.resize(static_cast<std::size_t>(top_n));
}

std::vector<SliceTestResult> run_falsification(
    const std::vector<OperationalizedHypothesis>& hypotheses, const Dataset& dataset,
    const std::vector<std::uint8_t>& labels, const Predictions& predictions,
    const TestConfig& config) {
    config.validate();
    if (hypotheses.empty()) return {};

    struct Prepared {
        const OperationalizedHypothesis* hyp;
        Slice slice;
    };
    std::vector<Prepared> testable;
    for (const auto& h : hypotheses) {
        Slice slice = eval_predicate(h.predicate, dataset);
        if (slice.size() >= config.min_slice_size && slice.size() < dataset.n_rows())
            testable.push_back({&h, std::move(slice)});
    }

    const int m = static_cast<int>(testable.size());
    const double adjusted =
        config.correction == Correction::Bonferroni && m > 0 ? config.alpha / m : config.alpha;

    std::vector<SliceTestResult> results(testable.size());
    for (std::size_t i = 0; i < testable.size(); ++i) {
        SliceTestResult r = test_slice(testable[i].slice, labels, predictions, config,
                                       testable[i].hyp->hypothesis.id);
        r.adjusted_alpha = adjusted;
        r.significant = r.p_value < adjusted;
        r.evidence = r.significant ? Evidence::Supported : Evidence::NotSupported;
        results[i] = std::move(r);
    }

    rank_and_truncate(results, config.top_n);
    return results;
}

double fwer_naive(int m, double alpha) {
    if (m < 1) throw ConfigError("fwer_naive requires m >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    return 1.0 - std::pow(1.0 - alpha, m);
}

std::vector<SliceTestResult> smart_nsf_rank(
    const std::vector<OperationalizedHypothesis>& hypotheses, const Dataset& dataset,
    const std::vector<std::uint8_t>& labels, const Predictions& predictions) {
    std::vector<SliceTestResult> results;
    results.reserve(hypotheses.size());

    std::size_t correct_total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        correct_total += predictions.values[i] == labels[i];
    const double acc_overall =
        labels.empty() ? 0.0 : static_cast<double>(correct_total) / labels.size();

    for (const auto& h : hypotheses) {
        Slice slice = eval_predicate(h.predicate, dataset);
        SliceTestResult r;
        r.hypothesis_id = h.hypothesis.id;
        r.predicate = h.predicate;
        r.group_size = slice.size();
        r.acc_overall = acc_overall;
        if (!slice.row_indices.empty() && slice.size() < labels.size()) {
            std::size_t correct_slice = 0;
            for (std::size_t row : slice.row_indices)
                correct_slice += predictions.values[row] == labels[row];
            r.acc_slice = static_cast<double>(correct_slice) / slice.size();
            r.acc_rest = static_cast<double>(correct_total - correct_slice) /
                         static_cast<double>(labels.size() - slice.size());
            r.delta_acc = std::fabs(r.acc_slice - acc_overall);
        }
        r.p_value = std::nan("");
        r.adjusted_alpha = std::nan("");
        r.significant = false;
        r.evidence = Evidence::Untested;
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace smart
