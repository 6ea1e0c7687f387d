#include "smart/metrics.hpp"

#include "smart/errors.hpp"

#include <cmath>

namespace smart {

namespace {

std::optional<double> paper_odds_ratio(double p1, double p0) {
    const double denom = p0 * (1.0 - p0);
    if (denom == 0.0) return std::nullopt;
    return p1 * (1.0 - p1) / denom;
}

std::optional<double> conventional_odds_ratio(double p1, double p0) {
    if (p1 >= 1.0 || p0 <= 0.0 || p0 >= 1.0) return std::nullopt;
    return (p1 / (1.0 - p1)) / (p0 / (1.0 - p0));
}

std::optional<double> lift(double p1, double p) {
    if (p == 0.0) return std::nullopt;
    return p1 / p;
}

} // namespace

SliceMetrics slice_metrics(const Slice& slice, const Dataset& dataset,
                           const std::vector<std::uint8_t>& labels,
                           const Predictions& predictions) {
    const std::size_t n = dataset.n_rows();
    if (labels.size() != n || predictions.size() != n)
        throw DataError("labels/predictions must align with the dataset rows");
    const std::size_t n_s = slice.size();
    if (n_s == 0) throw DataError("slice_metrics requires a non-empty slice");
    if (n_s >= n) throw DataError("slice_metrics requires a non-empty complement");

    std::vector<std::uint8_t> in_slice(n, 0);
    for (std::size_t r : slice.row_indices) in_slice[r] = 1;

    std::size_t y_total = 0, y_slice = 0, ok_total = 0, ok_slice = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool y = labels[i] != 0;
        const bool ok = predictions.values[i] == labels[i];
        y_total += y;
        ok_total += ok;
        if (in_slice[i]) {
            y_slice += y;
            ok_slice += ok;
        }
    }
    const std::size_t n_c = n - n_s;

    SliceMetrics m;
    m.group_size = n_s;
    m.support = static_cast<double>(n_s) / static_cast<double>(n);
    m.num_criteria = slice.predicate ? count_criteria(slice.predicate) : 1;

    m.outcome_slice = static_cast<double>(y_slice) / static_cast<double>(n_s);
    m.outcome_dataset = static_cast<double>(y_total) / static_cast<double>(n);
    m.outcome_rest = static_cast<double>(y_total - y_slice) / static_cast<double>(n_c);
    m.acc_slice = static_cast<double>(ok_slice) / static_cast<double>(n_s);
    m.acc_dataset = static_cast<double>(ok_total) / static_cast<double>(n);
    m.acc_rest = static_cast<double>(ok_total - ok_slice) / static_cast<double>(n_c);

    m.outcome_diff = std::fabs(m.outcome_dataset - m.outcome_slice);
    m.accuracy_diff = std::fabs(m.acc_dataset - m.acc_slice);

    m.odds_ratio_outcome = paper_odds_ratio(m.outcome_slice, m.outcome_rest);
    m.odds_ratio_acc = paper_odds_ratio(m.acc_slice, m.acc_rest);
    m.lift_outcome = lift(m.outcome_slice, m.outcome_dataset);
    m.lift_acc = lift(m.acc_slice, m.acc_dataset);

    m.weighted_relative_y = m.support * (m.outcome_slice - m.outcome_dataset);
    m.weighted_relative_acc = m.support * (m.acc_slice - m.acc_dataset);

    m.conventional_or_outcome = conventional_odds_ratio(m.outcome_slice, m.outcome_rest);
    m.conventional_or_acc = conventional_odds_ratio(m.acc_slice, m.acc_rest);
    return m;
}

std::vector<std::string> consistency_check(const SliceMetrics& metrics,
                                           std::size_t dataset_size) {
    std::vector<std::string> violations;
    const double implied = metrics.support * static_cast<double>(dataset_size);
    if (std::fabs(implied - static_cast<double>(metrics.group_size)) > 1.0)
        violations.push_back("support * dataset_size differs from group_size by more than 1");

    const double eps = 1e-9;
    if (std::fabs(std::fabs(metrics.weighted_relative_y) -
                  metrics.support * metrics.outcome_diff) > eps)
        violations.push_back("weighted_relative_y != support * outcome_diff");
    if (std::fabs(std::fabs(metrics.weighted_relative_acc) -
                  metrics.support * metrics.accuracy_diff) > eps)
        violations.push_back("weighted_relative_acc != support * accuracy_diff");

    if (metrics.acc_slice == metrics.acc_dataset && metrics.lift_acc &&
        std::fabs(*metrics.lift_acc - 1.0) > eps)
        violations.push_back("lift_acc != 1 although slice accuracy equals overall accuracy");

    if (metrics.num_criteria < 1) violations.push_back("num_criteria < 1");
    if (metrics.support < 0.0 || metrics.support > 1.0)
        violations.push_back("support outside [0,1]");
    return violations;
}

} // namespace smart
