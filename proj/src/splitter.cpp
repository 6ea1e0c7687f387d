#include "smart/splitter.hpp"

#include "smart/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace smart {

void SplitConstraints::validate() const {
    if (min_group_size == 0) throw ConfigError("min_group_size must be positive");
    if (min_group_size > max_group_size)
        throw ConfigError("min_group_size exceeds max_group_size");
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
}

namespace {

struct PathCondition {
    std::string column;
    CompareOp op;       // Le / Gt for numeric, Eq for boolean
    double threshold;   // numeric threshold or boolean 0/1
    bool boolean;
};

PredicatePtr to_predicate(const std::vector<PathCondition>& conditions) {
    PredicatePtr acc;
    for (const auto& c : conditions) {
        PredicatePtr node =
            c.boolean
                ? make_comparison(c.column, CompareOp::Eq,
                                  PredicateLiteral::make_number(c.threshold))
                : make_comparison(c.column, c.op, PredicateLiteral::make_number(c.threshold));
        acc = acc ? make_and(std::move(acc), std::move(node)) : std::move(node);
    }
    return acc;
}

struct FeatureView {
    std::string name;
    bool boolean;
    const std::vector<double>* numeric = nullptr;
    const std::vector<std::uint8_t>* bits = nullptr;

    double value(std::size_t row) const {
        return boolean ? static_cast<double>((*bits)[row]) : (*numeric)[row];
    }
};

std::vector<FeatureView> resolve_features(const Dataset& dataset,
                                          const std::vector<std::string>& names) {
    std::vector<FeatureView> views;
    for (const auto& name : names) {
        const Column& col = dataset.column(name);
        FeatureView v;
        v.name = name;
        switch (col.kind) {
            case ColumnKind::Numeric:
                v.boolean = false;
                v.numeric = &std::get<NumericColumn>(col.data).values;
                break;
            case ColumnKind::Boolean:
                v.boolean = true;
                v.bits = &std::get<BooleanColumn>(col.data).values;
                break;
            case ColumnKind::Categorical:
                throw PredicateTypeError("optimal_split_query does not handle categorical column '" +
                                         name + "'; use optimal_categorical_split");
        }
        views.push_back(std::move(v));
    }
    return views;
}

// Midpoints between consecutive sorted unique values over the given rows.
std::vector<double> candidate_thresholds(const FeatureView& feature,
                                         const std::vector<std::size_t>& rows) {
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (std::size_t r : rows) vals.push_back(feature.value(r));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
        mids.push_back(0.5 * (vals[i] + vals[i + 1]));
    return mids;
}

struct Candidate {
    std::vector<PathCondition> conditions;
};

struct Evaluated {
    double gap = -1.0;
    int depth = 0;
    std::string rendered;
    PredicatePtr predicate;
};

// Collects every root-to-node path of a greedy variance-reduction tree.
class TreeGrower {
public:
    TreeGrower(const std::vector<FeatureView>& features,
               const std::vector<std::uint8_t>& outcome, int max_depth,
               std::size_t min_node_size)
        : features_(features), outcome_(outcome), max_depth_(max_depth),
          min_node_size_(min_node_size) {}

    void grow(const std::vector<std::size_t>& rows, int depth,
              std::vector<PathCondition>& path, std::vector<Candidate>& out) {
        if (depth >= max_depth_ || rows.size() < 2 * min_node_size_) return;

        // variance-reduction best split: minimize weighted child impurity
        double best_impurity = std::numeric_limits<double>::infinity();
        std::size_t best_feature = SIZE_MAX;
        double best_threshold = 0.0;
        for (std::size_t f = 0; f < features_.size(); ++f) {
            for (double t : candidate_thresholds(features_[f], rows)) {
                std::size_t n_left = 0, pos_left = 0, n_right = 0, pos_right = 0;
                for (std::size_t r : rows) {
                    if (features_[f].value(r) <= t) {
                        ++n_left;
                        pos_left += outcome_[r];
                    } else {
                        ++n_right;
                        pos_right += outcome_[r];
                    }
                }
                if (n_left == 0 || n_right == 0) continue;
                const double pl = static_cast<double>(pos_left) / n_left;
                const double pr = static_cast<double>(pos_right) / n_right;
                const double impurity = n_left * pl * (1.0 - pl) + n_right * pr * (1.0 - pr);
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = f;
                    best_threshold = t;
                }
            }
        }
        if (best_feature == SIZE_MAX) return;

        const FeatureView& feat = features_[best_feature];
        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (feat.value(r) <= best_threshold ? left_rows : right_rows).push_back(r);

        PathCondition left_cond{feat.name, CompareOp::Le, best_threshold, false};
        PathCondition right_cond{feat.name, CompareOp::Gt, best_threshold, false};
        if (feat.boolean) {
            left_cond = {feat.name, CompareOp::Eq, 0.0, true};
            right_cond = {feat.name, CompareOp::Eq, 1.0, true};
        }

        path.push_back(left_cond);
        out.push_back({path});
        grow(left_rows, depth + 1, path, out);
        path.pop_back();

        path.push_back(right_cond);
        out.push_back({path});
        grow(right_rows, depth + 1, path, out);
        path.pop_back();
    }

private:
    const std::vector<FeatureView>& features_;
    const std::vector<std::uint8_t>& outcome_;
    int max_depth_;
    std::size_t min_node_size_;
};

// Gap objective: both sides must clear min_group_size, the slice must respect
// max_group_size.
bool evaluate_candidate(const std::vector<PathCondition>& conditions, const Dataset& dataset,
                        const std::vector<std::uint8_t>& outcome,
                        const SplitConstraints& constraints, Evaluated& out) {
    const std::size_t n = dataset.n_rows();
    std::vector<std::uint8_t> mask(n, 1);
    for (const auto& c : conditions) {
        const Column& col = dataset.column(c.column);
        if (c.boolean) {
            const auto& bits = std::get<BooleanColumn>(col.data).values;
            const std::uint8_t want = c.threshold != 0.0 ? 1 : 0;
            for (std::size_t i = 0; i < n; ++i) mask[i] = mask[i] && bits[i] == want;
        } else {
            const auto& vals = std::get<NumericColumn>(col.data).values;
            if (c.op == CompareOp::Le) {
                for (std::size_t i = 0; i < n; ++i) mask[i] = mask[i] && vals[i] <= c.threshold;
            } else {
                for (std::size_t i = 0; i < n; ++i) mask[i] = mask[i] && vals[i] > c.threshold;
            }
        }
    }

    std::size_t n_s = 0, pos_s = 0, pos_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pos_total += outcome[i];
        if (mask[i]) {
            ++n_s;
            pos_s += outcome[i];
        }
    }
    const std::size_t n_c = n - n_s;
    if (n_s < constraints.min_group_size || n_c < constraints.min_group_size) return false;
    if (n_s > constraints.max_group_size) return false;

    const double mean_s = static_cast<double>(pos_s) / n_s;
    const double mean_c = static_cast<double>(pos_total - pos_s) / n_c;
    out.gap = std::fabs(mean_s - mean_c);
    out.depth = static_cast<int>(conditions.size());
    out.predicate = to_predicate(conditions);
    out.rendered = render(out.predicate);
    return true;
}

bool better(const Evaluated& a, const Evaluated& b) {
    if (a.gap != b.gap) return a.gap > b.gap;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.rendered < b.rendered;
}

} // namespace

PredicatePtr optimal_split_query(const Dataset& dataset,
                                 const std::vector<std::uint8_t>& correctness,
                                 const std::vector<std::string>& features,
                                 const SplitConstraints& constraints) {
    constraints.validate();
    if (features.empty()) throw ConfigError("optimal_split_query needs at least one feature");
    if (correctness.size() != dataset.n_rows())
        throw DataError("correctness vector must align with dataset rows");
    if (dataset.n_rows() < 2 * constraints.min_group_size)
        throw NoValidSplitError("dataset smaller than twice the minimum group size");

    const std::vector<FeatureView> views = resolve_features(dataset, features);

    std::vector<std::size_t> all_rows(dataset.n_rows());
    std::iota(all_rows.begin(), all_rows.end(), 0);

    std::vector<Candidate> candidates;
    // every single-condition split, both directions
    for (const auto& feat : views) {
        if (feat.boolean) {
            candidates.push_back({{{feat.name, CompareOp::Eq, 0.0, true}}});
            candidates.push_back({{{feat.name, CompareOp::Eq, 1.0, true}}});
            continue;
        }
        for (double t : candidate_thresholds(feat, all_rows)) {
            candidates.push_back({{{feat.name, CompareOp::Le, t, false}}});
            candidates.push_back({{{feat.name, CompareOp::Gt, t, false}}});
        }
    }
    // plus every root-to-node path of the greedy tree
    TreeGrower grower(views, correctness, constraints.max_depth, constraints.min_group_size);
    std::vector<PathCondition> path;
    grower.grow(all_rows, 0, path, candidates);

    Evaluated best;
    bool found = false;
    for (const auto& cand : candidates) {
        Evaluated ev;
        if (!evaluate_candidate(cand.conditions, dataset, correctness, constraints, ev)) continue;
        if (ev.gap <= 0.0) continue;
        if (!found || better(ev, best)) {
            best = std::move(ev);
            found = true;
        }
    }
    if (!found)
        throw NoValidSplitError("no split satisfies the group-size constraints with a positive gap");
    return best.predicate;
}

PredicatePtr optimal_categorical_split(const Dataset& dataset,
                                       const std::vector<std::uint8_t>& correctness,
                                       const std::string& feature,
                                       const SplitConstraints& constraints,
                                       std::size_t max_subset_size,
                                       std::size_t* candidates_considered) {
    constraints.validate();
    if (max_subset_size == 0) throw ConfigError("max_subset_size must be positive");
    if (correctness.size() != dataset.n_rows())
        throw DataError("correctness vector must align with dataset rows");

    const Column& col = dataset.column(feature);
    if (col.kind != ColumnKind::Categorical)
        throw PredicateTypeError("optimal_categorical_split requires a categorical column");
    const auto& cat = std::get<CategoricalColumn>(col.data);
    const std::size_t k = cat.categories.size();
    if (k < 2) throw NoValidSplitError("categorical feature has fewer than two values");

    // categories in lexicographic order so subset enumeration is deterministic
    std::vector<std::int32_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&cat](std::int32_t a, std::int32_t b) {
        return cat.categories[a] < cat.categories[b];
    });

    std::size_t pos_total = 0;
    for (std::size_t i = 0; i < correctness.size(); ++i) pos_total += correctness[i];
    const std::size_t n = dataset.n_rows();

    Evaluated best;
    bool found = false;
    std::size_t considered = 0;
    std::vector<std::int32_t> subset;

    auto consider = [&](const std::vector<std::int32_t>& codes) {
        ++considered;
        std::vector<std::uint8_t> member(k, 0);
        for (auto c : codes) member[c] = 1;
        std::size_t n_s = 0, pos_s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (member[cat.codes[i]]) {
                ++n_s;
                pos_s += correctness[i];
            }
        }
        const std::size_t n_c = n - n_s;
        if (n_s < constraints.min_group_size || n_c < constraints.min_group_size) return;
        if (n_s > constraints.max_group_size) return;
        const double gap = std::fabs(static_cast<double>(pos_s) / n_s -
                                     static_cast<double>(pos_total - pos_s) / n_c);
        if (gap <= 0.0) return;

        std::vector<PredicateLiteral> values;
        for (auto c : codes) values.push_back(PredicateLiteral::make_string(cat.categories[c]));
        Evaluated ev;
        ev.gap = gap;
        ev.depth = static_cast<int>(codes.size());
        ev.predicate = make_in_set(feature, std::move(values));
        ev.rendered = render(ev.predicate);
        if (!found || better(ev, best)) {
            best = std::move(ev);
            found = true;
        }
    };

    // subsets in increasing size, lexicographic within a size; the full value
    // set is skipped (its complement is empty)
    std::function<void(std::size_t, std::size_t)> enumerate =
        [&](std::size_t start, std::size_t target) {
            if (subset.size() == target) {
                if (subset.size() < k) consider(subset);
                return;
            }
            for (std::size_t i = start; i < k; ++i) {
                subset.push_back(order[i]);
                enumerate(i + 1, target);
                subset.pop_back();
            }
        };
    const std::size_t cap = std::min(max_subset_size, k);
    for (std::size_t size = 1; size <= cap; ++size) enumerate(0, size);
    if (candidates_considered) *candidates_considered = considered;

    if (!found)
        throw NoValidSplitError("no category subset satisfies the constraints with a positive gap");
    return best.predicate;
}

double split_gap(const Dataset& dataset, const std::vector<std::uint8_t>& correctness,
                 const PredicatePtr& predicate) {
    const std::vector<std::uint8_t> mask = eval_predicate_mask(predicate, dataset);
    std::size_t n_s = 0, pos_s = 0, pos_total = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        pos_total += correctness[i];
        if (mask[i]) {
            ++n_s;
            pos_s += correctness[i];
        }
    }
    const std::size_t n_c = mask.size() - n_s;
    if (n_s == 0 || n_c == 0) return 0.0;
    return std::fabs(static_cast<double>(pos_s) / n_s -
                     static_cast<double>(pos_total - pos_s) / n_c);
}

} // namespace smart
