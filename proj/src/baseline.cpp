#include "smart/baseline.hpp"

#include "smart/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace smart {

void BaselineConfig::validate() const {
    if (max_order < 1) throw ConfigError("max_order must be >= 1");
    if (numeric_bins < 2) throw ConfigError("numeric_bins must be >= 2");
    if (beam_width < 1) throw ConfigError("beam_width must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
}

namespace {

struct Atom {
    PredicatePtr predicate;
    std::size_t column_index;
    std::vector<std::uint8_t> mask;
};

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    return hash;
}

// Stream tag from the rendered predicate, so a slice draws the same bootstrap
// stream no matter which searcher reached it or in what order.
int stream_tag(const std::string& rendered) {
    return static_cast<int>(fnv1a(rendered) & 0x7fffffffULL);
}

std::vector<double> quantile_edges(std::vector<double> sorted_values, int bins) {
    std::vector<double> uniques = sorted_values;
    uniques.erase(std::unique(uniques.begin(), uniques.end()), uniques.end());
    std::vector<double> edges;
    // low-cardinality columns get an edge between every pair of neighbors;
    // anything finer than the bin count goes through equal-frequency cuts
    if (uniques.size() <= static_cast<std::size_t>(bins)) {
        for (std::size_t i = 0; i + 1 < uniques.size(); ++i)
            edges.push_back(0.5 * (uniques[i] + uniques[i + 1]));
        return edges;
    }
    const std::size_t n = sorted_values.size();
    for (int k = 1; k < bins; ++k) {
        const std::size_t idx = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(bins);
        if (idx == 0 || idx >= n) continue;
        if (sorted_values[idx - 1] == sorted_values[idx]) {
            // the cut falls inside a run of equal values; move to the run's end
            const double v = sorted_values[idx];
            auto upper = std::upper_bound(sorted_values.begin(), sorted_values.end(), v);
            if (upper == sorted_values.end()) continue;
            edges.push_back(0.5 * (v + *upper));
            continue;
        }
        edges.push_back(0.5 * (sorted_values[idx - 1] + sorted_values[idx]));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

std::vector<Atom> build_atoms(const Dataset& dataset, const std::string& target_column,
                              int numeric_bins) {
    std::vector<Atom> atoms;
    for (std::size_t ci = 0; ci < dataset.columns.size(); ++ci) {
        const Column& col = dataset.columns[ci];
        if (col.name == target_column) continue;
        std::vector<PredicatePtr> preds;
        switch (col.kind) {
            case ColumnKind::Categorical: {
                const auto& c = std::get<CategoricalColumn>(col.data);
                for (const auto& cat : c.categories)
                    preds.push_back(make_comparison(col.name, CompareOp::Eq,
                                                    PredicateLiteral::make_string(cat)));
                break;
            }
            case ColumnKind::Boolean: {
                preds.push_back(make_comparison(col.name, CompareOp::Eq,
                                                PredicateLiteral::make_number(0)));
                preds.push_back(make_comparison(col.name, CompareOp::Eq,
                                                PredicateLiteral::make_number(1)));
                break;
            }
            case ColumnKind::Numeric: {
                auto sorted = std::get<NumericColumn>(col.data).values;
                std::sort(sorted.begin(), sorted.end());
                for (double edge : quantile_edges(std::move(sorted), numeric_bins)) {
                    preds.push_back(make_comparison(col.name, CompareOp::Le,
                                                    PredicateLiteral::make_number(edge)));
                    preds.push_back(make_comparison(col.name, CompareOp::Gt,
                                                    PredicateLiteral::make_number(edge)));
                }
                break;
            }
        }
        for (auto& p : preds) {
            Atom atom;
            atom.mask = eval_predicate_mask(p, dataset);
            atom.predicate = std::move(p);
            atom.column_index = ci;
            atoms.push_back(std::move(atom));
        }
    }
    return atoms;
}

struct Candidate {
    PredicatePtr predicate;
    std::vector<std::uint8_t> mask;
    std::size_t last_column; // largest column index used, for ordered extension
};

Slice slice_from_mask(const PredicatePtr& predicate, const std::vector<std::uint8_t>& mask) {
    Slice s;
    s.predicate = predicate;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) s.row_indices.push_back(i);
    return s;
}

// Tests every candidate; untestable slices (too small / no complement) yield
// no result. Results keep candidate order.
std::vector<std::optional<SliceTestResult>> test_candidates(
    const std::vector<Candidate>& candidates, const std::vector<std::uint8_t>& labels,
    const Predictions& predictions, const BaselineConfig& config) {
    TestConfig test_config;
    test_config.alpha = config.alpha;
    test_config.correction = Correction::None; // adjusted after m is known
    test_config.bootstrap_b = config.bootstrap_b;
    test_config.min_slice_size = config.min_slice_size;
    test_config.seed = config.seed;

    std::vector<std::optional<SliceTestResult>> out(candidates.size());
    const std::int64_t n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
        const Candidate& cand = candidates[i];
        std::size_t size = 0;
        for (auto b : cand.mask) size += b;
        if (size < config.min_slice_size || size >= cand.mask.size()) continue;
        Slice slice = slice_from_mask(cand.predicate, cand.mask);
        SliceTestResult r = test_slice(slice, labels, predictions, test_config,
                                       stream_tag(render(cand.predicate)));
        r.hypothesis_id = static_cast<int>(i);
        out[i] = std::move(r);
    }
    return out;
}

BaselineResult finalize(std::vector<std::optional<SliceTestResult>>&& tested,
                        std::size_t total_candidates, const BaselineConfig& config) {
    BaselineResult result;
    result.total_candidates = total_candidates;
    for (auto& r : tested)
        if (r) result.results.push_back(std::move(*r));
    result.total_tested = result.results.size();

    const double adjusted = config.correction == Correction::Bonferroni && result.total_tested > 0
                                ? config.alpha / static_cast<double>(result.total_tested)
                                : config.alpha;
    for (auto& r : result.results) {
        r.adjusted_alpha = adjusted;
        r.significant = r.p_value < adjusted;
        r.evidence = r.significant ? Evidence::Supported : Evidence::NotSupported;
    }

    std::sort(result.results.begin(), result.results.end(),
              [](const SliceTestResult& a, const SliceTestResult& b) {
                  if (a.delta_acc != b.delta_acc) return a.delta_acc > b.delta_acc;
                  return render(a.predicate) < render(b.predicate);
              });
    if (config.top_k > 0 && result.results.size() > static_cast<std::size_t>(config.top_k))
        result.results.resize(static_cast<std::size_t>(config.top_k));
    return result;
}

} // namespace

std::vector<PredicatePtr> enumerate_conditions(const Dataset& dataset,
                                               const std::string& target_column,
                                               int numeric_bins) {
    std::vector<PredicatePtr> out;
    for (auto& atom : build_atoms(dataset, target_column, numeric_bins))
        out.push_back(std::move(atom.predicate));
    return out;
}

BaselineResult exhaustive_search(const Dataset& dataset, const std::vector<std::uint8_t>& labels,
                                 const Predictions& predictions, const BaselineConfig& config) {
    config.validate();
    if (dataset.n_rows() == 0) throw DataError("empty dataset");
    if (labels.size() != dataset.n_rows() || predictions.size() != dataset.n_rows())
        throw DataError("labels/predictions must align with dataset rows");
    const std::string target = dataset.target_column.value_or("");
    const std::vector<Atom> atoms = build_atoms(dataset, target, config.numeric_bins);

    std::vector<Candidate> frontier;
    frontier.reserve(atoms.size());
    for (const auto& atom : atoms)
        frontier.push_back({atom.predicate, atom.mask, atom.column_index});

    std::vector<Candidate> all = frontier;
    for (int order = 2; order <= config.max_order; ++order) {
        std::vector<Candidate> next;
        for (const auto& cand : frontier) {
            for (const auto& atom : atoms) {
                if (atom.column_index <= cand.last_column) continue; // distinct columns, ordered
                Candidate ext;
                ext.predicate = make_and(cand.predicate, atom.predicate);
                ext.mask.resize(cand.mask.size());
                for (std::size_t i = 0; i < cand.mask.size(); ++i)
                    ext.mask[i] = cand.mask[i] && atom.mask[i];
                ext.last_column = atom.column_index;
                next.push_back(std::move(ext));
                if (all.size() + next.size() > config.candidate_cap)
                    throw CandidateExplosionError(
                        "candidate enumeration exceeds the hard cap of " +
                        std::to_string(config.candidate_cap));
            }
        }
        all.insert(all.end(), next.begin(), next.end());
        frontier = std::move(next);
    }

    auto tested = test_candidates(all, labels, predictions, config);
    return finalize(std::move(tested), all.size(), config);
}

BaselineResult beam_search(const Dataset& dataset, const std::vector<std::uint8_t>& labels,
                           const Predictions& predictions, const BaselineConfig& config) {
    config.validate();
    if (dataset.n_rows() == 0) throw DataError("empty dataset");
    if (labels.size() != dataset.n_rows() || predictions.size() != dataset.n_rows())
        throw DataError("labels/predictions must align with dataset rows");
    const std::string target = dataset.target_column.value_or("");
    const std::vector<Atom> atoms = build_atoms(dataset, target, config.numeric_bins);

    std::vector<Candidate> frontier;
    for (const auto& atom : atoms)
        frontier.push_back({atom.predicate, atom.mask, atom.column_index});

    std::vector<Candidate> evaluated_candidates = frontier;
    std::vector<std::optional<SliceTestResult>> evaluated =
        test_candidates(frontier, labels, predictions, config);

    std::size_t round_offset = 0;
    for (int order = 2; order <= config.max_order; ++order) {
        // keep the beam_width best slices of the last round by |delta_acc|
        std::vector<std::size_t> keep;
        for (std::size_t i = round_offset; i < evaluated.size(); ++i)
            if (evaluated[i]) keep.push_back(i);
        std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
            const auto& ra = *evaluated[a];
            const auto& rb = *evaluated[b];
            if (ra.delta_acc != rb.delta_acc) return ra.delta_acc > rb.delta_acc;
            return render(ra.predicate) < render(rb.predicate);
        });
        if (keep.size() > static_cast<std::size_t>(config.beam_width))
            keep.resize(static_cast<std::size_t>(config.beam_width));

        std::vector<Candidate> next;
        for (std::size_t idx : keep) {
            const Candidate& cand = evaluated_candidates[idx];
            for (const auto& atom : atoms) {
                if (atom.column_index <= cand.last_column) continue;
                Candidate ext;
                ext.predicate = make_and(cand.predicate, atom.predicate);
                ext.mask.resize(cand.mask.size());
                for (std::size_t i = 0; i < cand.mask.size(); ++i)
                    ext.mask[i] = cand.mask[i] && atom.mask[i];
                ext.last_column = atom.column_index;
                next.push_back(std::move(ext));
            }
        }
        if (next.empty()) break;
        round_offset = evaluated.size();
        auto tested = test_candidates(next, labels, predictions, config);
        evaluated.insert(evaluated.end(), std::make_move_iterator(tested.begin()),
                         std::make_move_iterator(tested.end()));
        evaluated_candidates.insert(evaluated_candidates.end(),
                                    std::make_move_iterator(next.begin()),
                                    std::make_move_iterator(next.end()));
    }

    return finalize(std::move(evaluated), evaluated_candidates.size(), config);
}

} // namespace smart
