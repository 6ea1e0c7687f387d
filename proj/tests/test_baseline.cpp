#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smart/baseline.hpp"
#include "smart/errors.hpp"
#include "smart/rng.hpp"

using namespace smart;

namespace {

Dataset bool_features(int count, std::size_t n, std::uint64_t seed) {
    Dataset ds;
    ds.name = "bools";
    Rng rng(seed);
    for (int f = 0; f < count; ++f) {
        BooleanColumn col;
        for (std::size_t i = 0; i < n; ++i) col.values.push_back(rng.bernoulli(0.5));
        ds.columns.push_back({"f" + std::to_string(f), ColumnKind::Boolean, std::move(col)});
    }
    NumericColumn y;
    y.values.assign(n, 1.0);
    ds.columns.push_back({"y", ColumnKind::Numeric, std::move(y)});
    ds.target_column = "y";
    return ds;
}

Predictions null_predictions(std::size_t n, double acc, std::uint64_t seed) {
    Predictions preds;
    preds.values.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) preds.values[i] = rng.bernoulli(acc) ? 1 : 0;
    return preds;
}

} // namespace

TEST_CASE("five binary features at order one give exactly ten candidates") {
    Dataset ds = bool_features(5, 300, 1);
    Predictions preds = null_predictions(300, 0.8, 2);
    BaselineConfig config;
    config.max_order = 1;
    config.bootstrap_b = 100;
    BaselineResult result = exhaustive_search(ds, ds.labels(), preds, config);
    CHECK(result.total_candidates == 10);
    CHECK(result.total_tested == 10);
}

TEST_CASE("candidate counts match the analytic enumeration") {
    // 3 booleans (2 conditions each) and one categorical with 4 values:
    // order 1 = 10, order 2 adds 2*2*3 + 3*(2*4) = 12 + 24 = 36
    Dataset ds = bool_features(3, 400, 3);
    CategoricalColumn cat;
    cat.categories = {"a", "b", "c", "d"};
    Rng rng(5);
    for (int i = 0; i < 400; ++i)
        cat.codes.push_back(static_cast<std::int32_t>(rng.uniform_int(0, 3)));
    ds.columns.insert(ds.columns.end() - 1,
                      {"cat", ColumnKind::Categorical, std::move(cat)});

    Predictions preds = null_predictions(400, 0.8, 6);
    BaselineConfig config;
    config.max_order = 2;
    config.bootstrap_b = 100;
    BaselineResult result = exhaustive_search(ds, ds.labels(), preds, config);
    CHECK(result.total_candidates == 10 + 36);
}

TEST_CASE("numeric columns contribute both directions of each quantile edge") {
    Dataset ds;
    ds.name = "numeric";
    NumericColumn x;
    for (int i = 0; i < 1000; ++i) x.values.push_back(static_cast<double>(i % 100));
    ds.columns.push_back({"x", ColumnKind::Numeric, std::move(x)});
    NumericColumn y;
    y.values.assign(1000, 1.0);
    ds.columns.push_back({"y", ColumnKind::Numeric, std::move(y)});
    ds.target_column = "y";

    auto conditions = enumerate_conditions(ds, "y", 10);
    CHECK(conditions.size() == 18); // 9 interior edges, two directions
}

TEST_CASE("null data yields spurious discoveries uncorrected, few with bonferroni") {
    int uncorrected_hits = 0, bonferroni_hits = 0;
    const int runs = 50;
    for (int run = 0; run < runs; ++run) {
        Dataset ds = bool_features(10, 600, 100 + run); // order 2 ~ m=200
        Predictions preds = null_predictions(600, 0.8, 500 + run);
        BaselineConfig config;
        config.max_order = 2;
        config.bootstrap_b = 250;
        config.seed = run;
        config.top_k = 0;

        config.correction = Correction::None;
        BaselineResult uncorrected = exhaustive_search(ds, ds.labels(), preds, config);
        int significant = 0;
        for (const auto& r : uncorrected.results) significant += r.significant;
        uncorrected_hits += significant > 0;

        config.correction = Correction::Bonferroni;
        BaselineResult corrected = exhaustive_search(ds, ds.labels(), preds, config);
        significant = 0;
        for (const auto& r : corrected.results) significant += r.significant;
        bonferroni_hits += significant > 0;
    }
    CHECK(uncorrected_hits > runs / 2);          // spurious slices are the norm
    CHECK(bonferroni_hits <= runs / 10);         // and the correction removes them
}

TEST_CASE("a planted single-feature failure is found at order one in every run") {
    for (int run = 0; run < 10; ++run) {
        Dataset ds = bool_features(6, 1500, 700 + run);
        Predictions preds = null_predictions(1500, 0.9, 800 + run);
        const auto& f2 = std::get<BooleanColumn>(ds.column("f2").data).values;
        Rng rng(run);
        for (std::size_t i = 0; i < f2.size(); ++i)
            if (f2[i]) preds.values[i] = rng.bernoulli(0.5) ? 1 : 0;

        BaselineConfig config;
        config.max_order = 1;
        config.bootstrap_b = 400;
        config.seed = run;
        BaselineResult result = exhaustive_search(ds, ds.labels(), preds, config);
        REQUIRE(!result.results.empty());
        CHECK(references_column_value(result.results.front().predicate, "f2"));
        CHECK(result.results.front().significant);
    }
}

TEST_CASE("a wide beam reproduces the exhaustive search exactly") {
    Dataset ds = bool_features(5, 500, 11);
    Predictions preds = null_predictions(500, 0.85, 12);
    BaselineConfig config;
    config.max_order = 2;
    config.bootstrap_b = 200;
    config.seed = 9;
    config.top_k = 0;
    config.beam_width = 10000;

    BaselineResult exhaustive = exhaustive_search(ds, ds.labels(), preds, config);
    BaselineResult beam = beam_search(ds, ds.labels(), preds, config);

    REQUIRE(beam.results.size() == exhaustive.results.size());
    CHECK(beam.total_tested == exhaustive.total_tested);
    for (std::size_t i = 0; i < beam.results.size(); ++i) {
        CHECK(render(beam.results[i].predicate) == render(exhaustive.results[i].predicate));
        CHECK(beam.results[i].p_value == exhaustive.results[i].p_value);
        CHECK(beam.results[i].delta_acc == exhaustive.results[i].delta_acc);
    }
}

TEST_CASE("a narrow beam never beats exhaustive on the objective") {
    for (int run = 0; run < 5; ++run) {
        Dataset ds = bool_features(8, 700, 40 + run);
        Predictions preds = null_predictions(700, 0.8, 50 + run);
        BaselineConfig config;
        config.max_order = 2;
        config.bootstrap_b = 150;
        config.seed = run;
        config.beam_width = 3;
        BaselineResult exhaustive = exhaustive_search(ds, ds.labels(), preds, config);
        BaselineResult beam = beam_search(ds, ds.labels(), preds, config);
        REQUIRE(!exhaustive.results.empty());
        REQUIRE(!beam.results.empty());
        CHECK(beam.results.front().delta_acc <= exhaustive.results.front().delta_acc + 1e-12);
    }
}

TEST_CASE("the candidate cap trips deliberately") {
    Dataset ds = bool_features(10, 50, 77);
    Predictions preds = null_predictions(50, 0.8, 78);
    BaselineConfig config;
    config.max_order = 2;
    config.candidate_cap = 50;
    config.bootstrap_b = 100;
    CHECK_THROWS_AS(exhaustive_search(ds, ds.labels(), preds, config),
                    CandidateExplosionError);
}
