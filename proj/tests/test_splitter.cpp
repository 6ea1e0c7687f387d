#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smart/errors.hpp"
#include "smart/rng.hpp"
#include "smart/splitter.hpp"

#include <cmath>

using namespace smart;

namespace {

Dataset numeric_dataset(const std::vector<std::vector<double>>& columns,
                        const std::vector<std::string>& names) {
    Dataset ds;
    ds.name = "split";
    for (std::size_t c = 0; c < columns.size(); ++c)
        ds.columns.push_back({names[c], ColumnKind::Numeric, NumericColumn{columns[c]}});
    return ds;
}

// Brute-force oracle: every (feature, midpoint threshold, direction) single
// split, same constraint rule (both sides >= min, slice <= max), best |gap|.
double oracle_best_gap(const Dataset& ds, const std::vector<std::uint8_t>& correct,
                       const std::vector<std::string>& features,
                       const SplitConstraints& constraints) {
    double best = -1.0;
    const std::size_t n = ds.n_rows();
    for (const auto& name : features) {
        const auto& vals = std::get<NumericColumn>(ds.column(name).data).values;
        auto uniq = vals;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
            const double threshold = 0.5 * (uniq[i] + uniq[i + 1]);
            for (int direction = 0; direction < 2; ++direction) {
                std::size_t n_s = 0, pos_s = 0, pos_total = 0;
                for (std::size_t r = 0; r < n; ++r) {
                    pos_total += correct[r];
                    const bool inside =
                        direction == 0 ? vals[r] <= threshold : vals[r] > threshold;
                    if (inside) {
                        ++n_s;
                        pos_s += correct[r];
                    }
                }
                const std::size_t n_c = n - n_s;
                if (n_s < constraints.min_group_size || n_c < constraints.min_group_size)
                    continue;
                if (n_s > constraints.max_group_size) continue;
                const double gap = std::fabs(static_cast<double>(pos_s) / n_s -
                                             static_cast<double>(pos_total - pos_s) / n_c);
                if (gap > best) best = gap;
            }
        }
    }
    return best;
}

} // namespace

TEST_CASE("planted threshold is recovered within one candidate step") {
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(500 + seed);
        std::vector<double> age;
        std::vector<std::uint8_t> correct;
        for (int i = 0; i < 2000; ++i) {
            const double a = static_cast<double>(rng.uniform_int(18, 90));
            age.push_back(a);
            correct.push_back(rng.bernoulli(a >= 72.0 ? 0.5 : 0.95));
        }
        Dataset ds = numeric_dataset({age}, {"age"});
        SplitConstraints constraints;
        // a tenth of the data: keeps noisy tail groups out of contention
        constraints.min_group_size = 200;
        constraints.max_depth = 1;
        PredicatePtr predicate = optimal_split_query(ds, correct, {"age"}, constraints);
        REQUIRE(predicate->kind == PredicateNode::Kind::Comparison);
        // ages are integers, so candidate thresholds sit at half-integers and
        // one step is 1.0
        CHECK(std::fabs(predicate->literal.number - 72.0) <= 1.0);
    }
}

TEST_CASE("achieved gap equals the exhaustive-threshold oracle on 100 random datasets") {
    Rng rng(8080);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 30 + static_cast<std::size_t>(rng.uniform_int(0, 170));
        const int n_features = 1 + static_cast<int>(rng.uniform_int(0, 2));
        std::vector<std::vector<double>> cols(n_features);
        std::vector<std::string> names;
        for (int f = 0; f < n_features; ++f) {
            names.push_back("x" + std::to_string(f));
            for (std::size_t i = 0; i < n; ++i)
                cols[f].push_back(static_cast<double>(rng.uniform_int(0, 30)));
        }
        std::vector<std::uint8_t> correct(n);
        for (std::size_t i = 0; i < n; ++i) correct[i] = rng.bernoulli(0.7);

        Dataset ds = numeric_dataset(cols, names);
        SplitConstraints constraints;
        constraints.min_group_size = 5;
        constraints.max_depth = 1;

        const double oracle = oracle_best_gap(ds, correct, names, constraints);
        try {
            PredicatePtr predicate = optimal_split_query(ds, correct, names, constraints);
            const double achieved = split_gap(ds, correct, predicate);
            CHECK(achieved == doctest::Approx(oracle).epsilon(1e-12));
        } catch (const NoValidSplitError&) {
            CHECK(oracle <= 0.0);
        }
    }
}

TEST_CASE("constant correctness yields no valid split") {
    Rng rng(4);
    std::vector<double> x;
    for (int i = 0; i < 200; ++i) x.push_back(static_cast<double>(rng.uniform_int(0, 50)));
    Dataset ds = numeric_dataset({x}, {"x"});
    std::vector<std::uint8_t> correct(200, 1);
    SplitConstraints constraints;
    constraints.min_group_size = 10;
    CHECK_THROWS_AS(optimal_split_query(ds, correct, {"x"}, constraints), NoValidSplitError);
}

TEST_CASE("an unsatisfiable minimum group size yields no valid split") {
    Rng rng(5);
    std::vector<double> x;
    std::vector<std::uint8_t> correct;
    for (int i = 0; i < 100; ++i) {
        x.push_back(static_cast<double>(i));
        correct.push_back(rng.bernoulli(0.5));
    }
    Dataset ds = numeric_dataset({x}, {"x"});
    SplitConstraints constraints;
    constraints.min_group_size = 60; // more than half of the data
    CHECK_THROWS_AS(optimal_split_query(ds, correct, {"x"}, constraints), NoValidSplitError);
}

TEST_CASE("returned slices respect the size constraints") {
    Rng rng(6);
    std::vector<double> x, z;
    std::vector<std::uint8_t> correct;
    for (int i = 0; i < 500; ++i) {
        x.push_back(static_cast<double>(rng.uniform_int(0, 99)));
        z.push_back(static_cast<double>(rng.uniform_int(0, 9)));
        correct.push_back(rng.bernoulli(x.back() < 30 ? 0.6 : 0.9));
    }
    Dataset ds = numeric_dataset({x, z}, {"x", "z"});
    SplitConstraints constraints;
    constraints.min_group_size = 40;
    constraints.max_group_size = 300;
    constraints.max_depth = 3;
    PredicatePtr predicate = optimal_split_query(ds, correct, {"x", "z"}, constraints);
    Slice slice = eval_predicate(predicate, ds);
    CHECK(slice.size() >= 40);
    CHECK(slice.size() <= 300);

    // determinism
    PredicatePtr again = optimal_split_query(ds, correct, {"x", "z"}, constraints);
    CHECK(render(predicate) == render(again));
}

TEST_CASE("deeper conjunctions win when the failure region is rectangular") {
    Rng rng(7);
    std::vector<double> x, z;
    std::vector<std::uint8_t> correct;
    for (int i = 0; i < 3000; ++i) {
        const double a = static_cast<double>(rng.uniform_int(0, 99));
        const double b = static_cast<double>(rng.uniform_int(0, 99));
        x.push_back(a);
        z.push_back(b);
        correct.push_back(rng.bernoulli(a >= 50 && b >= 50 ? 0.4 : 0.95));
    }
    Dataset ds = numeric_dataset({x, z}, {"x", "z"});
    SplitConstraints constraints;
    constraints.min_group_size = 100;
    constraints.max_depth = 2;
    PredicatePtr predicate = optimal_split_query(ds, correct, {"x", "z"}, constraints);
    CHECK(count_criteria(predicate) == 2);
    CHECK(split_gap(ds, correct, predicate) > 0.4);
}

TEST_CASE("categorical split isolates the bad category") {
    Rng rng(8);
    CategoricalColumn cat;
    cat.categories = {"A", "B", "C"};
    std::vector<std::uint8_t> correct;
    for (int i = 0; i < 900; ++i) {
        cat.codes.push_back(i % 3);
        correct.push_back(rng.bernoulli(i % 3 == 1 ? 0.5 : 0.9));
    }
    Dataset ds;
    ds.name = "cats";
    ds.columns.push_back({"ethnicity", ColumnKind::Categorical, std::move(cat)});
    SplitConstraints constraints;
    constraints.min_group_size = 50;
    PredicatePtr predicate = optimal_categorical_split(ds, correct, "ethnicity", constraints);
    CHECK(render(predicate) == "ethnicity in [\"B\"]");
}

TEST_CASE("categorical ties break to the lexicographically smaller rendering") {
    // with two values both singletons achieve the same |gap|; "left" renders
    // smaller than "right"
    CategoricalColumn cat;
    std::vector<std::uint8_t> correct;
    cat.categories = {"right", "left"};
    for (int i = 0; i < 200; ++i) {
        cat.codes.push_back(i % 2);
        const bool is_right = i % 2 == 0;
        correct.push_back(is_right ? (i % 10 != 0) : (i % 2 == 1 && i % 4 == 1));
    }
    Dataset ds;
    ds.name = "sym";
    ds.columns.push_back({"side", ColumnKind::Categorical, std::move(cat)});
    SplitConstraints constraints;
    constraints.min_group_size = 10;
    PredicatePtr predicate = optimal_categorical_split(ds, correct, "side", constraints, 1);
    CHECK(render(predicate) == "side in [\"left\"]");
}

TEST_CASE("subset enumeration counts match the binomial arithmetic") {
    CategoricalColumn cat;
    cat.categories = {"a", "b", "c", "d"};
    std::vector<std::uint8_t> correct;
    Rng rng(9);
    for (int i = 0; i < 400; ++i) {
        cat.codes.push_back(i % 4);
        correct.push_back(rng.bernoulli(i % 4 == 0 ? 0.5 : 0.9));
    }
    Dataset ds;
    ds.name = "counts";
    ds.columns.push_back({"k", ColumnKind::Categorical, std::move(cat)});
    SplitConstraints constraints;
    constraints.min_group_size = 10;

    std::size_t considered = 0;
    optimal_categorical_split(ds, correct, "k", constraints, 1, &considered);
    CHECK(considered == 4); // exactly k singletons
    optimal_categorical_split(ds, correct, "k", constraints, 2, &considered);
    CHECK(considered == 4 + 6);
    optimal_categorical_split(ds, correct, "k", constraints, 4, &considered);
    CHECK(considered == 4 + 6 + 4); // the full set is skipped
}

TEST_CASE("boolean features split as equality conditions") {
    BooleanColumn flag;
    std::vector<std::uint8_t> correct;
    Rng rng(10);
    for (int i = 0; i < 400; ++i) {
        flag.values.push_back(i % 2);
        correct.push_back(rng.bernoulli(i % 2 ? 0.55 : 0.95));
    }
    Dataset ds;
    ds.name = "flags";
    ds.columns.push_back({"flag", ColumnKind::Boolean, std::move(flag)});
    SplitConstraints constraints;
    constraints.min_group_size = 20;
    constraints.max_depth = 1;
    PredicatePtr predicate = optimal_split_query(ds, correct, {"flag"}, constraints);
    REQUIRE(predicate->kind == PredicateNode::Kind::Comparison);
    CHECK(predicate->op == CompareOp::Eq);
    CHECK(split_gap(ds, correct, predicate) > 0.3);
}
