// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Runs hermetically (scripted providers, no network).

#include "smart/audit.hpp"
#include "smart/baseline.hpp"
#include "smart/errors.hpp"
#include "smart/falsify.hpp"
#include "smart/metrics.hpp"
#include "smart/splitter.hpp"
#include "smart/synth.hpp"

#include "query_testlib.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace smart;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void criterion(int number, const std::string& name, const std::function<bool(std::string&)>& fn) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %d. %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(), elapsed,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// ---- 1: family-wise error arithmetic and simulation ---------------------------

bool check_fwer(std::string& detail) {
    const double analytic = fwer_naive(20, 0.05);
    if (std::fabs(analytic - 0.6415) > 0.0005) {
        detail = "analytic fwer " + fmt(analytic);
        return false;
    }
    FwerSimulationResult sim = fwer_null_simulation(500, 20, 1000, 0.05, 1000, 20240601);
    detail = "analytic " + fmt(analytic) + ", uncorrected " + fmt(sim.empirical_uncorrected) +
             ", bonferroni " + fmt(sim.empirical_bonferroni);
    if (std::fabs(sim.empirical_uncorrected - analytic) > 0.06) return false;
    if (sim.empirical_bonferroni > 0.07) return false;
    return true;
}

// ---- 2: false negative rates on planted corruptions ---------------------------

bool check_fnr(std::string& detail) {
    SynthConfig config;
    config.n_rows = 5000;
    config.seed = 1337;
    config.corruption_p = 0.5;
    FnrExperimentConfig experiment; // bonferroni on both sides, B=500

    FnrResult r1 = run_fnr_experiment(1, 20, config, experiment);
    FnrResult r2 = run_fnr_experiment(2, 20, config, experiment);
    FnrResult r3 = run_fnr_experiment(3, 20, config, experiment);
    detail = "smart fnr " + fmt(r1.smart_fnr_mean) + " / " + fmt(r2.smart_fnr_mean) + " / " +
             fmt(r3.smart_fnr_mean) + ", baseline " + fmt(r1.baseline_fnr_mean) + " / " +
             fmt(r2.baseline_fnr_mean) + " / " + fmt(r3.baseline_fnr_mean);
    if (r1.smart_fnr_mean > 0.05) return false;
    if (!(r2.smart_fnr_mean < r2.baseline_fnr_mean)) return false;
    if (!(r3.smart_fnr_mean < r3.baseline_fnr_mean)) return false;
    return true;
}

// ---- 3: corrupted-minority identification across tau --------------------------

bool check_bias(std::string& detail) {
    SynthConfig config;
    config.seed = 4242;
    config.n_rows = 60000;
    config.delta1 = config.delta2 = config.delta3 = 1.0;
    BiasExperimentConfig experiment; // 20 runs x 5 seeds
    experiment.bootstrap_b = 400;

    std::vector<BiasCell> cells = run_bias_experiment({0.0, 0.05, 0.2}, config, experiment);
    std::ostringstream msg;
    bool ok = true;
    for (const BiasCell& cell : cells) {
        msg << "tau=" << cell.tau << "/" << cell.corrupted << " Pw=" << fmt(cell.p_white_mean)
            << " Pb=" << fmt(cell.p_black_mean) << "; ";
        if (cell.tau == 0.0) {
            if (cell.p_white_mean > 0.5 || cell.p_black_mean > 0.5) ok = false;
        } else if (cell.corrupted == "white") {
            if (cell.p_white_mean < 0.90) ok = false;
        } else if (cell.corrupted == "black") {
            if (cell.p_black_mean < 0.90) ok = false;
        }
    }
    detail = msg.str();
    return ok;
}

// ---- 4: irrelevant features stay out of context-guided slices ------------------

bool check_fp(std::string& detail) {
    SynthConfig config;
    config.seed = 777;
    config.n_rows = 2000;
    FpExperimentConfig experiment;

    std::vector<FpCell> cells = run_fp_experiment({4, 8}, config, experiment);
    std::ostringstream msg;
    bool ok = true;
    for (const FpCell& cell : cells) {
        msg << "k=" << cell.k_irrelevant << " smart " << fmt(cell.smart_fraction_mean)
            << " baseline " << fmt(cell.baseline_fraction_mean) << "; ";
        if (cell.smart_fraction_mean != 0.0) ok = false;
        if (!(cell.baseline_fraction_mean > 0.10)) ok = false;
    }
    // the baseline's contamination grows with the number of irrelevant columns
    if (!(cells.back().baseline_fraction_mean > cells.front().baseline_fraction_mean)) ok = false;
    detail = msg.str();
    return ok;
}

// ---- 5: no-relationship scenarios --------------------------------------------

bool check_scenarios(std::string& detail) {
    ScenarioExperimentConfig experiment; // 50 runs, n=2000
    std::vector<ScenarioCell> cells = run_scenario_experiment(
        {ScenarioKind::Uniform, ScenarioKind::Skewed, ScenarioKind::Interactions}, 97, experiment);
    std::ostringstream msg;
    bool ok = true;
    for (const ScenarioCell& cell : cells) {
        msg << to_string(cell.kind) << ": smart " << fmt(cell.smart_slices_mean) << "+-"
            << fmt(cell.smart_slices_sd) << ", baseline any " << fmt(cell.baseline_any_significant_fraction)
            << "; ";
        if (cell.smart_slices_mean != 0.0 || cell.smart_slices_sd != 0.0) ok = false;
        if (cell.baseline_any_significant_fraction < 0.80) ok = false;
    }
    detail = msg.str();
    return ok;
}

// ---- 6: splitter equals the exhaustive-threshold oracle ------------------------

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

bool check_splitter(std::string& detail) {
    Rng rng(606060);
    int equal = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 30 + static_cast<std::size_t>(rng.uniform_int(0, 170));
        const int n_features = 1 + static_cast<int>(rng.uniform_int(0, 2));
        Dataset ds;
        ds.name = "oracle";
        std::vector<std::string> names;
        for (int f = 0; f < n_features; ++f) {
            NumericColumn col;
            for (std::size_t i = 0; i < n; ++i)
                col.values.push_back(static_cast<double>(rng.uniform_int(0, 30)));
            names.push_back("x" + std::to_string(f));
            ds.columns.push_back({names.back(), ColumnKind::Numeric, std::move(col)});
        }
        std::vector<std::uint8_t> correct(n);
        for (std::size_t i = 0; i < n; ++i) correct[i] = rng.bernoulli(0.7);

        SplitConstraints constraints;
        constraints.min_group_size = 5;
        constraints.max_depth = 1;
        const double oracle = oracle_best_gap(ds, correct, names, constraints);
        try {
            PredicatePtr predicate = optimal_split_query(ds, correct, names, constraints);
            if (split_gap(ds, correct, predicate) == oracle) ++equal;
        } catch (const NoValidSplitError&) {
            if (oracle <= 0.0) ++equal;
        }
    }

    int recovered = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng plant_rng(7100 + seed);
        Dataset ds;
        ds.name = "plant";
        NumericColumn age;
        std::vector<std::uint8_t> correct;
        for (int i = 0; i < 8000; ++i) {
            const double a = static_cast<double>(plant_rng.uniform_int(18, 90));
            age.values.push_back(a);
            correct.push_back(plant_rng.bernoulli(a >= 72.0 ? 0.5 : 0.95));
        }
        ds.columns.push_back({"age", ColumnKind::Numeric, std::move(age)});
        SplitConstraints constraints;
        constraints.min_group_size = 400;
        constraints.max_depth = 1;
        PredicatePtr predicate = optimal_split_query(ds, correct, {"age"}, constraints);
        if (predicate->kind == PredicateNode::Kind::Comparison &&
            std::fabs(predicate->literal.number - 72.0) <= 1.0)
            ++recovered;
    }

    detail = "oracle equality " + std::to_string(equal) + "/100, planted recovery " +
             std::to_string(recovered) + "/20";
    return equal == 100 && recovered == 20;
}

// ---- 7: report metric fidelity -------------------------------------------------

bool check_metrics(std::string& detail) {
    // slice accuracy 0.9, rest accuracy 0.5: the report formula gives 0.36
    Dataset ds;
    ds.name = "fidelity";
    NumericColumn x;
    for (int i = 0; i < 1000; ++i) x.values.push_back(static_cast<double>(i));
    ds.columns.push_back({"x", ColumnKind::Numeric, std::move(x)});

    std::vector<std::uint8_t> labels(1000, 0);
    Predictions preds;
    preds.values.assign(1000, 0);
    Slice slice;
    slice.predicate = parse_predicate_text("x < 310");
    for (int i = 0; i < 310; ++i) slice.row_indices.push_back(i);
    // slice: 200 positives, 279 correct (0.9); rest: 215 positives, 345 correct (0.5)
    for (int i = 0; i < 310; ++i) {
        labels[i] = i < 200;
        preds.values[i] = (i < 279) ? labels[i] : 1 - labels[i];
    }
    for (int i = 310; i < 1000; ++i) {
        labels[i] = (i - 310) < 215;
        preds.values[i] = ((i - 310) < 345) ? labels[i] : 1 - labels[i];
    }
    SliceMetrics m = slice_metrics(slice, ds, labels, preds);

    if (!m.odds_ratio_acc) {
        detail = "odds ratio undefined";
        return false;
    }
    const double acc_or = *m.odds_ratio_acc;
    if (std::fabs(m.acc_slice - 0.9) > 1e-12 || std::fabs(m.acc_rest - 0.5) > 1e-12 ||
        std::fabs(acc_or - 0.36) > 1e-12) {
        detail = "odds_ratio(0.9, 0.5) = " + fmt(acc_or);
        return false;
    }

    // lift is exactly one when slice and dataset rates agree
    Dataset ds_eq = ds;
    std::vector<std::uint8_t> labels_eq(1000, 0);
    Predictions preds_eq;
    preds_eq.values.assign(1000, 0);
    for (int i = 0; i < 1000; ++i) {
        const bool correct = i % 2 == 0; // same rate inside and outside
        preds_eq.values[i] = correct ? 0 : 1;
    }
    Slice half;
    half.predicate = parse_predicate_text("x < 500");
    for (int i = 0; i < 500; ++i) half.row_indices.push_back(i);
    SliceMetrics m_eq = slice_metrics(half, ds_eq, labels_eq, preds_eq);
    if (!m_eq.lift_acc || std::fabs(*m_eq.lift_acc - 1.0) > 1e-12) {
        detail = "lift at equality != 1";
        return false;
    }

    // support 0.31 with outcome diff 0.23: weighted value renders as 0.07
    const double weighted = m.weighted_relative_y;
    const double full_precision = m.support * (m.outcome_slice - m.outcome_dataset);
    char rendered[16];
    std::snprintf(rendered, sizeof(rendered), "%.2f", weighted);
    detail = "odds_ratio " + fmt(acc_or) + ", weighted_relative_y " + fmt(weighted) +
             " rendered " + rendered;
    if (weighted != full_precision) return false;
    if (std::fabs(weighted - 0.0713) > 0.005) return false;
    if (std::string(rendered) != "0.07") return false;
    return true;
}

// ---- 8: parser and evaluator properties ----------------------------------------

bool check_parser(std::string& detail) {
    Rng rng(10101);
    Dataset gen_ds = testlib::random_dataset(rng);
    for (int i = 0; i < 1000; ++i) {
        PredicatePtr ast = testlib::random_ast(rng, gen_ds, 3);
        PredicatePtr reparsed = parse_predicate(render(ast), gen_ds);
        if (!structurally_equal(ast, reparsed)) {
            detail = "round-trip failed on " + render(ast);
            return false;
        }
    }
    for (int i = 0; i < 1000; ++i) {
        Dataset ds = testlib::random_dataset(rng);
        PredicatePtr ast = testlib::random_ast(rng, ds, 3);
        Slice slice = eval_predicate(ast, ds);
        std::vector<std::size_t> expected;
        for (std::size_t row = 0; row < ds.n_rows(); ++row)
            if (testlib::naive_row_eval(ast, ds, row)) expected.push_back(row);
        if (slice.row_indices != expected) {
            detail = "oracle mismatch on " + render(ast);
            return false;
        }
    }

    // every operationalization string the audit reports exercise
    Dataset schema;
    schema.name = "paper_schema";
    for (const char* name : {"age", "comorbidities", "treatment_conservative_management",
                             "num_of_prev_attempts", "gleason_score", "prostate_specific_antigen",
                             "X", "Y", "studied_credits"}) {
        NumericColumn col;
        col.values = {1, 2, 3};
        schema.columns.push_back({name, ColumnKind::Numeric, std::move(col)});
    }
    for (const char* name : {"disability", "imd_band", "highest_education", "region", "gender"}) {
        CategoricalColumn col;
        col.categories = {"Y", "N", "0-30%", "Lower Than A Level", "No Formal quals",
                          "North Region", "Wales", "M", "F"};
        col.codes = {0, 1, 2};
        schema.columns.push_back({name, ColumnKind::Categorical, std::move(col)});
    }
    const char* queries[] = {
        "age >= 72",
        "comorbidities >= 2",
        "treatment_conservative_management == 1",
        "age > 75",
        "prostate_specific_antigen < 10",
        "comorbidities > 2",
        "gleason_score == 4",
        "disability == \"Y\"",
        "imd_band in [\"0-30%\"]",
        "highest_education in [\"Lower Than A Level\", \"No Formal quals\"]",
        "num_of_prev_attempts > 1",
        "region in [\"North Region\", \"Wales\"]",
        "(X > 45) and (Y < 20)",
        "X > 45",
    };
    int parsed = 0;
    for (const char* q : queries) {
        parse_predicate(q, schema);
        ++parsed;
    }
    detail = "2000 property cases, " + std::to_string(parsed) + " report strings";
    return true;
}

// ---- 9: hermetic golden audit ---------------------------------------------------

bool check_golden(std::string& detail) {
    const char* cli = std::getenv("SMART_CLI");
    if (!cli) {
        detail = "SMART_CLI not set";
        return false;
    }
    const fs::path dir = fs::temp_directory_path() / "smart_acceptance_golden";
    fs::remove_all(dir);
    fs::create_directories(dir);

    SynthConfig config;
    config.n_rows = 2000;
    config.seed = 31415;
    Dataset ds = gen_recidivism(config);
    const std::string data_csv = (dir / "recidivism.csv").string();
    write_csv(ds, data_csv);

    nlohmann::json responses = nlohmann::json::array();
    responses.push_back("Age, income and education plausibly shape the model's error surface.");
    responses.push_back("yes");
    responses.push_back(
        "Hypothesis 1: The model performs worse for older individuals.\n"
        "Justification: The outcome grows rare with age, thinning the decision boundary.\n\n"
        "Hypothesis 2: The model performs worse for the low income group.\n"
        "Justification: Income correlates with unmodeled factors.\n\n"
        "Hypothesis 3: The model performs worse for people with tertiary education.\n"
        "Justification: A small and atypical subgroup.\n");
    responses.push_back(
        "{0: 'age > 55', 1: 'income == \"low\"', 2: 'education == \"high\"'}");
    const std::string fixtures = (dir / "fixtures.json").string();
    std::ofstream(fixtures) << responses.dump(2);

    auto run_once = [&](const std::string& out_dir, const std::string& env) {
        const std::string cmd = env + std::string(cli) + " audit --data " + data_csv +
                                " --target recidivism --fit-logistic --provider scripted" +
                                " --fixtures " + fixtures +
                                " --n-hypotheses 3 --bootstrap-b 400 --seed 11 --out-dir " +
                                out_dir + " > " + out_dir + ".log 2>&1";
        return std::system(cmd.c_str());
    };

    if (run_once((dir / "a").string(), "") != 0) {
        detail = "first run failed: " + slurp((dir / "a").string() + ".log");
        return false;
    }
    if (run_once((dir / "b").string(), "") != 0 ||
        run_once((dir / "c").string(), "OMP_NUM_THREADS=1 ") != 0) {
        detail = "repeat runs failed";
        return false;
    }

    const std::string md_a = slurp((dir / "a" / "report.md").string());
    const std::string md_b = slurp((dir / "b" / "report.md").string());
    const std::string md_c = slurp((dir / "c" / "report.md").string());
    const std::string js_a = slurp((dir / "a" / "report.jsonl").string());
    const std::string js_b = slurp((dir / "b" / "report.jsonl").string());
    const std::string js_c = slurp((dir / "c" / "report.jsonl").string());
    if (md_a.empty() || js_a.empty()) {
        detail = "empty reports";
        return false;
    }
    if (md_a != md_b || js_a != js_b) {
        detail = "repeat run differs";
        return false;
    }
    if (md_a != md_c || js_a != js_c) {
        detail = "single-thread run differs";
        return false;
    }

    // in-process: a scripted audit leaves an injected transport untouched
    struct CanaryTransport : Transport {
        bool touched = false;
        HttpResponse post(const std::string&,
                          const std::vector<std::pair<std::string, std::string>>&,
                          const std::string&, std::chrono::milliseconds) override {
            touched = true;
            return {500, "unexpected network call"};
        }
    };
    struct ForwardingTransport : Transport {
        explicit ForwardingTransport(Transport* inner) : inner(inner) {}
        Transport* inner;
        HttpResponse post(const std::string& url,
                          const std::vector<std::pair<std::string, std::string>>& headers,
                          const std::string& body, std::chrono::milliseconds timeout) override {
            return inner->post(url, headers, body, timeout);
        }
    };
    RunConfig run_config;
    run_config.data_path = data_csv;
    run_config.target = "recidivism";
    run_config.fit_logistic_model = true;
    run_config.provider_kind = "scripted";
    run_config.fixtures_path = fixtures;
    run_config.n_hypotheses = 3;
    run_config.test.bootstrap_b = 400;
    run_config.seed = 11;
    run_config.verbosity = -1;
    CanaryTransport canary;
    auto provider =
        make_provider(run_config, std::make_unique<ForwardingTransport>(&canary));
    AuditOutcome outcome = run_audit(run_config, std::move(provider));
    if (canary.touched) {
        detail = "scripted audit performed a network call";
        return false;
    }
    detail = "3 runs byte-identical, " + std::to_string(outcome.report.rows.size()) +
             " slices, zero network calls";
    return outcome.exit_code == kExitOk;
}

} // namespace

int main() {
    std::printf("SMART acceptance suite\n");
#ifdef _OPENMP
    std::printf("(openmp enabled)\n");
#endif
    std::printf("\n");

    criterion(1, "family-wise error arithmetic and null simulation", check_fwer);
    criterion(2, "false negative rate on planted subgroup corruptions", check_fnr);
    criterion(3, "corrupted minority identified across tau", check_bias);
    criterion(4, "irrelevant features excluded from context-guided slices", check_fp);
    criterion(5, "no-relationship scenarios yield zero slices", check_scenarios);
    criterion(6, "splitter matches the exhaustive-threshold oracle", check_splitter);
    criterion(7, "report metric formulas reproduce hand-derived values", check_metrics);
    criterion(8, "query language round-trip and evaluator oracle properties", check_parser);
    criterion(9, "hermetic golden audit, serial/parallel byte-identical", check_golden);

    std::printf("\n%s (%d failed)\n", failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT",
                failures);
    return failures == 0 ? 0 : 1;
}
