#include "smart/audit.hpp"
#include "smart/baseline.hpp"
#include "smart/errors.hpp"
#include "smart/metrics.hpp"
#include "smart/splitter.hpp"
#include "smart/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace smart;

struct DataArgs {
    std::string data_path;
    std::string schema_path;
    std::string target;
    std::string pred_col;
    std::string pred_file;
    bool fit_model = false;
    double test_fraction = 0.5;
    std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.data_path, "input CSV (header row required)")->required();
    cmd->add_option("--schema", args.schema_path, "sidecar schema file (column=type lines)");
    cmd->add_option("--target", args.target, "target column name")->required();
    cmd->add_option("--pred-col", args.pred_col, "read predictions from this dataset column");
    cmd->add_option("--pred-file", args.pred_file,
                    "single-column CSV of predictions (header 'prediction')");
    cmd->add_flag("--fit-logistic", args.fit_model,
                  "fit the built-in logistic model on a train split");
    cmd->add_option("--test-fraction", args.test_fraction,
                    "held-out fraction used with --fit-logistic");
    cmd->add_option("--seed", args.seed, "random seed");
}

struct LoadedData {
    Dataset data; // evaluation rows
    std::vector<std::uint8_t> labels;
    Predictions predictions;
};

LoadedData load_for_evaluation(const DataArgs& args) {
    int sources = (!args.pred_col.empty()) + (!args.pred_file.empty()) + args.fit_model;
    if (sources != 1)
        throw ConfigError("exactly one of --pred-col, --pred-file, --fit-logistic is required");

    std::map<std::string, ColumnKind> overrides;
    if (!args.schema_path.empty()) {
        overrides = load_schema_overrides(args.schema_path);
    } else if (std::filesystem::exists(args.data_path + ".schema")) {
        overrides = load_schema_overrides(args.data_path + ".schema");
    }
    Dataset full = load_csv(args.data_path, args.target, overrides);

    LoadedData out;
    if (!args.pred_col.empty()) {
        out.predictions = predictions_from_column(full, args.pred_col);
        out.data = full;
        out.data.columns.erase(
            std::remove_if(out.data.columns.begin(), out.data.columns.end(),
                           [&](const Column& c) { return c.name == args.pred_col; }),
            out.data.columns.end());
    } else if (!args.pred_file.empty()) {
        out.predictions = load_predictions_file(args.pred_file, full.n_rows());
        out.data = std::move(full);
    } else {
        auto [train, test_half] = split(full, args.test_fraction, args.seed);
        LogisticModel model = fit_logistic(train, args.seed);
        out.data = std::move(test_half);
        out.predictions = predict(model, out.data);
    }
    out.labels = out.data.labels();
    return out;
}

std::string significance_mark(const SliceTestResult& r) {
    return r.significant ? "yes" : "no";
}

void print_results_table(const std::vector<SliceTestResult>& results, std::ostream& out) {
    out << "rank\tp_value\tdelta_acc\tgroup_size\tsignificant\tpredicate\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        char line[160];
        std::snprintf(line, sizeof(line), "%zu\t%.6f\t%.6f\t%zu\t%s\t", i + 1, r.p_value,
                      r.delta_acc, r.group_size, significance_mark(r).c_str());
        out << line << render(r.predicate) << "\n";
    }
}

int run_audit_command(const RunConfig& config) {
    AuditOutcome outcome = run_audit(config, nullptr, &std::cout);
    return outcome.exit_code;
}

int run_simulate(const std::string& experiment, int runs, std::uint64_t seed,
                 const std::string& out_path, int n_corrupted, std::size_t n_rows) {
    nlohmann::json doc;
    doc["experiment"] = experiment;
    doc["seed"] = seed;

    if (experiment == "fnr") {
        SynthConfig config;
        config.seed = seed;
        if (n_rows) config.n_rows = n_rows;
        FnrExperimentConfig ec;
        doc["settings"] = nlohmann::json::array();
        for (int n : (n_corrupted > 0 ? std::vector<int>{n_corrupted}
                                      : std::vector<int>{1, 2, 3})) {
            FnrResult r = run_fnr_experiment(n, runs > 0 ? runs : 20, config, ec);
            nlohmann::json row;
            row["n_corrupted"] = r.n_corrupted;
            row["smart_fnr_mean"] = r.smart_fnr_mean;
            row["smart_fnr_sd"] = r.smart_fnr_sd;
            row["baseline_fnr_mean"] = r.baseline_fnr_mean;
            row["baseline_fnr_sd"] = r.baseline_fnr_sd;
            doc["settings"].push_back(row);
            std::cout << "fnr n=" << r.n_corrupted << "  smart " << r.smart_fnr_mean << " +- "
                      << r.smart_fnr_sd << "  baseline " << r.baseline_fnr_mean << " +- "
                      << r.baseline_fnr_sd << "\n";
        }
    } else if (experiment == "bias") {
        SynthConfig config;
        config.seed = seed;
        config.n_rows = n_rows ? n_rows : 60000;
        config.delta1 = config.delta2 = config.delta3 = 1.0;
        BiasExperimentConfig ec;
        if (runs > 0) ec.runs_per_seed = runs;
        doc["cells"] = nlohmann::json::array();
        for (const BiasCell& cell :
             run_bias_experiment({0.0, 0.05, 0.2}, config, ec)) {
            nlohmann::json row;
            row["tau"] = cell.tau;
            row["corrupted"] = cell.corrupted;
            row["p_white_mean"] = cell.p_white_mean;
            row["p_white_sd"] = cell.p_white_sd;
            row["p_black_mean"] = cell.p_black_mean;
            row["p_black_sd"] = cell.p_black_sd;
            doc["cells"].push_back(row);
            std::cout << "bias tau=" << cell.tau << " corrupted=" << cell.corrupted << "  P_white "
                      << cell.p_white_mean << " +- " << cell.p_white_sd << "  P_black "
                      << cell.p_black_mean << " +- " << cell.p_black_sd << "\n";
        }
    } else if (experiment == "fp") {
        SynthConfig config;
        config.seed = seed;
        config.n_rows = n_rows ? n_rows : 2000;
        FpExperimentConfig ec;
        if (runs > 0) ec.runs = runs;
        doc["cells"] = nlohmann::json::array();
        for (const FpCell& cell : run_fp_experiment({4, 8}, config, ec)) {
            nlohmann::json row;
            row["k_irrelevant"] = cell.k_irrelevant;
            row["smart_fraction_mean"] = cell.smart_fraction_mean;
            row["baseline_fraction_mean"] = cell.baseline_fraction_mean;
            row["baseline_fraction_sd"] = cell.baseline_fraction_sd;
            doc["cells"].push_back(row);
            std::cout << "fp k=" << cell.k_irrelevant << "  smart " << cell.smart_fraction_mean
                      << "  baseline " << cell.baseline_fraction_mean << " +- "
                      << cell.baseline_fraction_sd << "\n";
        }
    } else if (experiment == "scenarios") {
        ScenarioExperimentConfig ec;
        if (runs > 0) ec.runs = runs;
        if (n_rows) ec.n_rows = n_rows;
        doc["cells"] = nlohmann::json::array();
        for (const ScenarioCell& cell : run_scenario_experiment(
                 {ScenarioKind::Uniform, ScenarioKind::Skewed, ScenarioKind::Interactions}, seed,
                 ec)) {
            nlohmann::json row;
            row["scenario"] = to_string(cell.kind);
            row["smart_slices_mean"] = cell.smart_slices_mean;
            row["smart_slices_sd"] = cell.smart_slices_sd;
            row["baseline_any_significant_fraction"] = cell.baseline_any_significant_fraction;
            row["baseline_slices_mean"] = cell.baseline_slices_mean;
            doc["cells"].push_back(row);
            std::cout << "scenario " << to_string(cell.kind) << "  smart "
                      << cell.smart_slices_mean << " +- " << cell.smart_slices_sd
                      << "  baseline any-significant " << cell.baseline_any_significant_fraction
                      << "\n";
        }
    } else {
        throw ConfigError("unknown experiment '" + experiment +
                          "' (expected fnr|bias|fp|scenarios)");
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw DataError("cannot write '" + out_path + "'");
        out << doc.dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMART: context-aware slice testing for tabular models"};
    app.require_subcommand(1);

    // ---- audit ----------------------------------------------------------------
    RunConfig audit_config;
    std::string correction_name = "bonferroni";
    auto* audit_cmd = app.add_subcommand("audit", "run the four-step audit pipeline");
    audit_cmd->add_option("--data", audit_config.data_path, "input CSV")->required();
    audit_cmd->add_option("--schema", audit_config.schema_path, "sidecar schema file");
    audit_cmd->add_option("--target", audit_config.target, "target column")->required();
    audit_cmd->add_option("--pred-col", audit_config.pred_col, "predictions column");
    audit_cmd->add_option("--pred-file", audit_config.pred_file, "predictions CSV file");
    audit_cmd->add_flag("--fit-logistic", audit_config.fit_logistic_model,
                        "fit the built-in logistic model");
    audit_cmd->add_option("--test-fraction", audit_config.test_fraction,
                          "held-out fraction with --fit-logistic");
    audit_cmd->add_option("--context", audit_config.context_text, "external context string");
    audit_cmd->add_option("--requirements", audit_config.requirements,
                          "free-text testing requirements");
    audit_cmd->add_option("--provider", audit_config.provider_kind,
                          "hypothesis provider: file|scripted|remote");
    audit_cmd->add_option("--hypotheses", audit_config.hypotheses_path,
                          "hypothesis file (JSONL) for --provider file");
    audit_cmd->add_option("--fixtures", audit_config.fixtures_path,
                          "scripted responses (JSON array) for --provider scripted");
    audit_cmd->add_option("--endpoint", audit_config.remote.endpoint_url,
                          "chat-completion endpoint URL");
    audit_cmd->add_option("--model", audit_config.remote.model_name, "remote model name");
    audit_cmd->add_option("--temperature", audit_config.remote.temperature,
                          "remote sampling temperature");
    audit_cmd->add_option("--alpha", audit_config.test.alpha, "significance level");
    audit_cmd->add_option("--correction", correction_name,
                          "multiple-testing correction: none|bonferroni");
    audit_cmd->add_option("--bootstrap-b", audit_config.test.bootstrap_b,
                          "bootstrap resample count");
    audit_cmd->add_option("--top-n", audit_config.test.top_n, "hypotheses retained after ranking");
    audit_cmd->add_option("--min-slice", audit_config.test.min_slice_size,
                          "minimum testable slice size");
    audit_cmd->add_flag("--vs-overall", audit_config.test.vs_overall,
                        "test slice against the whole dataset instead of its complement");
    audit_cmd->add_option("--n-hypotheses", audit_config.n_hypotheses,
                          "hypotheses requested from the provider");
    audit_cmd->add_option("--n-refine", audit_config.n_refine, "feasibility refinement rounds");
    audit_cmd->add_option("--adjust-iters", audit_config.adjust_max_iters,
                          "query adjustment attempts");
    audit_cmd->add_flag("!--no-feasibility", audit_config.run_feasibility,
                        "skip the feasibility gate");
    audit_cmd->add_flag("--nsf", audit_config.nsf, "no-self-falsification ablation");
    audit_cmd->add_flag("--data-driven-ops", audit_config.data_driven_ops,
                        "derive operationalizations from optimal data splits");
    audit_cmd->add_option("--min-group", audit_config.split_constraints.min_group_size,
                          "minimum slice size for data-driven splits");
    audit_cmd->add_option("--max-group", audit_config.split_constraints.max_group_size,
                          "maximum slice size for data-driven splits");
    audit_cmd->add_flag("--summarize", audit_config.summarize,
                        "append a provider-written recommendations section");
    audit_cmd->add_flag("--conventional-or", audit_config.conventional_or,
                        "add conventional odds-ratio columns");
    audit_cmd->add_flag("--strict", audit_config.strict,
                        "exit 5 when the run produces zero slices");
    audit_cmd->add_option("--seed", audit_config.seed, "random seed");
    audit_cmd->add_option("--out-dir", audit_config.out_dir,
                          "write report.md / report.jsonl / transcript.log here");
    audit_cmd->add_flag("-v,--verbose", audit_config.verbosity, "verbose logging");

    // ---- split ----------------------------------------------------------------
    DataArgs split_args;
    std::vector<std::string> split_features;
    SplitConstraints split_constraints;
    std::size_t split_max_subset = 3;
    auto* split_cmd =
        app.add_subcommand("split", "find the optimal data-driven split for given features");
    add_data_options(split_cmd, split_args);
    split_cmd->add_option("--features", split_features, "feature columns to split on")
        ->required()
        ->delimiter(',');
    split_cmd->add_option("--min-group", split_constraints.min_group_size, "minimum group size");
    split_cmd->add_option("--max-group", split_constraints.max_group_size, "maximum group size");
    split_cmd->add_option("--depth", split_constraints.max_depth, "maximum tree depth");
    split_cmd->add_option("--max-subset", split_max_subset,
                          "maximum value-subset size for categorical splits");

    // ---- baseline ---------------------------------------------------------------
    DataArgs baseline_args;
    BaselineConfig baseline_config;
    std::string baseline_correction = "none";
    bool use_beam = false;
    std::string baseline_out;
    auto* baseline_cmd =
        app.add_subcommand("baseline", "data-only slice search (exhaustive or beam)");
    add_data_options(baseline_cmd, baseline_args);
    baseline_cmd->add_option("--order", baseline_config.max_order, "max conjunction order");
    baseline_cmd->add_option("--bins", baseline_config.numeric_bins, "numeric quantile bins");
    baseline_cmd->add_flag("--use-beam", use_beam, "beam search instead of exhaustive");
    baseline_cmd->add_option("--beam", baseline_config.beam_width, "beam width");
    baseline_cmd->add_option("--top-k", baseline_config.top_k, "results to keep (0 = all)");
    baseline_cmd->add_option("--alpha", baseline_config.alpha, "significance level");
    baseline_cmd->add_option("--correction", baseline_correction, "none|bonferroni");
    baseline_cmd->add_option("--bootstrap-b", baseline_config.bootstrap_b, "bootstrap resamples");
    baseline_cmd->add_option("--min-slice", baseline_config.min_slice_size,
                             "minimum testable slice size");
    baseline_cmd->add_option("--out", baseline_out, "write results as JSON here");

    // ---- simulate ---------------------------------------------------------------
    std::string sim_experiment;
    int sim_runs = 0;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    int sim_n_corrupted = 0;
    std::size_t sim_n_rows = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "run a synthetic experiment");
    sim_cmd->add_option("--experiment", sim_experiment, "fnr|bias|fp|scenarios")->required();
    sim_cmd->add_option("--runs", sim_runs, "runs per setting");
    sim_cmd->add_option("--seed", sim_seed, "master seed");
    sim_cmd->add_option("--out", sim_out, "write machine-readable results JSON here");
    sim_cmd->add_option("--n-corrupted", sim_n_corrupted, "fnr: corrupted subgroup count");
    sim_cmd->add_option("--n-rows", sim_n_rows, "rows per generated dataset");

    // ---- metrics ----------------------------------------------------------------
    DataArgs metrics_args;
    std::string metrics_query;
    bool metrics_conventional = false;
    auto* metrics_cmd = app.add_subcommand("metrics", "report metrics for one slice query");
    add_data_options(metrics_cmd, metrics_args);
    metrics_cmd->add_option("--query", metrics_query, "slice predicate")->required();
    metrics_cmd->add_flag("--conventional-or", metrics_conventional,
                          "include conventional odds ratios");

    // ---- report -----------------------------------------------------------------
    std::string report_machine_path, report_out_path;
    auto* report_cmd =
        app.add_subcommand("report", "re-render a markdown report from a machine file");
    report_cmd->add_option("--machine", report_machine_path, "report.jsonl path")->required();
    report_cmd->add_option("--out", report_out_path, "output markdown path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return smart::kExitConfig;
    }

    try {
        if (*audit_cmd) {
            audit_config.test.correction = correction_name == "none" ? Correction::None
                                                                     : Correction::Bonferroni;
            if (correction_name != "none" && correction_name != "bonferroni")
                throw ConfigError("--correction must be none or bonferroni");
            return run_audit_command(audit_config);
        }
        if (*split_cmd) {
            LoadedData loaded = load_for_evaluation(split_args);
            std::vector<std::uint8_t> correctness(loaded.labels.size());
            for (std::size_t i = 0; i < correctness.size(); ++i)
                correctness[i] = loaded.predictions.values[i] == loaded.labels[i];

            PredicatePtr predicate;
            if (split_features.size() == 1 &&
                loaded.data.column(split_features[0]).kind == ColumnKind::Categorical) {
                predicate = optimal_categorical_split(loaded.data, correctness, split_features[0],
                                                      split_constraints, split_max_subset);
            } else {
                predicate = optimal_split_query(loaded.data, correctness, split_features,
                                                split_constraints);
            }
            std::cout << render(predicate) << "\n";
            std::cout << "gap: " << split_gap(loaded.data, correctness, predicate) << "\n";
            return 0;
        }
        if (*baseline_cmd) {
            baseline_config.correction = baseline_correction == "bonferroni"
                                             ? Correction::Bonferroni
                                             : Correction::None;
            if (baseline_correction != "none" && baseline_correction != "bonferroni")
                throw ConfigError("--correction must be none or bonferroni");
            baseline_config.seed = baseline_args.seed;
            LoadedData loaded = load_for_evaluation(baseline_args);
            BaselineResult result =
                use_beam ? beam_search(loaded.data, loaded.labels, loaded.predictions,
                                       baseline_config)
                         : exhaustive_search(loaded.data, loaded.labels, loaded.predictions,
                                             baseline_config);
            std::cout << "candidates: " << result.total_candidates
                      << "  tested: " << result.total_tested << "\n";
            print_results_table(result.results, std::cout);
            if (!baseline_out.empty()) {
                nlohmann::json doc;
                doc["total_candidates"] = result.total_candidates;
                doc["total_tested"] = result.total_tested;
                doc["results"] = nlohmann::json::array();
                for (const auto& r : result.results) {
                    nlohmann::json row;
                    row["predicate"] = render(r.predicate);
                    row["p_value_bootstrap"] = r.p_value;
                    row["delta_acc"] = r.delta_acc;
                    row["group_size"] = r.group_size;
                    row["significant"] = r.significant;
                    doc["results"].push_back(row);
                }
                std::ofstream out(baseline_out, std::ios::binary);
                if (!out) throw DataError("cannot write '" + baseline_out + "'");
                out << doc.dump(2) << "\n";
            }
            return 0;
        }
        if (*sim_cmd)
            return run_simulate(sim_experiment, sim_runs, sim_seed, sim_out, sim_n_corrupted,
                                sim_n_rows);
        if (*metrics_cmd) {
            LoadedData loaded = load_for_evaluation(metrics_args);
            PredicatePtr predicate = parse_predicate(metrics_query, loaded.data);
            Slice slice = eval_predicate(predicate, loaded.data);
            SliceMetrics m = slice_metrics(slice, loaded.data, loaded.labels, loaded.predictions);
            nlohmann::json doc;
            doc["query"] = render(predicate);
            doc["group_size"] = m.group_size;
            doc["support"] = m.support;
            doc["num_criteria"] = m.num_criteria;
            doc["outcome_diff"] = m.outcome_diff;
            doc["accuracy_diff"] = m.accuracy_diff;
            doc["odds_ratio_outcome"] =
                m.odds_ratio_outcome ? nlohmann::json(*m.odds_ratio_outcome) : nullptr;
            doc["odds_ratio_acc"] =
                m.odds_ratio_acc ? nlohmann::json(*m.odds_ratio_acc) : nullptr;
            doc["lift_outcome"] = m.lift_outcome ? nlohmann::json(*m.lift_outcome) : nullptr;
            doc["lift_acc"] = m.lift_acc ? nlohmann::json(*m.lift_acc) : nullptr;
            doc["weighted_relative_y"] = m.weighted_relative_y;
            doc["weighted_relative_acc"] = m.weighted_relative_acc;
            if (metrics_conventional) {
                doc["conventional_or_outcome"] =
                    m.conventional_or_outcome ? nlohmann::json(*m.conventional_or_outcome)
                                              : nullptr;
                doc["conventional_or_acc"] =
                    m.conventional_or_acc ? nlohmann::json(*m.conventional_or_acc) : nullptr;
            }
            std::cout << doc.dump(2) << "\n";
            return 0;
        }
        if (*report_cmd) {
            std::ifstream in(report_machine_path, std::ios::binary);
            if (!in) throw MissingFileError("cannot open '" + report_machine_path + "'");
            std::stringstream buffer;
            buffer << in.rdbuf();
            AuditReport report = parse_machine(buffer.str());
            const std::string markdown = render_markdown(report);
            if (report_out_path.empty()) {
                std::cout << markdown;
            } else {
                std::ofstream out(report_out_path, std::ios::binary);
                if (!out) throw DataError("cannot write '" + report_out_path + "'");
                out << markdown;
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return smart::kExitConfig;
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return smart::kExitProvider;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return smart::kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
