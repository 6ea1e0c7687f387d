#include "smart/audit.hpp"

#include "smart/errors.hpp"
#include "smart/metrics.hpp"
#include "smart/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace smart {

void RunConfig::validate() const {
    if (data_path.empty()) throw ConfigError("--data is required");
    if (target.empty()) throw ConfigError("--target is required");

    int sources = 0;
    if (!pred_col.empty()) ++sources;
    if (!pred_file.empty()) ++sources;
    if (fit_logistic_model) ++sources;
    if (sources != 1)
        throw ConfigError("exactly one predictions source is required: "
                          "--pred-col, --pred-file, or --fit-logistic");

    if (provider_kind != "file" && provider_kind != "scripted" && provider_kind != "remote")
        throw ConfigError("provider must be one of file|scripted|remote");
    if (provider_kind == "file" && hypotheses_path.empty())
        throw ConfigError("--hypotheses is required with --provider file");
    if (provider_kind == "scripted" && fixtures_path.empty())
        throw ConfigError("--fixtures is required with --provider scripted");
    if (provider_kind == "remote") remote.validate();

    if (n_hypotheses < 1) throw ConfigError("--n-hypotheses must be >= 1");
    test.validate();
}

std::unique_ptr<HypothesisProvider> make_provider(const RunConfig& config,
                                                  std::unique_ptr<Transport> transport) {
    if (config.provider_kind == "file")
        return std::make_unique<FileProvider>(load_hypothesis_file(config.hypotheses_path));
    if (config.provider_kind == "scripted")
        return std::make_unique<ScriptedProvider>(load_fixture_file(config.fixtures_path));
    if (!transport) transport = make_http_transport();
    return std::make_unique<RemoteProvider>(config.remote, std::move(transport));
}

namespace {

Dataset drop_column(const Dataset& dataset, const std::string& name) {
    Dataset out = dataset;
    out.columns.erase(std::remove_if(out.columns.begin(), out.columns.end(),
                                     [&name](const Column& c) { return c.name == name; }),
                      out.columns.end());
    return out;
}

// --data-driven-ops: derive the predicate from the columns the hypothesis
// talks about, using the splitter on the correctness vector.
PredicatePtr data_driven_predicate(const OperationalizedHypothesis& hyp, const Dataset& dataset,
                                   const std::vector<std::uint8_t>& correctness,
                                   const SplitConstraints& constraints) {
    std::vector<std::string> mentioned = referenced_columns(hyp.predicate);
    if (mentioned.empty()) return nullptr;
    const Column& first = dataset.column(mentioned.front());
    try {
        if (first.kind == ColumnKind::Categorical)
            return optimal_categorical_split(dataset, correctness, first.name, constraints);
        std::vector<std::string> usable;
        for (const auto& name : mentioned)
            if (dataset.column(name).kind != ColumnKind::Categorical) usable.push_back(name);
        if (usable.empty()) return nullptr;
        return optimal_split_query(dataset, correctness, usable, constraints);
    } catch (const NoValidSplitError&) {
        return nullptr;
    }
}

std::string fixed_str(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

} // namespace

AuditOutcome run_audit(const RunConfig& config,
                       std::unique_ptr<HypothesisProvider> provider_override,
                       std::ostream* log) {
    config.validate();

    // load + type the data
    std::map<std::string, ColumnKind> overrides;
    if (!config.schema_path.empty()) {
        overrides = load_schema_overrides(config.schema_path);
    } else {
        const std::string sidecar = config.data_path + ".schema";
        if (std::filesystem::exists(sidecar)) overrides = load_schema_overrides(sidecar);
    }
    Dataset full = load_csv(config.data_path, config.target, overrides);
    if (log && config.verbosity > 0)
        *log << "loaded " << full.n_rows() << " rows x " << full.n_cols() << " columns from "
             << config.data_path << "\n";

    // predictions + falsification split
    Dataset eval_data;
    Predictions predictions;
    if (!config.pred_col.empty()) {
        predictions = predictions_from_column(full, config.pred_col);
        eval_data = drop_column(full, config.pred_col);
    } else if (!config.pred_file.empty()) {
        predictions = load_predictions_file(config.pred_file, full.n_rows());
        eval_data = full;
    } else {
        auto [train, test_half] = split(full, config.test_fraction, config.seed);
        LogisticModel model =
            fit_logistic(train, config.seed, config.fit_epochs, config.fit_learning_rate);
        eval_data = std::move(test_half);
        predictions = predict(model, eval_data);
    }
    const std::vector<std::uint8_t> labels = eval_data.labels();

    std::unique_ptr<HypothesisProvider> provider =
        provider_override ? std::move(provider_override) : make_provider(config);

    // hypothesis stage
    HypothesisStageConfig stage_config;
    stage_config.n_hypotheses = config.n_hypotheses;
    if (auto* file_provider = dynamic_cast<FileProvider*>(provider.get()))
        stage_config.n_hypotheses = std::max<int>(
            stage_config.n_hypotheses, static_cast<int>(file_provider->records().size()));
    stage_config.n_refine = config.n_refine;
    stage_config.adjust_max_iters = config.adjust_max_iters;
    stage_config.run_feasibility = config.run_feasibility;
    stage_config.task_prose = config.context_text;
    stage_config.external_context = config.context_text;
    stage_config.requirements = config.requirements;
    HypothesisStageResult stage = run_hypothesis_stage(eval_data, stage_config, *provider);

    AuditOutcome outcome;
    AuditReport& report = outcome.report;
    report.feasible = stage.feasible;
    report.nsf = config.nsf;
    report.warnings = stage.warnings;

    report.run_config = {
        {"dataset", full.name},
        {"rows_total", std::to_string(full.n_rows())},
        {"rows_evaluated", std::to_string(eval_data.n_rows())},
        {"target", config.target},
        {"predictions", !config.pred_col.empty()
                            ? "column:" + config.pred_col
                            : !config.pred_file.empty() ? "file:" + config.pred_file
                                                        : "builtin logistic model"},
        {"provider", provider->kind_name()},
        {"alpha", fixed_str(config.test.alpha, 4)},
        {"correction", to_string(config.test.correction)},
        {"bootstrap_b", std::to_string(config.test.bootstrap_b)},
        {"top_n", std::to_string(config.test.top_n)},
        {"seed", std::to_string(config.seed)},
        {"mode", config.nsf ? "nsf" : "full"},
    };

    if (stage.feasible) {
        // optional data-driven re-operationalization
        std::vector<OperationalizedHypothesis> hypotheses = stage.operationalized;
        if (config.data_driven_ops) {
            std::vector<std::uint8_t> correctness(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i)
                correctness[i] = predictions.values[i] == labels[i];
            for (auto& hyp : hypotheses) {
                PredicatePtr derived = data_driven_predicate(hyp, eval_data, correctness,
                                                             config.split_constraints);
                if (derived) {
                    hyp.predicate = derived;
                    hyp.predicate_text = render(derived);
                    hyp.hypothesis.operationalization = hyp.predicate_text;
                } else {
                    report.warnings.push_back("no data-driven split for hypothesis " +
                                              std::to_string(hyp.hypothesis.id) +
                                              "; keeping the provider operationalization");
                }
            }
        }

        TestConfig test_config = config.test;
        test_config.seed = config.seed;
        std::vector<SliceTestResult> results =
            config.nsf ? smart_nsf_rank(hypotheses, eval_data, labels, predictions)
                       : run_falsification(hypotheses, eval_data, labels, predictions,
                                           test_config);

        for (const auto& r : results) {
            const OperationalizedHypothesis* hyp = nullptr;
            for (const auto& h : hypotheses)
                if (h.hypothesis.id == r.hypothesis_id) hyp = &h;

            HypothesisRow row;
            row.hypothesis_id = r.hypothesis_id;
            if (hyp) {
                row.hypothesis = hyp->hypothesis.text;
                row.justification = hyp->hypothesis.justification;
                row.operationalization = hyp->predicate_text;
            }
            row.group_size = r.group_size;
            row.p_value = r.p_value;
            row.adjusted_alpha = r.adjusted_alpha;
            row.delta_acc = r.delta_acc;
            row.acc_slice = r.acc_slice;
            row.acc_rest = r.acc_rest;
            row.acc_overall = r.acc_overall;
            row.significant = r.significant;
            row.evidence = r.evidence;
            report.rows.push_back(std::move(row));

            if (r.predicate && r.group_size > 0 && r.group_size < eval_data.n_rows()) {
                Slice slice = eval_predicate(r.predicate, eval_data);
                report.metrics.push_back(slice_metrics(slice, eval_data, labels, predictions));
            }
        }
    }

    if (config.summarize) summarize_with_provider(report, *provider);

    report.transcript_digest = transcript_digest(provider->transcript());
    report.transcript_calls = provider->call_count();

    if (!config.out_dir.empty())
        outcome.paths = write_report(report, config.out_dir, &provider->transcript(),
                                     config.conventional_or);

    if (log && config.verbosity >= 0) {
        *log << render_markdown(report, config.conventional_or);
    }

    outcome.exit_code =
        config.strict && report.rows.empty() ? kExitNoSlicesStrict : kExitOk;
    return outcome;
}

} // namespace smart
