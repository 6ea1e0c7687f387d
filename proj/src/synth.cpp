#include "smart/synth.hpp"

#include "smart/errors.hpp"
#include "smart/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace smart {

void SynthConfig::validate() const {
    if (n_rows < 1) throw ConfigError("n_rows must be >= 1");
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    for (double p : {corruption_p, tau, bernoulli_q})
        if (p < 0.0 || p > 1.0) throw ConfigError("probabilities must lie in [0,1]");
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Column make_categorical(std::string name, std::vector<std::string> categories,
                        std::vector<std::int32_t> codes) {
    Column col;
    col.name = std::move(name);
    col.kind = ColumnKind::Categorical;
    CategoricalColumn data;
    data.categories = std::move(categories);
    data.codes = std::move(codes);
    col.data = std::move(data);
    return col;
}

Column make_numeric(std::string name, std::vector<double> values) {
    Column col;
    col.name = std::move(name);
    col.kind = ColumnKind::Numeric;
    col.data = NumericColumn{std::move(values)};
    return col;
}

} // namespace

Dataset gen_recidivism(const SynthConfig& config) {
    config.validate();
    const std::size_t n = config.n_rows;

    const std::vector<std::string> genders{"male", "female"};
    const std::vector<std::string> races{"white", "black", "other"};
    const std::vector<std::string> levels{"low", "medium", "high"};

    std::vector<std::int32_t> gender(n), race(n), income(n), education(n);
    std::vector<double> age(n), target(n);

    // Logit encodings: age centered at 44 and scaled to two units per standard
    // deviation, ordinal levels coded {-2, 0, 2}. At the default coefficients
    // (0.5 each, unit noise) a fitted logistic model lands at ~0.72 training
    // accuracy, so planted corruptions are detectable but not trivial.
    const double age_mean = 44.0;
    const double age_half_sd = 7.65;

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(config.seed, 0x9ec1d, i));
        gender[i] = static_cast<std::int32_t>(rng.uniform_int(0, 1));
        race[i] = static_cast<std::int32_t>(rng.uniform_int(0, 2));
        age[i] = static_cast<double>(rng.uniform_int(18, 70));
        income[i] = static_cast<std::int32_t>(rng.uniform_int(0, 2));
        education[i] = static_cast<std::int32_t>(rng.uniform_int(0, 2));

        const double noise = rng.normal(config.noise_mu, config.noise_sigma);
        const double logit = config.intercept -
                             (config.delta1 * (age[i] - age_mean) / age_half_sd +
                              config.delta2 * static_cast<double>(2 * (income[i] - 1)) +
                              config.delta3 * static_cast<double>(2 * (education[i] - 1))) +
                             noise;
        target[i] = rng.bernoulli(sigmoid(logit)) ? 1.0 : 0.0;
    }

    Dataset ds;
    ds.name = "recidivism_synth";
    ds.columns.push_back(make_categorical("gender", genders, std::move(gender)));
    ds.columns.push_back(make_categorical("race", races, std::move(race)));
    ds.columns.push_back(make_numeric("age", std::move(age)));
    ds.columns.push_back(make_categorical("income", levels, std::move(income)));
    ds.columns.push_back(make_categorical("education", levels, std::move(education)));
    ds.columns.push_back(make_numeric("recidivism", std::move(target)));
    ds.target_column = "recidivism";
    return ds;
}

Dataset add_irrelevant_features(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw ConfigError("add_irrelevant_features requires k >= 1");
    Dataset out = dataset;
    const std::size_t n = dataset.n_rows();
    const double categorical_probs[4] = {0.1, 0.3, 0.4, 0.2};
    const std::vector<std::string> categories{"a", "b", "c", "d"};

    for (std::size_t j = 0; j < k; ++j) {
        Rng rng(derive_seed(seed, 0x1e7e7, j));
        const bool is_categorical = rng.bernoulli(0.5);

        std::string name = "synth_irrelevant_" + std::to_string(j + 1);
        while (out.has_column(name)) name += "_x";

        if (is_categorical) {
            std::vector<std::int32_t> codes(n);
            for (std::size_t i = 0; i < n; ++i)
                codes[i] = rng.categorical(categorical_probs, 4);
            out.columns.push_back(make_categorical(std::move(name), categories, std::move(codes)));
        } else {
            std::vector<double> values(n);
            for (std::size_t i = 0; i < n; ++i) values[i] = rng.bernoulli(0.1) ? 1.0 : 0.0;
            out.columns.push_back(make_numeric(std::move(name), std::move(values)));
        }
    }
    return out;
}

ScenarioKind scenario_kind_from_string(const std::string& text) {
    if (text == "uniform") return ScenarioKind::Uniform;
    if (text == "skewed") return ScenarioKind::Skewed;
    if (text == "interactions") return ScenarioKind::Interactions;
    throw ConfigError("unknown scenario '" + text + "' (expected uniform|skewed|interactions)");
}

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Uniform: return "uniform";
        case ScenarioKind::Skewed: return "skewed";
        case ScenarioKind::Interactions: return "interactions";
    }
    return "?";
}

Dataset gen_scenario(ScenarioKind kind, std::size_t n_rows, std::uint64_t seed) {
    if (n_rows < 1) throw ConfigError("n_rows must be >= 1");
    const double rainfall_probs[4] = {0.1, 0.3, 0.4, 0.2};

    std::vector<double> n_runs(n_rows), m_pref(n_rows), a_rainfall(n_rows), f_color(n_rows),
        p_season(n_rows), music_hap(n_rows), run_hap(n_rows), y(n_rows);

    for (std::size_t i = 0; i < n_rows; ++i) {
        Rng rng(derive_seed(seed, 0x5ce9a, i));
        switch (kind) {
            case ScenarioKind::Uniform:
                n_runs[i] = static_cast<double>(rng.uniform_int(1, 499));
                m_pref[i] = static_cast<double>(rng.uniform_int(1, 5));
                a_rainfall[i] = static_cast<double>(rng.uniform_int(20000, 99999));
                f_color[i] = static_cast<double>(rng.uniform_int(1, 6));
                p_season[i] = static_cast<double>(rng.uniform_int(0, 3));
                break;
            case ScenarioKind::Skewed:
                n_runs[i] = static_cast<double>(rng.uniform_int(1, 499));
                m_pref[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
                a_rainfall[i] = static_cast<double>(rng.categorical(rainfall_probs, 4) + 1);
                f_color[i] = rng.bernoulli(0.1) ? 1.0 : 0.0;
                p_season[i] = rng.bernoulli(0.05) ? 1.0 : 0.0;
                break;
            case ScenarioKind::Interactions:
                n_runs[i] = static_cast<double>(rng.uniform_int(1, 499));
                m_pref[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
                a_rainfall[i] = static_cast<double>(rng.categorical(rainfall_probs, 4) + 1);
                music_hap[i] = m_pref[i] * a_rainfall[i];
                run_hap[i] = n_runs[i] * m_pref[i];
                break;
        }
        y[i] = static_cast<double>(rng.uniform_int(0, 1));
    }

    Dataset ds;
    ds.name = "scenario_" + to_string(kind);
    ds.columns.push_back(make_numeric("N_runs", std::move(n_runs)));
    ds.columns.push_back(make_numeric("M_pref", std::move(m_pref)));
    ds.columns.push_back(make_numeric("A_rainfall", std::move(a_rainfall)));
    if (kind == ScenarioKind::Interactions) {
        ds.columns.push_back(make_numeric("A_music_hap", std::move(music_hap)));
        ds.columns.push_back(make_numeric("A_run_hap", std::move(run_hap)));
    } else {
        ds.columns.push_back(make_numeric("F_color", std::move(f_color)));
        ds.columns.push_back(make_numeric("P_season", std::move(p_season)));
    }
    ds.columns.push_back(make_numeric("Y", std::move(y)));
    ds.target_column = "Y";
    return ds;
}

// ---- experiment harnesses -----------------------------------------------------

namespace {

double column_median(const Dataset& dataset, const std::string& name) {
    auto sorted = std::get<NumericColumn>(dataset.column(name).data).values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (xs.size() - 1))};
}

// Independent runs in parallel; the first exception is carried out of the
// omp region and rethrown.
template <typename Fn>
void parallel_runs(int runs, Fn&& body) {
    std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int run = 0; run < runs; ++run) {
        try {
            body(run);
        } catch (...) {
#pragma omp critical
            {
                if (!error) error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace

std::vector<CovariateSubgroup> covariate_subgroups(const Dataset& dataset, std::uint64_t seed) {
    std::vector<CovariateSubgroup> subgroups;
    Rng rng(derive_seed(seed, 0x5b6));
    for (const Column& col : dataset.columns) {
        if (dataset.target_column && col.name == *dataset.target_column) continue;
        switch (col.kind) {
            case ColumnKind::Categorical: {
                const auto& c = std::get<CategoricalColumn>(col.data);
                CovariateSubgroup sg;
                sg.column = col.name;
                sg.value = c.categories[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(c.categories.size()) - 1))];
                sg.query = col.name + " == \"" + sg.value + "\"";
                subgroups.push_back(std::move(sg));
                break;
            }
            case ColumnKind::Boolean: {
                CovariateSubgroup sg;
                sg.column = col.name;
                const bool v = rng.bernoulli(0.5);
                sg.value = v ? "1" : "0";
                sg.query = col.name + " == " + (v ? "1" : "0");
                subgroups.push_back(std::move(sg));
                break;
            }
            case ColumnKind::Numeric: {
                CovariateSubgroup sg;
                sg.column = col.name;
                sg.query = col.name + " > " + format_double(column_median(dataset, col.name));
                subgroups.push_back(std::move(sg));
                break;
            }
        }
    }
    return subgroups;
}

std::vector<CovariateSubgroup> demographic_subgroups(const Dataset& dataset) {
    std::vector<CovariateSubgroup> subgroups;
    for (const char* column : {"race", "gender"}) {
        const auto& c = std::get<CategoricalColumn>(dataset.column(column).data);
        for (const auto& value : c.categories) {
            if (std::string(column) == "race" && value == "other") continue;
            CovariateSubgroup sg;
            sg.column = column;
            sg.value = value;
            sg.query = std::string(column) + " == \"" + value + "\"";
            subgroups.push_back(std::move(sg));
        }
    }
    return subgroups;
}

std::unique_ptr<HypothesisProvider> make_subgroup_provider(
    const std::vector<CovariateSubgroup>& subgroups) {
    std::ostringstream generation;
    for (std::size_t i = 0; i < subgroups.size(); ++i) {
        generation << "Hypothesis " << i + 1 << ": The model will perform worse than average on "
                   << "the subgroup defined by " << subgroups[i].query << ".\n"
                   << "Justification: The " << subgroups[i].column
                   << " covariate plausibly separates a group the model serves poorly.\n\n";
    }
    std::ostringstream ops;
    ops << "{";
    for (std::size_t i = 0; i < subgroups.size(); ++i) {
        if (i) ops << ", ";
        ops << i << ": '" << subgroups[i].query << "'";
    }
    ops << "}";
    return std::make_unique<ScriptedProvider>(std::vector<std::string>{
        "Several of the listed covariates plausibly relate to the outcome; subgroup "
        "underperformance is worth testing.",
        "yes",
        generation.str(),
        ops.str(),
    });
}

std::unique_ptr<HypothesisProvider> make_infeasible_provider() {
    return std::make_unique<ScriptedProvider>(std::vector<std::string>{
        "None of the listed covariates could plausibly relate to the outcome; no relationships "
        "could plausibly exist between them.",
        "no",
    });
}

namespace {

struct PipelineRun {
    std::vector<SliceTestResult> results;
};

// Full pipeline on an already corrupted prediction vector: hypothesis stage
// with the given provider, then falsification.
PipelineRun run_pipeline(const Dataset& dataset, const Predictions& predictions,
                         HypothesisProvider& provider, double alpha, int bootstrap_b,
                         std::uint64_t seed, int top_n) {
    HypothesisStageConfig stage_config;
    stage_config.n_hypotheses = 16;
    stage_config.run_feasibility = true;
    stage_config.adjust_max_iters = 1;
    stage_config.task_prose = "Find subgroups where the predictive model underperforms.";

    HypothesisStageResult stage = run_hypothesis_stage(dataset, stage_config, provider);
    PipelineRun run;
    if (!stage.feasible) return run;

    TestConfig test_config;
    test_config.alpha = alpha;
    test_config.correction = Correction::Bonferroni;
    test_config.bootstrap_b = bootstrap_b;
    test_config.top_n = top_n;
    test_config.seed = seed;
    run.results = run_falsification(stage.operationalized, dataset, dataset.labels(), predictions,
                                    test_config);
    return run;
}

bool any_result_references(const std::vector<SliceTestResult>& results,
                           const CovariateSubgroup& subgroup, bool significant_only) {
    for (const auto& r : results) {
        if (significant_only && !r.significant) continue;
        if (references_column_value(r.predicate, subgroup.column, subgroup.value)) return true;
    }
    return false;
}

} // namespace

FnrResult run_fnr_experiment(int n_corrupted, int runs, const SynthConfig& config,
                             const FnrExperimentConfig& experiment,
                             const ProviderFactory& factory) {
    if (n_corrupted < 1 || n_corrupted > 5)
        throw ConfigError("n_corrupted must lie in {1..5}");
    config.validate();

    FnrResult result;
    result.n_corrupted = n_corrupted;
    result.smart_per_run.resize(runs);
    result.baseline_per_run.resize(runs);

    parallel_runs(runs, [&](int run) {
        const std::uint64_t run_seed = derive_seed(config.seed, 0xf49, run);
        SynthConfig run_config = config;
        run_config.seed = run_seed;
        const Dataset data = gen_recidivism(run_config);
        const std::vector<std::uint8_t> labels = data.labels();

        LogisticModel model = fit_logistic(data, run_seed, experiment.fit_epochs,
                                           experiment.fit_learning_rate);
        Predictions preds = predict(model, data);

        std::vector<CovariateSubgroup> subgroups = covariate_subgroups(data, run_seed);

        // corrupt a random subset of the candidate subgroups
        std::vector<std::size_t> order(subgroups.size());
        std::iota(order.begin(), order.end(), 0);
        Rng pick(derive_seed(run_seed, 0x9));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(
                pick.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        order.resize(static_cast<std::size_t>(n_corrupted));

        Predictions corrupted = preds;
        for (std::size_t idx : order) {
            Slice slice = eval_predicate(parse_predicate(subgroups[idx].query, data), data);
            corrupted = corrupt_on_slice(corrupted, slice, config.corruption_p,
                                         config.bernoulli_q, derive_seed(run_seed, 0xc, idx));
        }

        auto provider = factory ? factory(data, subgroups) : make_subgroup_provider(subgroups);
        PipelineRun smart = run_pipeline(data, corrupted, *provider, experiment.alpha,
                                         experiment.bootstrap_b, run_seed,
                                         static_cast<int>(subgroups.size()));

        BaselineConfig baseline_config;
        baseline_config.max_order = experiment.baseline_max_order;
        baseline_config.numeric_bins = experiment.baseline_bins;
        baseline_config.alpha = experiment.alpha;
        baseline_config.correction = Correction::Bonferroni;
        baseline_config.bootstrap_b = experiment.bootstrap_b;
        baseline_config.seed = run_seed;
        baseline_config.top_k = 0; // keep everything; detection scans all results
        BaselineResult baseline = exhaustive_search(data, labels, corrupted, baseline_config);

        int smart_missed = 0, baseline_missed = 0;
        for (std::size_t idx : order) {
            if (!any_result_references(smart.results, subgroups[idx], true)) ++smart_missed;
            if (!any_result_references(baseline.results, subgroups[idx], true)) ++baseline_missed;
        }
        result.smart_per_run[run] = static_cast<double>(smart_missed) / n_corrupted;
        result.baseline_per_run[run] = static_cast<double>(baseline_missed) / n_corrupted;
    });

    std::tie(result.smart_fnr_mean, result.smart_fnr_sd) = mean_sd(result.smart_per_run);
    std::tie(result.baseline_fnr_mean, result.baseline_fnr_sd) =
        mean_sd(result.baseline_per_run);
    return result;
}

std::vector<BiasCell> run_bias_experiment(const std::vector<double>& tau_grid,
                                          const SynthConfig& config,
                                          const BiasExperimentConfig& experiment) {
    config.validate();
    std::vector<BiasCell> cells;

    for (double tau : tau_grid) {
        const std::vector<std::string> corrupted_groups =
            tau == 0.0 ? std::vector<std::string>{"none"}
                       : std::vector<std::string>{"white", "black"};
        for (const std::string& corrupted : corrupted_groups) {
            std::vector<double> p_white_per_seed, p_black_per_seed;
            const std::uint64_t eth_id = corrupted == "black" ? 2 : corrupted == "white" ? 1 : 0;
            for (int s = 0; s < experiment.seeds; ++s) {
                std::vector<int> white_hits(experiment.runs_per_seed, 0);
                std::vector<int> black_hits(experiment.runs_per_seed, 0);

                parallel_runs(experiment.runs_per_seed, [&](int run) {
                    const std::uint64_t run_seed = derive_seed(
                        config.seed, {0xb1a5, static_cast<std::uint64_t>(tau * 1000), eth_id,
                                      static_cast<std::uint64_t>(s),
                                      static_cast<std::uint64_t>(run)});
                    SynthConfig run_config = config;
                    run_config.seed = run_seed;
                    const Dataset data = gen_recidivism(run_config);

                    LogisticModel model = fit_logistic(data, run_seed, experiment.fit_epochs,
                                                       experiment.fit_learning_rate);
                    Predictions preds = predict(model, data);

                    if (tau > 0.0) {
                        Slice slice = eval_predicate(
                            parse_predicate("race == \"" + corrupted + "\"", data), data);
                        preds = corrupt_proportion(preds, slice, tau, derive_seed(run_seed, 0xcc));
                    }

                    std::vector<CovariateSubgroup> subgroups = demographic_subgroups(data);
                    auto provider = make_subgroup_provider(subgroups);
                    PipelineRun smart =
                        run_pipeline(data, preds, *provider, experiment.alpha,
                                     experiment.bootstrap_b, run_seed,
                                     static_cast<int>(subgroups.size()));
                    if (smart.results.empty()) return;
                    const SliceTestResult& top = smart.results.front();
                    if (references_column_value(top.predicate, "race", "white"))
                        white_hits[run] = 1;
                    if (references_column_value(top.predicate, "race", "black"))
                        black_hits[run] = 1;
                });

                p_white_per_seed.push_back(
                    std::accumulate(white_hits.begin(), white_hits.end(), 0.0) /
                    experiment.runs_per_seed);
                p_black_per_seed.push_back(
                    std::accumulate(black_hits.begin(), black_hits.end(), 0.0) /
                    experiment.runs_per_seed);
            }

            BiasCell cell;
            cell.tau = tau;
            cell.corrupted = corrupted;
            std::tie(cell.p_white_mean, cell.p_white_sd) = mean_sd(p_white_per_seed);
            std::tie(cell.p_black_mean, cell.p_black_sd) = mean_sd(p_black_per_seed);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

namespace {

// counts (all, synthetic) condition atoms over the significant results
std::pair<int, int> count_conditions(const std::vector<SliceTestResult>& results,
                                     bool significant_only) {
    int total = 0, synthetic = 0;
    for (const auto& r : results) {
        if (significant_only && !r.significant) continue;
        for (const auto& col : referenced_columns(r.predicate)) {
            ++total;
            if (col.rfind("synth_irrelevant_", 0) == 0) ++synthetic;
        }
    }
    return {total, synthetic};
}

} // namespace

std::vector<FpCell> run_fp_experiment(const std::vector<std::size_t>& k_values,
                                      const SynthConfig& config,
                                      const FpExperimentConfig& experiment) {
    config.validate();
    std::vector<FpCell> cells;

    for (std::size_t k : k_values) {
        std::vector<double> smart_fracs(experiment.runs), baseline_fracs(experiment.runs);

        parallel_runs(experiment.runs, [&](int run) {
            const std::uint64_t run_seed =
                derive_seed(config.seed, {0xf9, k, static_cast<std::uint64_t>(run)});
            SynthConfig run_config = config;
            run_config.seed = run_seed;
            Dataset data = gen_recidivism(run_config);
            data = add_irrelevant_features(data, k, derive_seed(run_seed, 0x1));
            const std::vector<std::uint8_t> labels = data.labels();

            LogisticModel model = fit_logistic(data, run_seed, experiment.fit_epochs,
                                               experiment.fit_learning_rate);
            Predictions preds = predict(model, data);

            // context-aware stand-in proposes only the real covariates
            std::vector<CovariateSubgroup> subgroups;
            for (const auto& sg : covariate_subgroups(data, run_seed))
                if (sg.column.rfind("synth_irrelevant_", 0) != 0) subgroups.push_back(sg);

            auto provider = make_subgroup_provider(subgroups);
            PipelineRun smart = run_pipeline(data, preds, *provider, experiment.alpha,
                                             experiment.bootstrap_b, run_seed,
                                             static_cast<int>(subgroups.size()));
            auto [smart_total, smart_synth] = count_conditions(smart.results, true);
            smart_fracs[run] =
                smart_total == 0 ? 0.0 : static_cast<double>(smart_synth) / smart_total;

            BaselineConfig baseline_config;
            baseline_config.max_order = experiment.baseline_max_order;
            baseline_config.numeric_bins = experiment.baseline_bins;
            baseline_config.alpha = experiment.alpha;
            baseline_config.correction = Correction::None;
            baseline_config.bootstrap_b = experiment.bootstrap_b;
            baseline_config.seed = run_seed;
            baseline_config.top_k = 0;
            BaselineResult baseline = exhaustive_search(data, labels, preds, baseline_config);
            auto [base_total, base_synth] = count_conditions(baseline.results, true);
            baseline_fracs[run] =
                base_total == 0 ? 0.0 : static_cast<double>(base_synth) / base_total;
        });

        FpCell cell;
        cell.k_irrelevant = k;
        cell.smart_fraction_mean = mean_sd(smart_fracs).first;
        std::tie(cell.baseline_fraction_mean, cell.baseline_fraction_sd) =
            mean_sd(baseline_fracs);
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::vector<ScenarioCell> run_scenario_experiment(const std::vector<ScenarioKind>& kinds,
                                                  std::uint64_t seed,
                                                  const ScenarioExperimentConfig& experiment) {
    std::vector<ScenarioCell> cells;
    for (ScenarioKind kind : kinds) {
        std::vector<double> smart_counts(experiment.runs), baseline_counts(experiment.runs);
        std::vector<int> baseline_any(experiment.runs, 0);

        parallel_runs(experiment.runs, [&](int run) {
            const std::uint64_t run_seed =
                derive_seed(seed, {0x5c0, static_cast<std::uint64_t>(kind),
                                   static_cast<std::uint64_t>(run)});
            Dataset data = gen_scenario(kind, experiment.n_rows, run_seed);
            auto [train, test] = split(data, 0.5, run_seed);

            LogisticModel model = fit_logistic(train, run_seed, experiment.fit_epochs,
                                               experiment.fit_learning_rate);
            Predictions preds = predict(model, test);
            const std::vector<std::uint8_t> labels = test.labels();

            auto provider = make_infeasible_provider();
            PipelineRun smart = run_pipeline(test, preds, *provider, experiment.alpha,
                                             experiment.bootstrap_b, run_seed, 20);
            smart_counts[run] = static_cast<double>(smart.results.size());

            BaselineConfig baseline_config;
            baseline_config.max_order = experiment.baseline_max_order;
            baseline_config.numeric_bins = experiment.baseline_bins;
            baseline_config.alpha = experiment.alpha;
            baseline_config.correction = Correction::None;
            baseline_config.bootstrap_b = experiment.bootstrap_b;
            baseline_config.seed = run_seed;
            baseline_config.top_k = 0;
            BaselineResult baseline = exhaustive_search(test, labels, preds, baseline_config);
            int significant = 0;
            for (const auto& r : baseline.results) significant += r.significant;
            baseline_counts[run] = significant;
            baseline_any[run] = significant > 0;
        });

        ScenarioCell cell;
        cell.kind = kind;
        std::tie(cell.smart_slices_mean, cell.smart_slices_sd) = mean_sd(smart_counts);
        cell.baseline_slices_mean = mean_sd(baseline_counts).first;
        cell.baseline_any_significant_fraction =
            std::accumulate(baseline_any.begin(), baseline_any.end(), 0.0) / experiment.runs;
        cells.push_back(std::move(cell));
    }
    return cells;
}

FwerSimulationResult fwer_null_simulation(int trials, int m_slices, std::size_t n_rows,
                                          double alpha, int bootstrap_b, std::uint64_t seed) {
    if (trials < 1 || m_slices < 1) throw ConfigError("trials and m_slices must be positive");
    FwerSimulationResult out;
    out.analytic = fwer_naive(m_slices, alpha);
    const double bonferroni_alpha = alpha / m_slices;

    std::vector<int> any_uncorrected(trials, 0), any_bonferroni(trials, 0);

    parallel_runs(trials, [&](int trial) {
        const std::uint64_t trial_seed = derive_seed(seed, 0xf3e9, trial);
        // independent boolean features; correctness independent of all of them
        std::vector<std::vector<std::uint8_t>> features(
            m_slices, std::vector<std::uint8_t>(n_rows));
        std::vector<std::uint8_t> labels(n_rows), preds(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i) {
            Rng rng(derive_seed(trial_seed, 0xda7a, i));
            for (int f = 0; f < m_slices; ++f) features[f][i] = rng.bernoulli(0.5);
            labels[i] = rng.bernoulli(0.5);
            preds[i] = rng.bernoulli(0.8) ? labels[i] : 1 - labels[i];
        }
        Predictions predictions;
        predictions.values = preds;

        bool hit_uncorrected = false, hit_bonferroni = false;
        for (int f = 0; f < m_slices; ++f) {
            Slice slice;
            for (std::size_t i = 0; i < n_rows; ++i)
                if (features[f][i]) slice.row_indices.push_back(i);
            if (slice.size() < 10 || slice.size() >= n_rows) continue;

            TestConfig config;
            config.alpha = alpha;
            config.correction = Correction::None;
            config.bootstrap_b = bootstrap_b;
            config.seed = trial_seed;
            SliceTestResult r = test_slice(slice, labels, predictions, config, f);
            if (r.p_value < alpha) hit_uncorrected = true;
            if (r.p_value < bonferroni_alpha) hit_bonferroni = true;
        }
        any_uncorrected[trial] = hit_uncorrected;
        any_bonferroni[trial] = hit_bonferroni;
    });

    out.empirical_uncorrected =
        std::accumulate(any_uncorrected.begin(), any_uncorrected.end(), 0.0) / trials;
    out.empirical_bonferroni =
        std::accumulate(any_bonferroni.begin(), any_bonferroni.end(), 0.0) / trials;
    return out;
}

} // namespace smart
