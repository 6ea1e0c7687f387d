#pragma once

#include "smart/baseline.hpp"
#include "smart/dataset.hpp"
#include "smart/falsify.hpp"
#include "smart/hypothesis.hpp"
#include "smart/model.hpp"
#include "smart/provider.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace smart {

struct SynthConfig {
    std::size_t n_rows = 5000;
    std::uint64_t seed = 0;
    // recidivism logit: intercept - (d1*age_z + d2*income + d3*education) + noise
    double delta1 = 0.5;
    double delta2 = 0.5;
    double delta3 = 0.5;
    double intercept = 0.0;
    double noise_mu = 0.0;
    double noise_sigma = 1.0;
    // corruption knobs
    double corruption_p = 0.5;
    double tau = 0.0;
    double bernoulli_q = 0.5;

    void validate() const;
};

// Five covariates (gender, race, age, income, education) and a binary
// recidivism target drawn from the logit model above.
Dataset gen_recidivism(const SynthConfig& config);

// Appends k columns named synth_irrelevant_<i>; a fair coin picks
// Bernoulli(0.1) or Categorical(0.1, 0.3, 0.4, 0.2) per column.
Dataset add_irrelevant_features(const Dataset& dataset, std::size_t k, std::uint64_t seed);

enum class ScenarioKind { Uniform, Skewed, Interactions };

ScenarioKind scenario_kind_from_string(const std::string& text);
std::string to_string(ScenarioKind kind);

// The three no-relationship DGPs; target column is Y.
Dataset gen_scenario(ScenarioKind kind, std::size_t n_rows, std::uint64_t seed);

// ---- experiment harnesses -----------------------------------------------------

// One candidate subgroup per covariate: a seeded category pick for
// categoricals, above-median for numerics.
struct CovariateSubgroup {
    std::string column;
    std::string value; // empty for numeric above-median subgroups
    std::string query;
};

std::vector<CovariateSubgroup> covariate_subgroups(const Dataset& dataset, std::uint64_t seed);

// The ethnicity-bias probe's hypothesis set: every race and gender value as
// its own slice. These covariates sit outside the outcome model, so none of
// them carries a real performance gap to confound a planted corruption.
std::vector<CovariateSubgroup> demographic_subgroups(const Dataset& dataset);

// Scripted provider whose generation/operationalization responses enumerate
// exactly the given subgroups (the hermetic stand-in for a context-aware
// hypothesis source), preceded by an affirmative feasibility exchange.
std::unique_ptr<HypothesisProvider> make_subgroup_provider(
    const std::vector<CovariateSubgroup>& subgroups);

// Scripted provider that declares testing infeasible.
std::unique_ptr<HypothesisProvider> make_infeasible_provider();

using ProviderFactory = std::function<std::unique_ptr<HypothesisProvider>(
    const Dataset& dataset, const std::vector<CovariateSubgroup>& subgroups)>;

struct FnrExperimentConfig {
    int bootstrap_b = 500;
    double alpha = 0.05;
    int baseline_max_order = 2;
    int baseline_bins = 10;
    int fit_epochs = 200;
    double fit_learning_rate = 0.5;
};

struct FnrResult {
    int n_corrupted = 0;
    double smart_fnr_mean = 0.0;
    double smart_fnr_sd = 0.0;
    double baseline_fnr_mean = 0.0;
    double baseline_fnr_sd = 0.0;
    std::vector<double> smart_per_run;
    std::vector<double> baseline_per_run;
};

// Corrupts n_corrupted of the five covariate subgroups per run and measures
// the fraction the pipeline misses. Both the pipeline and the data-only
// baseline run Bonferroni-corrected tests.
FnrResult run_fnr_experiment(int n_corrupted, int runs, const SynthConfig& config,
                             const FnrExperimentConfig& experiment,
                             const ProviderFactory& factory = {});

struct BiasCell {
    double tau = 0.0;
    std::string corrupted; // "white" or "black"
    double p_white_mean = 0.0, p_white_sd = 0.0;
    double p_black_mean = 0.0, p_black_sd = 0.0;
};

struct BiasExperimentConfig {
    int runs_per_seed = 20;
    int seeds = 5;
    int bootstrap_b = 300;
    double alpha = 0.05;
    int fit_epochs = 150;
    double fit_learning_rate = 0.5;
};

// Per tau and per corrupted ethnicity: how often the top-ranked slice
// references each ethnicity. tau = 0 runs once with no corruption.
std::vector<BiasCell> run_bias_experiment(const std::vector<double>& tau_grid,
                                          const SynthConfig& config,
                                          const BiasExperimentConfig& experiment);

struct FpCell {
    std::size_t k_irrelevant = 0;
    double smart_fraction_mean = 0.0;   // slice conditions touching synthetic columns
    double baseline_fraction_mean = 0.0;
    double baseline_fraction_sd = 0.0;
};

struct FpExperimentConfig {
    int runs = 20;
    int bootstrap_b = 300;
    double alpha = 0.05;
    int baseline_max_order = 2;
    int baseline_bins = 10;
    int fit_epochs = 200;
    double fit_learning_rate = 0.5;
};

std::vector<FpCell> run_fp_experiment(const std::vector<std::size_t>& k_values,
                                      const SynthConfig& config,
                                      const FpExperimentConfig& experiment);

struct ScenarioCell {
    ScenarioKind kind;
    double smart_slices_mean = 0.0;
    double smart_slices_sd = 0.0;
    double baseline_any_significant_fraction = 0.0; // runs with >= 1 significant slice
    double baseline_slices_mean = 0.0;
};

struct ScenarioExperimentConfig {
    int runs = 50;
    std::size_t n_rows = 2000;
    int bootstrap_b = 200;
    double alpha = 0.05;
    int baseline_max_order = 2;
    int baseline_bins = 20;
    int fit_epochs = 150;
    double fit_learning_rate = 0.5;
};

std::vector<ScenarioCell> run_scenario_experiment(const std::vector<ScenarioKind>& kinds,
                                                  std::uint64_t seed,
                                                  const ScenarioExperimentConfig& experiment);

struct FwerSimulationResult {
    double analytic = 0.0;               // 1 - (1-alpha)^m
    double empirical_uncorrected = 0.0;  // share of trials with any p < alpha
    double empirical_bonferroni = 0.0;   // share of trials with any p < alpha/m
};

// Null data, m independent single-feature slices per trial.
FwerSimulationResult fwer_null_simulation(int trials, int m_slices, std::size_t n_rows,
                                          double alpha, int bootstrap_b, std::uint64_t seed);

} // namespace smart
