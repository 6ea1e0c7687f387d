#pragma once

#include "smart/dataset.hpp"
#include "smart/predicate.hpp"
#include "smart/provider.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smart {

struct Hypothesis {
    int id = 0;
    std::string text;
    std::string justification;
    std::optional<std::string> operationalization;
    std::string source = "scripted";
};

struct OperationalizedHypothesis {
    Hypothesis hypothesis;
    PredicatePtr predicate;
    std::string predicate_text; // canonical render
};

struct PromptBundle {
    std::string external_context;  // may be empty
    std::string data_context_text; // rendered DataContext
    int n_hypotheses = 5;
    std::string requirements; // free-text constraints, appended verbatim
};

std::string build_generation_prompt(const PromptBundle& bundle);

// Extracts (Hypothesis:, Justification:) pairs; tolerant of numbering and
// blank-line separators. At most expected_n, in document order.
std::vector<Hypothesis> parse_hypothesis_response(const std::string& response, int expected_n,
                                                  std::vector<std::string>* warnings = nullptr);

std::string build_operationalization_prompt(const std::vector<Hypothesis>& hypotheses,
                                            const DataContext& context);

// Accepts both the {index: "query"} map form and the prose
// "Operationalization:" form. Queries are normalized (&&/|| to and/or);
// validation against the schema is the caller's job (invalid entries go
// through adjust_query).
std::map<int, std::string> parse_operationalization_response(const std::string& response,
                                                             const Dataset& schema);

std::string normalize_query_text(const std::string& text);

bool feasibility_check(const DataContext& context, const std::string& task_prose,
                       HypothesisProvider& provider, int n_refine,
                       std::vector<std::string>* warnings = nullptr);

// Returns a predicate text that parses and selects at least one row,
// re-prompting the provider up to max_iters times. Throws AdjustmentFailure.
std::string adjust_query(const std::string& predicate_text, const Dataset& dataset,
                         HypothesisProvider& provider, int max_iters);

struct HypothesisStageResult {
    bool feasible = true;
    std::vector<OperationalizedHypothesis> operationalized;
    std::vector<Hypothesis> untestable; // no usable predicate after adjustment
    std::vector<std::string> warnings;
};

struct HypothesisStageConfig {
    int n_hypotheses = 5;
    int n_refine = 0;
    int adjust_max_iters = 2;
    bool run_feasibility = true;
    std::string task_prose;
    std::string external_context;
    std::string requirements;
};

// describe -> feasibility -> generation -> operationalization -> adjustment.
HypothesisStageResult run_hypothesis_stage(const Dataset& dataset,
                                           const HypothesisStageConfig& config,
                                           HypothesisProvider& provider);

} // namespace smart
