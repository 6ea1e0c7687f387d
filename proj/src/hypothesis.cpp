#include "smart/hypothesis.hpp"

#include "smart/errors.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace smart {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

// Matches "Hypothesis", "Hypothesis 3", "hypothesis #2" ... followed by ':'.
// Returns the text after the colon, or nullopt.
std::optional<std::string> after_label(const std::string& line, const std::string& label) {
    std::string low = lower(line);
    std::string lab = lower(label);
    if (low.rfind(lab, 0) != 0) return std::nullopt;
    std::size_t pos = lab.size();
    while (pos < line.size() &&
           (std::isspace(static_cast<unsigned char>(line[pos])) || line[pos] == '#' ||
            std::isdigit(static_cast<unsigned char>(line[pos]))))
        ++pos;
    if (pos >= line.size() || line[pos] != ':') return std::nullopt;
    return trim(line.substr(pos + 1));
}

} // namespace

std::string build_generation_prompt(const PromptBundle& bundle) {
    if (bundle.n_hypotheses < 1) throw ConfigError("n_hypotheses must be >= 1");
    std::ostringstream out;
    out << "Your task is to propose possible hypotheses as to which subgroups within the dataset "
           "might have worse predictive performance than on average because of societal bias in "
           "the dataset, insufficient data, other relationships, or others. The subgroups might "
           "be based on any of the provided characteristics, as well as on any combination of "
           "such characteristics.\n\n";
    if (!bundle.external_context.empty())
        out << "Dataset information: " << bundle.external_context << "\n\n";
    out << bundle.data_context_text << "\n\n";
    if (!bundle.requirements.empty()) out << "Requirements: " << bundle.requirements << "\n\n";
    out << "Task: Create " << bundle.n_hypotheses
        << " hypotheses as to which subgroups within the dataset the model will perform worse "
           "than on average because of societal biases or other reasons. Important: Your "
           "hypothesis can contain either one variable or two variables in the condition. "
           "Therefore, your goal is to find discrepancies in the model's performance, not the "
           "underlying data outcomes. Justify why you think that for each of the "
        << bundle.n_hypotheses
        << " hypotheses. Format of the output: Hypothesis: <>; Justification: <>.";
    return out.str();
}

std::vector<Hypothesis> parse_hypothesis_response(const std::string& response, int expected_n,
                                                  std::vector<std::string>* warnings) {
    std::vector<Hypothesis> hypotheses;
    std::istringstream in(response);
    std::string line;

    std::optional<std::string> cur_text;
    std::string cur_just;
    bool in_justification = false;

    auto flush = [&]() {
        if (!cur_text) return;
        if (cur_just.empty()) {
            if (warnings)
                warnings->push_back("skipping hypothesis without justification: '" + *cur_text +
                                    "'");
        } else if (cur_text->empty()) {
            if (warnings) warnings->push_back("skipping entry with empty hypothesis text");
        } else {
            Hypothesis h;
            h.id = static_cast<int>(hypotheses.size());
            h.text = *cur_text;
            h.justification = trim(cur_just);
            hypotheses.push_back(std::move(h));
        }
        cur_text.reset();
        cur_just.clear();
        in_justification = false;
    };

    while (std::getline(in, line)) {
        line = trim(line);
        if (auto text = after_label(line, "Hypothesis")) {
            flush();
            // inline "Hypothesis: <>; Justification: <>" form
            std::string low = lower(*text);
            std::size_t jpos = low.find("justification:");
            if (jpos != std::string::npos) {
                std::string head = trim(text->substr(0, jpos));
                while (!head.empty() && (head.back() == ';' || head.back() == ','))
                    head.pop_back();
                cur_text = trim(head);
                cur_just = trim(text->substr(jpos + std::string("justification:").size()));
                in_justification = true;
            } else {
                cur_text = *text;
            }
            continue;
        }
        if (auto just = after_label(line, "Justification")) {
            if (cur_text) {
                cur_just = *just;
                in_justification = true;
            }
            continue;
        }
        if (line.empty()) continue;
        // continuation lines
        if (in_justification && cur_text) {
            cur_just += " " + line;
        } else if (cur_text && cur_just.empty()) {
            *cur_text += " " + line;
        }
    }
    flush();

    if (hypotheses.empty())
        throw ParseFailure("no Hypothesis/Justification pairs found in provider response",
                           response);
    if (expected_n > 0 && hypotheses.size() > static_cast<std::size_t>(expected_n))
        hypotheses.resize(static_cast<std::size_t>(expected_n));
    return hypotheses;
}

std::string build_operationalization_prompt(const std::vector<Hypothesis>& hypotheses,
                                            const DataContext& context) {
    if (hypotheses.empty())
        throw ConfigError("operationalization prompt needs at least one hypothesis");
    std::ostringstream out;
    out << "The following are hypotheses about which people within a dataset the model might "
           "underperform on.\n"
           "Propose specific ranges for each hypothesis. Hypotheses:\n";
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        out << "Hypothesis " << i + 1 << ": " << hypotheses[i].text << "\n";
        if (!hypotheses[i].justification.empty())
            out << "Justification: " << hypotheses[i].justification << "\n";
        out << "\n";
    }
    out << context.description_text << "\n\n";
    out << "TASK: Propose specific variable ranges for each hypothesis such that they are "
           "clearly operationalizable and defined. Use this format: Hypothesis: <>; "
           "Operationalization: <>.";
    return out.str();
}

std::string normalize_query_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '&' && i + 1 < text.size() && text[i + 1] == '&') {
            out += " and ";
            ++i;
        } else if (text[i] == '|' && i + 1 < text.size() && text[i + 1] == '|') {
            out += " or ";
            ++i;
        } else {
            out += text[i];
        }
    }
    return trim(out);
}

namespace {

// {0: 'disability == "Y"', 1: "age > 30"} -> entries; nullopt when the text
// holds no such map.
std::optional<std::map<int, std::string>> parse_query_map(const std::string& response) {
    std::size_t open = response.find('{');
    if (open == std::string::npos) return std::nullopt;
    std::map<int, std::string> out;
    std::size_t pos = open + 1;
    while (pos < response.size()) {
        while (pos < response.size() &&
               (std::isspace(static_cast<unsigned char>(response[pos])) || response[pos] == ',' ||
                response[pos] == '\'' || response[pos] == '"'))
            ++pos;
        if (pos >= response.size() || response[pos] == '}') break;
        if (!std::isdigit(static_cast<unsigned char>(response[pos]))) return std::nullopt;
        int key = 0;
        while (pos < response.size() && std::isdigit(static_cast<unsigned char>(response[pos])))
            key = key * 10 + (response[pos++] - '0');
        while (pos < response.size() &&
               (std::isspace(static_cast<unsigned char>(response[pos])) || response[pos] == '\'' ||
                response[pos] == '"'))
            ++pos;
        if (pos >= response.size() || response[pos] != ':') return std::nullopt;
        ++pos;
        while (pos < response.size() && std::isspace(static_cast<unsigned char>(response[pos])))
            ++pos;
        if (pos >= response.size()) return std::nullopt;
        const char quote = response[pos];
        if (quote != '\'' && quote != '"') return std::nullopt;
        ++pos;
        std::string value;
        while (pos < response.size() && response[pos] != quote) value += response[pos++];
        if (pos >= response.size()) return std::nullopt;
        ++pos; // closing quote
        out[key] = value;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

} // namespace

std::map<int, std::string> parse_operationalization_response(const std::string& response,
                                                             const Dataset& schema) {
    (void)schema; // validation happens in the adjustment loop
    std::map<int, std::string> queries;

    if (auto map_form = parse_query_map(response)) {
        for (auto& [idx, text] : *map_form) queries[idx] = normalize_query_text(text);
        if (!queries.empty()) return queries;
    }

    // prose form: "Operationalization:" lines, indexed by the preceding
    // hypothesis headers (or sequentially when there are none)
    std::istringstream in(response);
    std::string line;
    int current_index = -1;
    bool saw_header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (auto text = after_label(line, "Hypothesis")) {
            (void)text;
            ++current_index;
            saw_header = true;
            continue;
        }
        if (auto op = after_label(line, "Operationalization")) {
            int idx = saw_header ? std::max(current_index, 0)
                                 : static_cast<int>(queries.size());
            if (!op->empty()) queries[idx] = normalize_query_text(*op);
        }
    }

    if (queries.empty())
        throw ParseFailure("no operationalizations found in provider response", response);
    return queries;
}

bool feasibility_check(const DataContext& context, const std::string& task_prose,
                       HypothesisProvider& provider, int n_refine,
                       std::vector<std::string>* warnings) {
    if (n_refine < 0) throw ConfigError("n_refine must be >= 0");

    std::ostringstream names;
    for (std::size_t i = 0; i < context.column_summaries.size(); ++i) {
        if (i) names << ", ";
        names << context.column_summaries[i].name;
    }

    std::ostringstream task;
    task << "Evaluate subgroups for model performance. Could any relationships plausibly exist "
            "between the listed covariates and the outcome, such that some subgroup is worth "
            "testing for model underperformance?\n\n";
    if (!task_prose.empty()) task << "Context: " << task_prose << "\n\n";
    task << "Columns: " << names.str();

    std::string answer =
        provider.complete({RequestKind::FeasibilityInitial, "", task.str()});

    for (int i = 0; i < n_refine; ++i) {
        std::ostringstream refine;
        refine << "Refine the answer. Critically evaluate whether the relationships proposed "
                  "below are actually plausible for this context, and revise the assessment.\n\n"
               << "Previous answer: " << answer;
        answer = provider.complete({RequestKind::FeasibilityRefine, "", refine.str()});
    }

    std::ostringstream boolean_task;
    boolean_task << "Based on analysis, provide yes/no answer: should any subgroups be tested "
                    "for model underperformance?\n\nAnalysis: "
                 << answer;
    std::string verdict =
        provider.complete({RequestKind::FeasibilityBoolean, "", boolean_task.str()});

    // first standalone yes/no word decides
    std::string low = lower(verdict);
    auto word_at = [&low](std::size_t pos, std::size_t len) {
        const bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(low[pos - 1]));
        const std::size_t end = pos + len;
        const bool right_ok =
            end >= low.size() || !std::isalpha(static_cast<unsigned char>(low[end]));
        return left_ok && right_ok;
    };
    std::size_t best = std::string::npos;
    bool value = true;
    for (std::size_t pos = low.find("yes"); pos != std::string::npos;
         pos = low.find("yes", pos + 1))
        if (word_at(pos, 3)) { best = pos; value = true; break; }
    for (std::size_t pos = low.find("no"); pos != std::string::npos;
         pos = low.find("no", pos + 1))
        if (word_at(pos, 2)) {
            if (pos < best) { best = pos; value = false; }
            break;
        }
    if (best == std::string::npos) {
        if (warnings)
            warnings->push_back("feasibility verdict '" + verdict +
                                "' is not a yes/no answer; defaulting to feasible");
        return true;
    }
    return value;
}

namespace {

// Pulls a query candidate out of a free-form repair reply.
std::string extract_query_candidate(const std::string& reply) {
    std::istringstream in(reply);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (auto op = after_label(line, "Operationalization")) return *op;
        if (auto adj = after_label(line, "Adjusted condition")) return *adj;
        if (auto cond = after_label(line, "Condition")) return *cond;
        // strip wrapping quotes / backticks
        while (!line.empty() && (line.front() == '`' || line.front() == '"' || line.front() == '\''))
            line.erase(line.begin());
        while (!line.empty() && (line.back() == '`' || line.back() == '"' || line.back() == '\''))
            line.pop_back();
        return line;
    }
    return "";
}

} // namespace

std::string adjust_query(const std::string& predicate_text, const Dataset& dataset,
                         HypothesisProvider& provider, int max_iters) {
    if (max_iters < 1) throw ConfigError("adjust_query needs max_iters >= 1");

    std::string current = normalize_query_text(predicate_text);
    std::string last_error;
    for (int iter = 0; iter <= max_iters; ++iter) {
        if (!current.empty()) {
            try {
                PredicatePtr ast = parse_predicate(current, dataset);
                Slice slice = eval_predicate(ast, dataset);
                if (!slice.row_indices.empty()) return current;
                last_error = "condition selects no rows";
            } catch (const DataError& e) {
                last_error = e.what();
            }
        } else {
            last_error = "empty condition";
        }
        if (iter == max_iters) break;

        const DataContext ctx = describe(dataset, "");
        std::ostringstream prompt;
        prompt << "The condition below cannot be used on the dataset (" << last_error << ").\n\n"
               << "Condition: " << current << "\n\n"
               << ctx.description_text << "\n\n"
               << "TASK: Propose an adjusted condition over these columns, with the same "
                  "intent, that selects at least one row. Reply with the adjusted condition "
                  "only.";
        std::string reply = provider.complete({RequestKind::Adjustment, "", prompt.str()});
        current = normalize_query_text(extract_query_candidate(reply));
    }
    throw AdjustmentFailure("query adjustment exhausted after " + std::to_string(max_iters) +
                                " attempts (" + last_error + ")",
                            current);
}

HypothesisStageResult run_hypothesis_stage(const Dataset& dataset,
                                           const HypothesisStageConfig& config,
                                           HypothesisProvider& provider) {
    HypothesisStageResult result;
    const DataContext ctx = describe(dataset, config.task_prose);

    if (config.run_feasibility) {
        result.feasible = feasibility_check(ctx, config.task_prose, provider, config.n_refine,
                                            &result.warnings);
        if (!result.feasible) return result;
    }

    PromptBundle bundle;
    bundle.external_context = config.external_context;
    bundle.data_context_text = ctx.description_text;
    bundle.n_hypotheses = config.n_hypotheses;
    bundle.requirements = config.requirements;

    const std::string generation_response =
        provider.complete({RequestKind::Generation, "", build_generation_prompt(bundle)});
    std::vector<Hypothesis> hypotheses =
        parse_hypothesis_response(generation_response, config.n_hypotheses, &result.warnings);
    for (auto& h : hypotheses) h.source = provider.kind_name();

    const std::string ops_response = provider.complete(
        {RequestKind::Operationalization, "", build_operationalization_prompt(hypotheses, ctx)});
    std::map<int, std::string> queries;
    try {
        queries = parse_operationalization_response(ops_response, dataset);
    } catch (const ParseFailure& e) {
        result.warnings.push_back(std::string("operationalization parsing failed: ") + e.what());
    }

    for (auto& hyp : hypotheses) {
        std::string candidate;
        auto it = queries.find(hyp.id);
        if (it != queries.end()) candidate = it->second;
        if (candidate.empty() && hyp.operationalization) candidate = *hyp.operationalization;
        try {
            std::string adjusted =
                adjust_query(candidate, dataset, provider, config.adjust_max_iters);
            OperationalizedHypothesis op;
            op.hypothesis = hyp;
            op.hypothesis.operationalization = adjusted;
            op.predicate = parse_predicate(adjusted, dataset);
            op.predicate_text = render(op.predicate);
            result.operationalized.push_back(std::move(op));
        } catch (const ProviderError& e) {
            result.warnings.push_back("hypothesis " + std::to_string(hyp.id) +
                                      " is untestable: " + e.what());
            result.untestable.push_back(hyp);
        }
    }
    return result;
}

} // namespace smart
