#include "smart/report.hpp"

#include "smart/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace smart {

namespace {

std::string fixed(double v, int decimals) {
    if (std::isnan(v)) return "-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    // avoid the "-0.00" artifact
    std::string s = buf;
    bool all_zero = true;
    for (char ch : s)
        if (ch >= '1' && ch <= '9') all_zero = false;
    if (all_zero && !s.empty() && s[0] == '-') s.erase(s.begin());
    return s;
}

std::string opt_fixed(const std::optional<double>& v, int decimals) {
    return v ? fixed(*v, decimals) : "NA";
}

std::string escape_cell(const std::string& text) {
    std::string out;
    for (char ch : text) {
        if (ch == '|') out += "\\|";
        else if (ch == '\n') out += ' ';
        else out += ch;
    }
    return out;
}

nlohmann::json opt_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::optional<double> json_opt(const nlohmann::json& v) {
    if (v.is_null() || !v.is_number()) return std::nullopt;
    return v.get<double>();
}

double json_double_or_nan(const nlohmann::json& v) {
    if (v.is_null()) return std::nan("");
    return v.get<double>();
}

} // namespace

std::string transcript_digest(const std::vector<TranscriptEntry>& transcript) {
    std::uint64_t hash = 1469598103934665603ULL;
    auto mix = [&hash](const std::string& s) {
        for (unsigned char ch : s) {
            hash ^= ch;
            hash *= 1099511628211ULL;
        }
        hash ^= 0x1f;
        hash *= 1099511628211ULL;
    };
    for (const auto& entry : transcript) {
        mix(to_string(entry.kind));
        mix(entry.prompt);
        mix(entry.response);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string render_markdown(const AuditReport& report, bool conventional_or) {
    std::ostringstream out;
    out << "# Model audit report\n\n";

    if (!report.run_config.empty()) {
        out << "## Run configuration\n\n";
        for (const auto& [key, value] : report.run_config)
            out << "- " << key << ": " << value << "\n";
        out << "\n";
    }

    if (report.nsf)
        out << "This is the no-self-falsification ablation: hypotheses are listed in provider "
               "order and carry no p-values.\n\n";

    out << "## Hypotheses\n\n";
    if (report.rows.empty()) {
        if (!report.feasible)
            out << "Zero slices were tested: the feasibility check concluded that no "
                   "relationship between the covariates and the outcome is worth testing.\n\n";
        else
            out << "Zero slices were tested: no hypothesis survived operationalization.\n\n";
    } else {
        out << "| Hypothesis | Justification | Operationalization | p-value | \\|dAcc\\| | "
               "Evidence |\n";
        out << "|---|---|---|---|---|---|\n";
        for (const auto& row : report.rows) {
            out << "| " << escape_cell(row.hypothesis) << " | " << escape_cell(row.justification)
                << " | `" << escape_cell(row.operationalization) << "` | "
                << fixed(row.p_value, 3) << " | " << fixed(row.delta_acc, 3) << " | "
                << to_string(row.evidence) << " |\n";
        }
        out << "\n";
    }

    if (!report.metrics.empty()) {
        out << "## Slice metrics\n\n";
        out << "| | group_size | support | p_value_bootstrap | num_criteria | outcome_diff | "
               "accuracy_diff |\n";
        out << "|---|---|---|---|---|---|---|\n";
        for (std::size_t i = 0; i < report.metrics.size(); ++i) {
            const SliceMetrics& m = report.metrics[i];
            const double p = i < report.rows.size() ? report.rows[i].p_value : std::nan("");
            out << "| H" << i << " | " << fixed(static_cast<double>(m.group_size), 2) << " | "
                << fixed(m.support, 2) << " | " << fixed(p, 2) << " | "
                << fixed(static_cast<double>(m.num_criteria), 2) << " | "
                << fixed(m.outcome_diff, 2) << " | " << fixed(m.accuracy_diff, 2) << " |\n";
        }
        out << "\n";
        out << "| | odds_ratio_outcome | odds_ratio_acc | lift_outcome | lift_acc | "
               "weighted_relative_y | weighted_relative_acc |\n";
        out << "|---|---|---|---|---|---|---|\n";
        for (std::size_t i = 0; i < report.metrics.size(); ++i) {
            const SliceMetrics& m = report.metrics[i];
            out << "| H" << i << " | " << opt_fixed(m.odds_ratio_outcome, 2) << " | "
                << opt_fixed(m.odds_ratio_acc, 2) << " | " << opt_fixed(m.lift_outcome, 2)
                << " | " << opt_fixed(m.lift_acc, 2) << " | " << fixed(m.weighted_relative_y, 2)
                << " | " << fixed(m.weighted_relative_acc, 2) << " |\n";
        }
        out << "\n";
        if (conventional_or) {
            out << "| | conventional_or_outcome | conventional_or_acc |\n";
            out << "|---|---|---|\n";
            for (std::size_t i = 0; i < report.metrics.size(); ++i) {
                const SliceMetrics& m = report.metrics[i];
                out << "| H" << i << " | " << opt_fixed(m.conventional_or_outcome, 2) << " | "
                    << opt_fixed(m.conventional_or_acc, 2) << " |\n";
            }
            out << "\n";
        }
    }

    if (!report.summary.empty()) out << "## Recommendations\n\n" << report.summary << "\n\n";

    if (!report.warnings.empty()) {
        out << "## Warnings\n\n";
        for (const auto& w : report.warnings) out << "- " << w << "\n";
        out << "\n";
    }

    out << "## Provider transcript\n\n";
    out << "- calls: " << report.transcript_calls << "\n";
    out << "- digest: " << report.transcript_digest << "\n";
    return out.str();
}

std::string render_machine(const AuditReport& report) {
    std::ostringstream out;

    nlohmann::json config;
    config["record"] = "config";
    config["feasible"] = report.feasible;
    config["nsf"] = report.nsf;
    config["run_config"] = nlohmann::json::array();
    for (const auto& [key, value] : report.run_config)
        config["run_config"].push_back({key, value});
    out << config.dump() << "\n";

    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const HypothesisRow& row = report.rows[i];
        nlohmann::json obj;
        obj["record"] = "hypothesis";
        obj["hypothesis_id"] = row.hypothesis_id;
        obj["hypothesis"] = row.hypothesis;
        obj["justification"] = row.justification;
        obj["operationalization"] = row.operationalization;
        obj["group_size"] = row.group_size;
        obj["p_value_bootstrap"] = std::isnan(row.p_value) ? nlohmann::json(nullptr)
                                                           : nlohmann::json(row.p_value);
        obj["adjusted_alpha"] = std::isnan(row.adjusted_alpha)
                                    ? nlohmann::json(nullptr)
                                    : nlohmann::json(row.adjusted_alpha);
        obj["delta_acc"] = row.delta_acc;
        obj["acc_slice"] = row.acc_slice;
        obj["acc_rest"] = row.acc_rest;
        obj["acc_overall"] = row.acc_overall;
        obj["significant"] = row.significant;
        obj["evidence"] = to_string(row.evidence);
        if (i < report.metrics.size()) {
            const SliceMetrics& m = report.metrics[i];
            obj["support"] = m.support;
            obj["num_criteria"] = m.num_criteria;
            obj["outcome_diff"] = m.outcome_diff;
            obj["accuracy_diff"] = m.accuracy_diff;
            obj["odds_ratio_outcome"] = opt_json(m.odds_ratio_outcome);
            obj["odds_ratio_acc"] = opt_json(m.odds_ratio_acc);
            obj["lift_outcome"] = opt_json(m.lift_outcome);
            obj["lift_acc"] = opt_json(m.lift_acc);
            obj["weighted_relative_y"] = m.weighted_relative_y;
            obj["weighted_relative_acc"] = m.weighted_relative_acc;
            obj["outcome_slice"] = m.outcome_slice;
            obj["outcome_dataset"] = m.outcome_dataset;
            obj["outcome_rest"] = m.outcome_rest;
            obj["acc_dataset"] = m.acc_dataset;
            obj["conventional_or_outcome"] = opt_json(m.conventional_or_outcome);
            obj["conventional_or_acc"] = opt_json(m.conventional_or_acc);
        }
        out << obj.dump() << "\n";
    }

    if (!report.summary.empty()) {
        nlohmann::json obj;
        obj["record"] = "summary";
        obj["text"] = report.summary;
        out << obj.dump() << "\n";
    }
    for (const auto& w : report.warnings) {
        nlohmann::json obj;
        obj["record"] = "warning";
        obj["text"] = w;
        out << obj.dump() << "\n";
    }
    {
        nlohmann::json obj;
        obj["record"] = "transcript";
        obj["digest"] = report.transcript_digest;
        obj["calls"] = report.transcript_calls;
        out << obj.dump() << "\n";
    }
    return out.str();
}

AuditReport parse_machine(const std::string& text) {
    AuditReport report;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj = nlohmann::json::parse(line);
        const std::string record = obj.value("record", "");
        if (record == "config") {
            report.feasible = obj.value("feasible", true);
            report.nsf = obj.value("nsf", false);
            if (obj.contains("run_config") && obj["run_config"].is_array()) {
                for (const auto& pair : obj["run_config"])
                    if (pair.is_array() && pair.size() == 2)
                        report.run_config.emplace_back(pair[0].get<std::string>(),
                                                       pair[1].get<std::string>());
            }
        } else if (record == "hypothesis") {
            HypothesisRow row;
            row.hypothesis_id = obj.value("hypothesis_id", 0);
            row.hypothesis = obj.value("hypothesis", "");
            row.justification = obj.value("justification", "");
            row.operationalization = obj.value("operationalization", "");
            row.group_size = obj.value("group_size", std::size_t{0});
            row.p_value = json_double_or_nan(obj.at("p_value_bootstrap"));
            row.adjusted_alpha = json_double_or_nan(obj.at("adjusted_alpha"));
            row.delta_acc = obj.value("delta_acc", 0.0);
            row.acc_slice = obj.value("acc_slice", 0.0);
            row.acc_rest = obj.value("acc_rest", 0.0);
            row.acc_overall = obj.value("acc_overall", 0.0);
            row.significant = obj.value("significant", false);
            const std::string evidence = obj.value("evidence", "Untested");
            row.evidence = evidence == "Supported"
                               ? Evidence::Supported
                               : evidence == "Not supported" ? Evidence::NotSupported
                                                             : Evidence::Untested;
            report.rows.push_back(std::move(row));

            if (obj.contains("support")) {
                SliceMetrics m;
                m.group_size = obj.value("group_size", std::size_t{0});
                m.support = obj.value("support", 0.0);
                m.num_criteria = obj.value("num_criteria", 1);
                m.outcome_diff = obj.value("outcome_diff", 0.0);
                m.accuracy_diff = obj.value("accuracy_diff", 0.0);
                m.odds_ratio_outcome = json_opt(obj.at("odds_ratio_outcome"));
                m.odds_ratio_acc = json_opt(obj.at("odds_ratio_acc"));
                m.lift_outcome = json_opt(obj.at("lift_outcome"));
                m.lift_acc = json_opt(obj.at("lift_acc"));
                m.weighted_relative_y = obj.value("weighted_relative_y", 0.0);
                m.weighted_relative_acc = obj.value("weighted_relative_acc", 0.0);
                m.outcome_slice = obj.value("outcome_slice", 0.0);
                m.outcome_dataset = obj.value("outcome_dataset", 0.0);
                m.outcome_rest = obj.value("outcome_rest", 0.0);
                m.acc_slice = obj.value("acc_slice", 0.0);
                m.acc_dataset = obj.value("acc_dataset", 0.0);
                m.acc_rest = obj.value("acc_rest", 0.0);
                m.conventional_or_outcome = json_opt(obj.at("conventional_or_outcome"));
                m.conventional_or_acc = json_opt(obj.at("conventional_or_acc"));
                report.metrics.push_back(std::move(m));
            }
        } else if (record == "summary") {
            report.summary = obj.value("text", "");
        } else if (record == "warning") {
            report.warnings.push_back(obj.value("text", ""));
        } else if (record == "transcript") {
            report.transcript_digest = obj.value("digest", "");
            report.transcript_calls = obj.value("calls", std::size_t{0});
        }
    }
    return report;
}

ReportPaths write_report(const AuditReport& report, const std::string& out_dir,
                         const std::vector<TranscriptEntry>* transcript, bool conventional_or) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + out_dir + "'");

    ReportPaths paths;
    paths.markdown = (fs::path(out_dir) / "report.md").string();
    paths.machine = (fs::path(out_dir) / "report.jsonl").string();

    std::ofstream md(paths.markdown, std::ios::binary);
    if (!md) throw DataError("cannot write '" + paths.markdown + "'");
    md << render_markdown(report, conventional_or);

    std::ofstream machine(paths.machine, std::ios::binary);
    if (!machine) throw DataError("cannot write '" + paths.machine + "'");
    machine << render_machine(report);

    if (transcript) {
        paths.transcript = (fs::path(out_dir) / "transcript.log").string();
        std::ofstream log(paths.transcript, std::ios::binary);
        if (!log) throw DataError("cannot write '" + paths.transcript + "'");
        for (const auto& entry : *transcript) {
            log << "=== request (" << to_string(entry.kind) << ") ===\n"
                << entry.prompt << "\n--- response ---\n"
                << entry.response << "\n\n";
        }
    }
    return paths;
}

void summarize_with_provider(AuditReport& report, HypothesisProvider& provider) {
    AuditReport tables_only = report;
    tables_only.summary.clear();
    std::ostringstream prompt;
    prompt << "The following is a model audit report. Summarize the key findings and provide "
              "recommendations for the end user of the model.\n\n"
           << render_markdown(tables_only);
    try {
        const std::string reply =
            provider.complete({RequestKind::Summary, "", prompt.str()});
        if (reply.empty()) {
            report.warnings.push_back("summary provider returned an empty reply; section omitted");
            return;
        }
        report.summary = reply;
    } catch (const ProviderError& e) {
        report.warnings.push_back(std::string("summary provider failed: ") + e.what());
    }
}

} // namespace smart
