#pragma once

#include "smart/falsify.hpp"
#include "smart/metrics.hpp"
#include "smart/provider.hpp"

#include <string>
#include <utility>
#include <vector>

namespace smart {

struct HypothesisRow {
    int hypothesis_id = 0;
    std::string hypothesis;
    std::string justification;
    std::string operationalization;
    std::size_t group_size = 0;
    double p_value = 1.0; // NaN when untested
    double adjusted_alpha = 0.0;
    double delta_acc = 0.0;
    double acc_slice = 0.0;
    double acc_rest = 0.0;
    double acc_overall = 0.0;
    bool significant = false;
    Evidence evidence = Evidence::Untested;
};

struct AuditReport {
    std::vector<std::pair<std::string, std::string>> run_config;
    std::vector<HypothesisRow> rows;
    std::vector<SliceMetrics> metrics; // aligned with rows
    std::string transcript_digest;
    std::size_t transcript_calls = 0;
    std::string summary; // optional, provider-generated
    std::vector<std::string> warnings;
    bool feasible = true;
    bool nsf = false;
};

// Human-readable report: hypothesis table plus the two metric tables,
// 3-decimal p-values, 2-decimal metrics, NA for undefined cells.
std::string render_markdown(const AuditReport& report, bool conventional_or = false);

// JSON Lines, full precision, App-F field names; loses nothing.
std::string render_machine(const AuditReport& report);

AuditReport parse_machine(const std::string& text);

struct ReportPaths {
    std::string markdown;
    std::string machine;
    std::string transcript; // empty when not written
};

ReportPaths write_report(const AuditReport& report, const std::string& out_dir,
                         const std::vector<TranscriptEntry>* transcript = nullptr,
                         bool conventional_or = false);

// Asks the provider for a recommendations section over the rendered tables.
// Failure leaves the report unchanged apart from a warning.
void summarize_with_provider(AuditReport& report, HypothesisProvider& provider);

std::string transcript_digest(const std::vector<TranscriptEntry>& transcript);

} // namespace smart
