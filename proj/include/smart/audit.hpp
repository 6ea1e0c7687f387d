#pragma once

#include "smart/dataset.hpp"
#include "smart/falsify.hpp"
#include "smart/hypothesis.hpp"
#include "smart/provider.hpp"
#include "smart/remote.hpp"
#include "smart/report.hpp"
#include "smart/splitter.hpp"

#include <memory>
#include <optional>
#include <string>

namespace smart {

// exit codes: 0 ok, 2 config, 3 data, 4 provider, 5 strict run with no slices
enum ExitCode {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitProvider = 4,
    kExitNoSlicesStrict = 5,
};

struct RunConfig {
    std::string data_path;
    std::string schema_path; // optional sidecar (auto-detected when empty)
    std::string target;

    // exactly one predictions source
    std::string pred_col;
    std::string pred_file;
    bool fit_logistic_model = false;
    double test_fraction = 0.5; // only with fit_logistic_model
    int fit_epochs = 400;
    double fit_learning_rate = 0.5;

    std::string context_text; // external context C_e
    std::string requirements;

    std::string provider_kind = "scripted"; // file | scripted | remote
    std::string hypotheses_path;
    std::string fixtures_path;
    RemoteConfig remote;

    TestConfig test;
    SplitConstraints split_constraints;
    int n_hypotheses = 5;
    int n_refine = 0;
    int adjust_max_iters = 2;
    bool run_feasibility = true;
    bool nsf = false;
    bool data_driven_ops = false;
    bool summarize = false;
    bool conventional_or = false;
    bool strict = false;
    std::uint64_t seed = 0;
    std::string out_dir;
    int verbosity = 0;

    void validate() const; // throws ConfigError
};

struct AuditOutcome {
    AuditReport report;
    int exit_code = kExitOk;
    ReportPaths paths; // populated when out_dir is set
};

std::unique_ptr<HypothesisProvider> make_provider(const RunConfig& config,
                                                  std::unique_ptr<Transport> transport = nullptr);

// The four-step pipeline: describe/feasibility/generation/operationalization,
// falsification (or the NSF ablation), metrics, report. The provider override
// lets tests inject fixtures without touching the filesystem.
AuditOutcome run_audit(const RunConfig& config,
                       std::unique_ptr<HypothesisProvider> provider_override = nullptr,
                       std::ostream* log = nullptr);

} // namespace smart
